#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fwl/annotators.hpp"
#include "fwl/gp.hpp"
#include "fwl/kernels.hpp"
#include "fwl/net.hpp"

namespace fwl {

using Json = nlohmann::json;

enum class Strategy {
  WA,
  NN_W,
  NN_S,
  NN_SplusW,
  NN_WtoS,
  NN_WomegaToS,
  FWL_unsuprep,
  FWL_noSigma,
  FWL,
  FWL_s,
};

inline const std::vector<std::pair<Strategy, std::string>>& strategy_names() {
  static const std::vector<std::pair<Strategy, std::string>> names = {
      {Strategy::WA, "WA"},
      {Strategy::NN_W, "NN_W"},
      {Strategy::NN_S, "NN_S"},
      {Strategy::NN_SplusW, "NN_SplusW"},
      {Strategy::NN_WtoS, "NN_WtoS"},
      {Strategy::NN_WomegaToS, "NN_WomegaToS"},
      {Strategy::FWL_unsuprep, "FWL_unsuprep"},
      {Strategy::FWL_noSigma, "FWL_noSigma"},
      {Strategy::FWL, "FWL"},
      {Strategy::FWL_s, "FWL_s"},
  };
  return names;
}

inline std::string strategy_name(Strategy s) {
  for (const auto& [st, name] : strategy_names())
    if (st == s) return name;
  throw ConfigParse("unknown strategy value");
}

inline Strategy strategy_from_name(const std::string& s) {
  for (const auto& [st, name] : strategy_names())
    if (name == s) return st;
  throw ConfigParse("unknown strategy: '" + s + "'");
}

enum class TeacherInput { RawInput, StudentRepr };

/// Everything a single run needs; the config echo in a report is enough to
/// reproduce the run byte for byte.
struct TrainConfig {
  std::string preset = "toy";
  Task task = Task::Regression;
  Strategy strategy = Strategy::FWL;

  double beta = 1.0;
  std::optional<double> omega;  // NN_WomegaToS; unset -> mean eta2 of the matching FWL run

  std::size_t pretrain_epochs = 400;
  std::size_t finetune_epochs = 300;
  std::size_t batch_size = 16;
  std::size_t finetune_batch_size = 0;  // 0 -> batch_size
  double base_rate = 1e-3;
  double l2 = 0.0;
  std::uint64_t seed = 1;

  TeacherInput teacher_input = TeacherInput::StudentRepr;
  std::size_t cluster_count = 0;  // 0 -> max(1, n_strong / 10)
  KernelSpec kernel = KernelSpec::rbf_white(1.0, 0.01);
  double jitter = 1e-8;

  std::vector<std::size_t> hidden = {128, 128, 128};

  // data generation
  std::size_t n_weak = 100;
  std::size_t n_strong = 10;
  std::size_t n_test = 201;
  double x_lo = -10.0;
  double x_hi = 10.0;
  double strong_noise_sd = 0.1;
  AnnotatorSpec annotator = AnnotatorSpec::toy_sinc();

  // classification task shape
  std::size_t classes = 3;
  double blob_spread = 0.9;

  std::size_t effective_clusters(std::size_t n_strong_samples) const {
    if (cluster_count > 0) return cluster_count;
    return std::max<std::size_t>(1, n_strong_samples / 10);
  }

  std::size_t effective_finetune_batch() const {
    return finetune_batch_size > 0 ? finetune_batch_size : batch_size;
  }

  LossSpec loss_spec() const {
    return {task == Task::Regression ? LossSpec::Kind::MSE : LossSpec::Kind::CrossEntropy, l2};
  }
};

inline void to_json(Json& j, const KernelTerm& t) {
  j = Json{{"kind", kernel_kind_name(t.kind)}};
  switch (t.kind) {
    case KernelKind::RBF:
    case KernelKind::Matern32: j["length_scale"] = t.length_scale; break;
    case KernelKind::Linear: j["sigma0"] = t.sigma0; break;
    case KernelKind::White: j["noise_level"] = t.noise_level; break;
  }
}

inline void from_json(const Json& j, KernelTerm& t) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "RBF") t = KernelTerm::rbf(j.value("length_scale", 1.0));
  else if (kind == "Matern32") t = KernelTerm::matern32(j.value("length_scale", 1.0));
  else if (kind == "Linear") t = KernelTerm::linear(j.value("sigma0", 0.0));
  else if (kind == "White") t = KernelTerm::white(j.value("noise_level", 0.0));
  else throw ConfigParse("unknown kernel kind: '" + kind + "'");
}

inline void to_json(Json& j, const KernelSpec& s) { j = Json{{"terms", s.terms}}; }
inline void from_json(const Json& j, KernelSpec& s) {
  s.terms = j.at("terms").get<std::vector<KernelTerm>>();
}

inline void to_json(Json& j, const Matrix& m) {
  j = Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.storage()}};
}

inline void from_json(const Json& j, Matrix& m) {
  m = Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
             j.at("data").get<std::vector<double>>());
}

inline void to_json(Json& j, const AnnotatorSpec& a) {
  switch (a.kind) {
    case AnnotatorKind::ToySinc:
      j = Json{{"kind", "toy-sinc"}, {"amplitude", a.amplitude}};
      break;
    case AnnotatorKind::Affine:
      j = Json{{"kind", "affine"}, {"slope", a.slope}, {"intercept", a.intercept}};
      break;
    case AnnotatorKind::LinearHeuristic:
      j = Json{{"kind", "linear-heuristic"},
               {"weights", a.weights},
               {"temperature", a.temperature},
               {"noise_rate", a.noise_rate}};
      break;
  }
}

inline void from_json(const Json& j, AnnotatorSpec& a) {
  const std::string kind = j.at("kind").get<std::string>();
  a = AnnotatorSpec{};
  if (kind == "toy-sinc") {
    a.kind = AnnotatorKind::ToySinc;
    a.amplitude = j.value("amplitude", 2.0);
  } else if (kind == "affine") {
    a.kind = AnnotatorKind::Affine;
    a.slope = j.value("slope", 1.0);
    a.intercept = j.value("intercept", 1.0);
  } else if (kind == "linear-heuristic") {
    a.kind = AnnotatorKind::LinearHeuristic;
    a.weights = j.at("weights").get<Matrix>();
    a.temperature = j.value("temperature", 1.0);
    a.noise_rate = j.value("noise_rate", 0.0);
  } else {
    throw ConfigParse("unknown annotator kind: '" + kind + "'");
  }
}

inline void to_json(Json& j, const TrainConfig& c) {
  j = Json{
      {"preset", c.preset},
      {"task", c.task == Task::Regression ? "regression" : "classification"},
      {"strategy", strategy_name(c.strategy)},
      {"beta", c.beta},
      {"pretrain_epochs", c.pretrain_epochs},
      {"finetune_epochs", c.finetune_epochs},
      {"batch_size", c.batch_size},
      {"finetune_batch_size", c.finetune_batch_size},
      {"base_rate", c.base_rate},
      {"l2", c.l2},
      {"seed", c.seed},
      {"teacher_input", c.teacher_input == TeacherInput::RawInput ? "raw" : "student-repr"},
      {"cluster_count", c.cluster_count},
      {"kernel", c.kernel},
      {"jitter", c.jitter},
      {"hidden", c.hidden},
      {"n_weak", c.n_weak},
      {"n_strong", c.n_strong},
      {"n_test", c.n_test},
      {"x_lo", c.x_lo},
      {"x_hi", c.x_hi},
      {"strong_noise_sd", c.strong_noise_sd},
      {"annotator", c.annotator},
      {"classes", c.classes},
      {"blob_spread", c.blob_spread},
  };
  if (c.omega) j["omega"] = *c.omega;
}

inline void from_json(const Json& j, TrainConfig& c) {
  TrainConfig d;  // defaults
  c.preset = j.value("preset", d.preset);
  const std::string task = j.value("task", std::string("regression"));
  if (task == "regression") c.task = Task::Regression;
  else if (task == "classification") c.task = Task::Classification;
  else throw ConfigParse("unknown task: '" + task + "'");
  c.strategy = strategy_from_name(j.value("strategy", strategy_name(d.strategy)));
  c.beta = j.value("beta", d.beta);
  if (j.contains("omega")) c.omega = j.at("omega").get<double>();
  c.pretrain_epochs = j.value("pretrain_epochs", d.pretrain_epochs);
  c.finetune_epochs = j.value("finetune_epochs", d.finetune_epochs);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.finetune_batch_size = j.value("finetune_batch_size", d.finetune_batch_size);
  c.base_rate = j.value("base_rate", d.base_rate);
  c.l2 = j.value("l2", d.l2);
  c.seed = j.value("seed", d.seed);
  const std::string ti = j.value("teacher_input", std::string("student-repr"));
  if (ti == "raw") c.teacher_input = TeacherInput::RawInput;
  else if (ti == "student-repr") c.teacher_input = TeacherInput::StudentRepr;
  else throw ConfigParse("unknown teacher_input: '" + ti + "'");
  c.cluster_count = j.value("cluster_count", d.cluster_count);
  c.kernel = j.contains("kernel") ? j.at("kernel").get<KernelSpec>() : d.kernel;
  c.jitter = j.value("jitter", d.jitter);
  c.hidden = j.value("hidden", d.hidden);
  c.n_weak = j.value("n_weak", d.n_weak);
  c.n_strong = j.value("n_strong", d.n_strong);
  c.n_test = j.value("n_test", d.n_test);
  c.x_lo = j.value("x_lo", d.x_lo);
  c.x_hi = j.value("x_hi", d.x_hi);
  c.strong_noise_sd = j.value("strong_noise_sd", d.strong_noise_sd);
  c.annotator = j.contains("annotator") ? j.at("annotator").get<AnnotatorSpec>() : d.annotator;
  c.classes = j.value("classes", d.classes);
  c.blob_spread = j.value("blob_spread", d.blob_spread);
  if (c.beta < 0.0) throw ConfigParse("beta must be >= 0");
  if (c.omega && (*c.omega < 0.0 || *c.omega > 1.0)) throw ConfigParse("omega must be in [0, 1]");
}

/// Named experiment presets. "toy" is the sin vs 2 sinc task; "toy-star"
/// shrinks the strong set to 5 points; "toy-doublestar" swaps in the bad
/// affine weak annotator f(x) = x + 1; "synth-class" is the 3-class Gaussian
/// blob task with a noisy linear-heuristic annotator.
inline TrainConfig make_preset(const std::string& name) {
  TrainConfig c;
  c.preset = name;
  if (name == "toy" || name == "toy-star" || name == "toy-doublestar") {
    c.task = Task::Regression;
    c.teacher_input = TeacherInput::RawInput;  // the toy teacher sees x directly
    c.cluster_count = 1;                       // single GP on the toy task
    if (name == "toy-star") c.n_strong = 5;
    if (name == "toy-doublestar") c.annotator = AnnotatorSpec::affine(1.0, 1.0);
    return c;
  }
  if (name == "synth-class") {
    c.task = Task::Classification;
    c.teacher_input = TeacherInput::StudentRepr;
    // classification teacher covariance: RBF + homogeneous Linear + White
    c.kernel = KernelSpec{
        {KernelTerm::rbf(1.0), KernelTerm::linear(0.0), KernelTerm::white(0.01)}};
    c.hidden = {32, 32};
    c.n_weak = 300;
    c.n_strong = 12;
    c.n_test = 300;
    c.pretrain_epochs = 150;
    c.finetune_epochs = 150;
    c.blob_spread = 1.1;
    c.annotator = blob_annotator(class_centers(3), 1.0, 0.25, 0.6);
    return c;
  }
  throw ConfigParse("unknown preset: '" + name + "'");
}

/// FNV-1a over the canonical JSON dump; stamped into every result CSV.
inline std::string config_hash(const TrainConfig& c) {
  const std::string dump = Json(c).dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char ch : dump) h = (h ^ static_cast<unsigned char>(ch)) * 0x100000001B3ULL;
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fwl
