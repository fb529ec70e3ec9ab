#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fwl/clustered_gp.hpp"
#include "fwl/config.hpp"
#include "fwl/metrics.hpp"
#include "fwl/train.hpp"

namespace fwl {

/// Equation at the heart of the method: eta2(x) = exp(-beta * Sigma(x)).
/// Zero uncertainty or beta = 0 gives full-rate updates; large beta * Sigma
/// freezes the student at its pretrained state.
inline double fidelity(double sigma, double beta) {
  if (sigma < 0.0) throw NegativeInput("fidelity: sigma must be >= 0");
  if (beta < 0.0) throw NegativeInput("fidelity: beta must be >= 0");
  return std::exp(-beta * sigma);
}

inline std::uint64_t stream_tag(const std::string& s) { return stream_tag(s.c_str()); }

/// FWL_noSigma is FWL with beta pinned to 0, so it shares FWL's random
/// streams; that makes the degenerate equivalence bit-exact.
inline std::string stream_family(Strategy s) {
  return s == Strategy::FWL_noSigma ? "FWL" : strategy_name(s);
}

/// Independent random streams for one run. Data generation is keyed by the
/// seed only, so every strategy sees identical data draws; everything else
/// is keyed by (strategy family, stage).
struct RunStreams {
  Rng data, init, step1, step2, step3, subsample, wa_eval;

  static RunStreams make(const TrainConfig& config) {
    const Rng root(config.seed);
    const Rng base = root.child(stream_tag(stream_family(config.strategy)));
    return RunStreams{
        root.child(stream_tag("data")),      base.child(stream_tag("init")),
        base.child(stream_tag("step1")),     base.child(stream_tag("step2")),
        base.child(stream_tag("step3")),     base.child(stream_tag("subsample")),
        base.child(stream_tag("wa-eval")),
    };
  }
};

struct TaskData {
  LabeledSet weak, strong, test;
};

/// Generate the preset's datasets from the run's data stream.
inline TaskData make_datasets(const TrainConfig& config) {
  Rng data_rng = Rng(config.seed).child(stream_tag("data"));
  TaskData data;
  if (config.task == Task::Regression) {
    auto [weak, strong] = gen_toy_data(data_rng, config.n_weak, config.n_strong, config.x_lo,
                                       config.x_hi, config.strong_noise_sd, config.annotator);
    data.weak = std::move(weak);
    data.strong = std::move(strong);
    data.test = toy_test_grid(config.n_test, config.x_lo, config.x_hi);
  } else {
    ClassificationTask task =
        gen_classification_task(data_rng, config.n_weak, config.n_strong, config.n_test,
                                config.classes, config.blob_spread, config.annotator);
    data.weak = std::move(task.weak);
    data.strong = std::move(task.strong);
    data.test = std::move(task.test);
  }
  return data;
}

inline StudentNet fresh_student(const TrainConfig& config, std::size_t input_dim,
                                std::size_t output_dim, Rng& init_rng) {
  std::vector<std::size_t> dims;
  dims.push_back(input_dim);
  for (std::size_t h : config.hidden) dims.push_back(h);
  dims.push_back(output_dim);
  std::vector<Activation> acts(config.hidden.size(), Activation::Tanh);
  acts.push_back(Activation::Identity);
  return StudentNet::init(dims, acts, config.hidden.size(), init_rng);
}

/// Step 1: pretrain the student on the weak set (uniform fidelity). A
/// step_fidelity below 1 is the NN_WomegaToS variant: every weak update's
/// delta is scaled by the constant omega.
inline TrainTrace step1_pretrain(StudentNet& net, const LabeledSet& weak, const TrainConfig& config,
                                 Rng& rng, double step_fidelity = 1.0) {
  if (weak.size() == 0) throw EmptyDataset("step1_pretrain: empty weak set");
  TrainOptions opt;
  opt.epochs = config.pretrain_epochs;
  opt.batch_size = config.batch_size;
  opt.step_fidelity = step_fidelity;
  AdamState state = AdamState::for_net(net, config.base_rate);
  return train_epochs(net, weak, config.loss_spec(), state, opt, rng);
}

inline Vector student_representation(const StudentNet& net, const Vector& x) {
  return forward(net, x).representation;
}

/// Teacher-space inputs: the student's representation psi(x) row per sample,
/// or the raw inputs when the config says so.
inline Matrix teacher_inputs(const StudentNet& net, const Matrix& inputs, TeacherInput mode) {
  if (mode == TeacherInput::RawInput) return inputs;
  Matrix out(inputs.rows(), net.repr_dim());
  for (std::size_t i = 0; i < inputs.rows(); ++i)
    out.set_row(i, student_representation(net, inputs.row(i)));
  return out;
}

/// Step 2: fit the clustered GP teacher on the strong data, in the frozen
/// student's representation space by default.
inline ClusteredGp step2_fit_teacher(const StudentNet& net, const LabeledSet& strong,
                                     const TrainConfig& config, Rng& rng) {
  if (strong.size() == 0) throw EmptyTrainingSet("step2_fit_teacher: empty strong set");
  const Matrix inputs = teacher_inputs(net, strong.inputs, config.teacher_input);
  const std::size_t k = config.effective_clusters(strong.size());
  return clustered_fit(config.kernel, inputs, strong.labels, k, rng, config.jitter);
}

/// Step 2, second half: relabel the pool (D_w inputs then D_s inputs,
/// duplicates kept) with the teacher's soft labels and uncertainties.
inline LabeledSet make_soft_dataset(const ClusteredGp& teacher, const StudentNet& net,
                                    const Matrix& pool, const TrainConfig& config) {
  if (pool.rows() == 0) throw EmptyDataset("make_soft_dataset: empty pool");
  const std::size_t p = teacher.output_dim();
  LabeledSet soft;
  soft.tier = FidelityTier::Soft;
  soft.inputs = pool;
  soft.labels = Matrix(pool.rows(), p);
  soft.confidences = Vector(pool.rows(), 0.0);
  for (std::size_t i = 0; i < pool.rows(); ++i) {
    Vector z = pool.row(i);
    if (config.teacher_input == TeacherInput::StudentRepr) z = student_representation(net, z);
    const auto [mean, variance] = clustered_predict(teacher, z);
    const SoftPrediction pred = to_soft(mean, Vector(p, variance), config.task);
    soft.labels.set_row(i, pred.soft_label);
    (*soft.confidences)[i] = pred.confidence_input;
  }
  return soft;
}

inline Matrix concat_rows(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw DimensionMismatch("concat_rows: column mismatch");
  Matrix out(a.rows() + b.rows(), a.cols());
  std::copy(a.data(), a.data() + a.size(), out.data());
  std::copy(b.data(), b.data() + b.size(), out.data() + a.size());
  return out;
}

/// Step 3: fine-tune on the soft dataset with per-sample step sizes
/// eta2 = exp(-beta * Sigma).
inline TrainTrace step3_finetune(StudentNet& net, const LabeledSet& soft, const TrainConfig& config,
                                 Rng& rng) {
  if (!soft.confidences) throw MissingConfidences("step3_finetune: soft set lacks confidences");
  TrainOptions opt;
  opt.epochs = config.finetune_epochs;
  opt.batch_size = std::min(config.effective_finetune_batch(), soft.size());
  opt.fidelities.resize(soft.size());
  for (std::size_t i = 0; i < soft.size(); ++i)
    opt.fidelities[i] = fidelity((*soft.confidences)[i], config.beta);
  AdamState state = AdamState::for_net(net, config.base_rate);
  return train_epochs(net, soft, config.loss_spec(), state, opt, rng);
}

/// Draws indices with probability proportional to the given weights
/// (inverse-CDF over the cumulative sums).
class WeightedSampler {
 public:
  explicit WeightedSampler(const Vector& weights) : cumulative_(weights.size()) {
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] < 0.0) throw NegativeInput("WeightedSampler: negative weight");
      total += weights[i];
      cumulative_[i] = total;
    }
    if (!(total > 0.0)) throw NegativeInput("WeightedSampler: weights sum to zero");
  }

  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    std::size_t lo = 0, hi = cumulative_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cumulative_[mid] <= u) lo = mid + 1;
      else hi = mid;
    }
    return lo;
  }

 private:
  Vector cumulative_;
};

inline Matrix predict_all(const StudentNet& net, const Matrix& inputs) {
  Matrix preds(inputs.rows(), net.output_dim());
  for (std::size_t i = 0; i < inputs.rows(); ++i)
    preds.set_row(i, forward(net, inputs.row(i)).output);
  return preds;
}

inline double evaluate_predictions(const Matrix& preds, const LabeledSet& test, Task task) {
  if (test.size() == 0) throw EmptyDataset("evaluate: empty test set");
  if (task == Task::Regression) return rmse(preds, test.labels);
  std::vector<std::size_t> pred_cls(preds.rows()), true_cls(preds.rows());
  for (std::size_t i = 0; i < preds.rows(); ++i) {
    pred_cls[i] = argmax(preds.row_ptr(i), preds.cols());
    true_cls[i] = argmax(test.labels.row_ptr(i), test.labels.cols());
  }
  return macro_f1(pred_cls, true_cls, test.label_dim());
}

/// RMSE (regression) or macro-F1 (classification) of the net on the test set.
inline double evaluate(const StudentNet& net, const LabeledSet& test, Task task) {
  return evaluate_predictions(predict_all(net, test.inputs), test, task);
}

/// Metric of the raw weak annotator on the test set, no training involved.
inline double evaluate_annotator(const AnnotatorSpec& annotator, const LabeledSet& test, Task task,
                                 Rng& rng) {
  if (test.size() == 0) throw EmptyDataset("evaluate_annotator: empty test set");
  Matrix preds(test.size(), test.label_dim());
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (task == Task::Regression) {
      preds(i, 0) = annotate_value(annotator, test.inputs(i, 0));
    } else {
      preds.set_row(i, annotate_distribution(annotator, test.inputs.row(i), rng));
    }
  }
  return evaluate_predictions(preds, test, task);
}

struct RunReport {
  std::string strategy;
  TrainConfig config;
  std::string metric_name;  // "rmse" or "macro_f1"
  double metric = 0.0;
  std::map<std::string, Vector> traces;
  std::map<std::string, double> timings;  // seconds per stage
  std::vector<std::string> notes;
};

inline void to_json(Json& j, const RunReport& r) {
  j = Json{{"strategy", r.strategy}, {"config", r.config},
           {"metrics", Json{{r.metric_name, r.metric}}}, {"traces", r.traces},
           {"timings", r.timings},  {"notes", r.notes},
           {"config_hash", config_hash(r.config)}};
}

namespace detail {

class StageClock {
 public:
  explicit StageClock(RunReport& report) : report_(report) {}
  template <typename F>
  auto time(const std::string& stage, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      report_.timings[stage] = seconds_since(start);
    } else {
      auto result = f();
      report_.timings[stage] = seconds_since(start);
      return result;
    }
  }

 private:
  static double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  RunReport& report_;
};

}  // namespace detail

/// Per-sample eta2 values of a soft set under the given beta.
inline Vector soft_fidelities(const LabeledSet& soft, double beta) {
  if (!soft.confidences) throw MissingConfidences("soft_fidelities: not a soft set");
  Vector out(soft.size());
  for (std::size_t i = 0; i < soft.size(); ++i) out[i] = fidelity((*soft.confidences)[i], beta);
  return out;
}

/// Weighted-sampling fine-tune used by FWL_s: minibatches are drawn with
/// probability proportional to the normalized per-sample confidence, and the
/// updates themselves run at uniform full rate.
inline TrainTrace finetune_weighted_sampling(StudentNet& net, const LabeledSet& soft,
                                             const TrainConfig& config, Rng& rng) {
  const Vector eta2 = soft_fidelities(soft, config.beta);
  const WeightedSampler sampler(eta2);
  AdamState state = AdamState::for_net(net, config.base_rate);
  MiniBatchTrainer trainer(net, config.loss_spec(), state);
  const std::size_t batch_size = std::min(config.effective_finetune_batch(), soft.size());
  const std::size_t batches_per_epoch = (soft.size() + batch_size - 1) / batch_size;
  TrainTrace trace;
  std::vector<std::size_t> batch(batch_size);
  for (std::size_t epoch = 0; epoch < config.finetune_epochs; ++epoch) {
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches_per_epoch; ++b) {
      for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = sampler.draw(rng);
      loss_sum += trainer.step(soft, batch, nullptr, 1.0);
    }
    trace.epoch_loss.push_back(loss_sum / static_cast<double>(batches_per_epoch));
  }
  return trace;
}

/// NN_SplusW: batches alternately drawn from the weak set without
/// replacement and from the strong set with replacement, which oversamples
/// the strong data.
inline TrainTrace train_alternating(StudentNet& net, const LabeledSet& weak,
                                    const LabeledSet& strong, const TrainConfig& config, Rng& rng) {
  if (weak.size() == 0 || strong.size() == 0)
    throw EmptyDataset("train_alternating: empty dataset");
  AdamState state = AdamState::for_net(net, config.base_rate);
  MiniBatchTrainer trainer(net, config.loss_spec(), state);
  std::vector<std::size_t> order(weak.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::size_t> batch;
  TrainTrace trace;
  for (std::size_t epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < weak.size(); start += config.batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(weak.size(), start + config.batch_size); ++i)
        batch.push_back(order[i]);
      loss_sum += trainer.step(weak, batch, nullptr);
      ++batches;
      batch.clear();
      for (std::size_t i = 0; i < config.batch_size; ++i)
        batch.push_back(static_cast<std::size_t>(rng.uniform_index(strong.size())));
      loss_sum += trainer.step(strong, batch, nullptr);
      ++batches;
    }
    trace.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
  }
  return trace;
}

namespace detail {

/// Steps 1-2 of the FWL pipeline: pretrained student, teacher, soft set.
struct FwlStages {
  StudentNet net;
  ClusteredGp teacher;
  LabeledSet soft;
};

inline FwlStages fwl_stages_1_2(const TrainConfig& config, const LabeledSet& weak,
                                const LabeledSet& strong, RunStreams& st, RunReport* report,
                                const StudentNet* pretrained) {
  FwlStages stages;
  StageClock clock(*report);
  if (pretrained) {
    stages.net = *pretrained;
    report->timings["pretrain"] = 0.0;
  } else {
    stages.net = fresh_student(config, weak.input_dim(), weak.label_dim(), st.init);
    TrainTrace trace;
    clock.time("pretrain", [&] { trace = step1_pretrain(stages.net, weak, config, st.step1); });
    report->traces["pretrain"] = std::move(trace.epoch_loss);
  }
  clock.time("teacher", [&] {
    stages.teacher = step2_fit_teacher(stages.net, strong, config, st.step2);
    stages.soft = make_soft_dataset(stages.teacher, stages.net,
                                    concat_rows(weak.inputs, strong.inputs), config);
  });
  return stages;
}

}  // namespace detail

/// Mean eta2 over the soft set of the FWL pipeline with the same seed; the
/// omega approximation the NN_WomegaToS baseline calls for.
inline double reference_mean_eta2(TrainConfig config, const LabeledSet& weak,
                                  const LabeledSet& strong) {
  config.strategy = Strategy::FWL;
  RunStreams st = RunStreams::make(config);
  RunReport scratch;
  const auto stages = detail::fwl_stages_1_2(config, weak, strong, st, &scratch, nullptr);
  return mean(soft_fidelities(stages.soft, config.beta));
}

/// Dispatch one strategy end to end on the given datasets. `pretrained`,
/// when non-null, replaces the step-1 result for strategies that pretrain on
/// the weak set; it must come from an identical config/seed/weak-set run.
inline RunReport run_strategy_with_pretrained(TrainConfig config, const LabeledSet& weak,
                                              const LabeledSet& strong, const LabeledSet& test,
                                              const StudentNet* pretrained) {
  if (weak.input_dim() != strong.input_dim() || weak.input_dim() != test.input_dim() ||
      weak.label_dim() != strong.label_dim() || weak.label_dim() != test.label_dim())
    throw DimensionMismatch("run_strategy: dataset dimensions disagree");
  if (config.strategy == Strategy::FWL_noSigma) config.beta = 0.0;

  RunStreams st = RunStreams::make(config);
  RunReport report;
  report.strategy = strategy_name(config.strategy);
  report.config = config;
  report.metric_name = config.task == Task::Regression ? "rmse" : "macro_f1";
  detail::StageClock clock(report);
  const auto total_start = std::chrono::steady_clock::now();

  auto pretrain_or_reuse = [&](StudentNet& net) {
    if (pretrained) {
      net = *pretrained;
      report.timings["pretrain"] = 0.0;
      return;
    }
    TrainTrace trace;
    clock.time("pretrain", [&] { trace = step1_pretrain(net, weak, config, st.step1); });
    report.traces["pretrain"] = std::move(trace.epoch_loss);
  };

  switch (config.strategy) {
    case Strategy::WA: {
      report.metric = evaluate_annotator(config.annotator, test, config.task, st.wa_eval);
      break;
    }
    case Strategy::NN_W: {
      StudentNet net = fresh_student(config, weak.input_dim(), weak.label_dim(), st.init);
      pretrain_or_reuse(net);
      report.metric = evaluate(net, test, config.task);
      break;
    }
    case Strategy::NN_S: {
      StudentNet net = fresh_student(config, strong.input_dim(), strong.label_dim(), st.init);
      TrainOptions opt;
      opt.epochs = config.pretrain_epochs;
      opt.batch_size = std::min(config.batch_size, strong.size());
      AdamState state = AdamState::for_net(net, config.base_rate);
      TrainTrace trace;
      clock.time("train", [&] {
        trace = train_epochs(net, strong, config.loss_spec(), state, opt, st.step1);
      });
      report.traces["train"] = std::move(trace.epoch_loss);
      report.metric = evaluate(net, test, config.task);
      break;
    }
    case Strategy::NN_SplusW: {
      StudentNet net = fresh_student(config, weak.input_dim(), weak.label_dim(), st.init);
      TrainTrace trace;
      clock.time("train", [&] { trace = train_alternating(net, weak, strong, config, st.step1); });
      report.traces["train"] = std::move(trace.epoch_loss);
      report.metric = evaluate(net, test, config.task);
      break;
    }
    case Strategy::NN_WtoS:
    case Strategy::NN_WomegaToS: {
      double step_fid = 1.0;
      if (config.strategy == Strategy::NN_WomegaToS) {
        step_fid = config.omega ? *config.omega : reference_mean_eta2(config, weak, strong);
        report.notes.push_back("omega=" + std::to_string(step_fid) +
                               (config.omega ? " (config)" : " (mean eta2 of FWL run)"));
      }
      StudentNet net = fresh_student(config, weak.input_dim(), weak.label_dim(), st.init);
      if (pretrained && config.strategy == Strategy::NN_WtoS) {
        net = *pretrained;
        report.timings["pretrain"] = 0.0;
      } else {
        TrainTrace trace;
        clock.time("pretrain",
                   [&] { trace = step1_pretrain(net, weak, config, st.step1, step_fid); });
        report.traces["pretrain"] = std::move(trace.epoch_loss);
      }
      TrainOptions opt;
      opt.epochs = config.finetune_epochs;
      opt.batch_size = std::min(config.effective_finetune_batch(), strong.size());
      AdamState state = AdamState::for_net(net, config.base_rate);
      TrainTrace trace;
      clock.time("finetune", [&] {
        trace = train_epochs(net, strong, config.loss_spec(), state, opt, st.step3);
      });
      report.traces["finetune"] = std::move(trace.epoch_loss);
      report.metric = evaluate(net, test, config.task);
      break;
    }
    case Strategy::FWL_unsuprep: {
      // No pretraining and a raw-input teacher: approximates the
      // unsupervised-representation variant at desk scale.
      TrainConfig cfg = config;
      cfg.teacher_input = TeacherInput::RawInput;
      StudentNet net = fresh_student(cfg, weak.input_dim(), weak.label_dim(), st.init);
      ClusteredGp teacher;
      LabeledSet soft;
      clock.time("teacher", [&] {
        teacher = step2_fit_teacher(net, strong, cfg, st.step2);
        soft = make_soft_dataset(teacher, net, concat_rows(weak.inputs, strong.inputs), cfg);
      });
      TrainTrace trace;
      clock.time("finetune", [&] { trace = step3_finetune(net, soft, cfg, st.step3); });
      report.traces["finetune"] = std::move(trace.epoch_loss);
      report.metric = evaluate(net, test, cfg.task);
      report.notes.push_back("unsupervised-representation approximated by raw-input teacher");
      break;
    }
    case Strategy::FWL_noSigma:
    case Strategy::FWL:
    case Strategy::FWL_s: {
      const auto stages = detail::fwl_stages_1_2(config, weak, strong, st, &report, pretrained);
      StudentNet net = stages.net;
      TrainTrace trace;
      if (config.strategy == Strategy::FWL_s) {
        clock.time("finetune",
                   [&] { trace = finetune_weighted_sampling(net, stages.soft, config, st.step3); });
      } else {
        clock.time("finetune", [&] { trace = step3_finetune(net, stages.soft, config, st.step3); });
      }
      report.traces["finetune"] = std::move(trace.epoch_loss);
      report.metric = evaluate(net, test, config.task);
      break;
    }
  }

  report.timings["total"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - total_start).count();
  if (!std::isfinite(report.metric)) throw NonFiniteValue("run_strategy: non-finite metric");
  return report;
}

inline RunReport run_strategy(const TrainConfig& config, const LabeledSet& weak,
                              const LabeledSet& strong, const LabeledSet& test) {
  return run_strategy_with_pretrained(config, weak, strong, test, nullptr);
}

/// Generate the preset's data and run the configured strategy.
inline RunReport run_preset(const TrainConfig& config) {
  const TaskData data = make_datasets(config);
  return run_strategy(config, data.weak, data.strong, data.test);
}

}  // namespace fwl
