#include "fwl/checkpoint.hpp"
#include "fwl/config.hpp"
#include "fwl/csv.hpp"
#include "fwl/engine.hpp"

#include <filesystem>
#include <fstream>

#include "gtest/gtest.h"

using namespace fwl;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST(NetCheckpoint, RoundTripPreservesPredictionsBitForBit) {
  Rng rng(1);
  StudentNet net = StudentNet::init({2, 8, 8, 1},
                                    {Activation::Tanh, Activation::ReLU, Activation::Identity},
                                    2, rng);
  const std::string path = temp_path("fwl_net.json");
  save_net(net, path);
  const StudentNet loaded = load_net(path);
  EXPECT_EQ(loaded.repr_boundary(), net.repr_boundary());
  EXPECT_EQ(loaded.param_count(), net.param_count());
  Rng qrng(2);
  for (int q = 0; q < 25; ++q) {
    const Vector x = {qrng.uniform(-2.0, 2.0), qrng.uniform(-2.0, 2.0)};
    ASSERT_EQ(forward(net, x).output[0], forward(loaded, x).output[0]);
  }
  std::remove(path.c_str());
}

TEST(NetCheckpoint, RejectsWrongVersion) {
  Json j = net_to_json(StudentNet::init(
      {1, 4, 1}, {Activation::Tanh, Activation::Identity}, 1, *std::make_unique<Rng>(3).get()));
  j["format_version"] = 999;
  EXPECT_THROW(net_from_json(j), ConfigParse);
}

TEST(TeacherCheckpoint, RoundTripPreservesPredictionsBitForBit) {
  Rng data_rng(4);
  Matrix inputs(9, 2), targets(9, 2);
  for (std::size_t i = 0; i < 9; ++i) {
    inputs(i, 0) = data_rng.uniform(-3.0, 3.0);
    inputs(i, 1) = data_rng.uniform(-3.0, 3.0);
    targets(i, 0) = data_rng.gaussian();
    targets(i, 1) = data_rng.gaussian();
  }
  Rng fit_rng(5);
  const ClusteredGp teacher =
      clustered_fit(KernelSpec::rbf_white(1.0, 0.01), inputs, targets, 3, fit_rng);
  const std::string path = temp_path("fwl_teacher.json");
  save_teacher(teacher, path);
  const ClusteredGp loaded = load_teacher(path);
  ASSERT_EQ(loaded.cluster_count(), teacher.cluster_count());
  Rng qrng(6);
  for (int q = 0; q < 25; ++q) {
    const Vector x = {qrng.uniform(-4.0, 4.0), qrng.uniform(-4.0, 4.0)};
    const auto [m1, v1] = clustered_predict(teacher, x);
    const auto [m2, v2] = clustered_predict(loaded, x);
    ASSERT_EQ(m1, m2);
    ASSERT_EQ(v1, v2);
  }
  std::remove(path.c_str());
}

TEST(ConfigJson, RoundTripsThroughJsonWithDefaults) {
  TrainConfig c = make_preset("toy-doublestar");
  c.strategy = Strategy::FWL_s;
  c.beta = 2.5;
  c.omega = 0.4;
  c.hidden = {32, 16};
  const Json j = c;
  const TrainConfig back = j.get<TrainConfig>();
  EXPECT_EQ(Json(back).dump(), j.dump());
  EXPECT_EQ(back.strategy, Strategy::FWL_s);
  EXPECT_EQ(back.annotator.kind, AnnotatorKind::Affine);
  EXPECT_DOUBLE_EQ(*back.omega, 0.4);

  // defaulting: an empty object parses to the default config
  const TrainConfig defaults = Json::object().get<TrainConfig>();
  EXPECT_EQ(defaults.strategy, Strategy::FWL);
  EXPECT_EQ(defaults.pretrain_epochs, TrainConfig{}.pretrain_epochs);
}

TEST(ConfigJson, RejectsBadValues) {
  EXPECT_THROW((Json{{"strategy", "FWLX"}}.get<TrainConfig>()), ConfigParse);
  EXPECT_THROW((Json{{"task", "ranking"}}.get<TrainConfig>()), ConfigParse);
  EXPECT_THROW((Json{{"beta", -1.0}}.get<TrainConfig>()), ConfigParse);
  EXPECT_THROW((Json{{"omega", 1.5}}.get<TrainConfig>()), ConfigParse);
}

TEST(ConfigHash, StableAndSensitive) {
  const TrainConfig a = make_preset("toy");
  TrainConfig b = make_preset("toy");
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.beta = 2.0;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(RunReportJson, CarriesMetricsTracesAndHash) {
  TrainConfig c = make_preset("toy");
  c.strategy = Strategy::WA;
  c.seed = 3;
  const RunReport report = run_preset(c);
  const Json j = report;
  EXPECT_EQ(j.at("strategy"), "WA");
  EXPECT_TRUE(j.at("metrics").contains("rmse"));
  EXPECT_EQ(j.at("config_hash"), config_hash(c));
  EXPECT_TRUE(j.contains("timings"));
}

TEST(CsvWriter, QuotesPerRfc4180) {
  EXPECT_EQ(csv::quote("plain"), "plain");
  EXPECT_EQ(csv::quote("a,b"), "\"a,b\"");
  EXPECT_EQ(csv::quote("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv::quote("line\nbreak"), "\"line\nbreak\"");
}

TEST(CsvWriter, WritesHeaderAndRows) {
  const std::string path = temp_path("fwl_test.csv");
  {
    CsvWriter w(path, {"alpha", "beta"});
    w.write_row({"1", csv::cell(0.5)});
    w.write_row({"x,y", csv::cell(std::size_t{7})});
  }
  EXPECT_EQ(slurp(path), "alpha,beta\n1,0.5\n\"x,y\",7\n");
  std::remove(path.c_str());
}

TEST(CsvWriter, CellFormatRoundTripsDoubles) {
  for (double v : {1.0 / 3.0, 0.1, 1e-17, 12345.6789, -2.5e300}) {
    EXPECT_EQ(std::stod(csv::cell(v)), v);
  }
}

TEST(CsvWriter, UnwritablePathIsIoError) {
  EXPECT_THROW(CsvWriter("/nonexistent-dir/foo.csv", {"a"}), Io);
}

TEST(StagePipeline, SplitInvocationsMatchSingleRun) {
  // Steps 1-3 run through checkpoint files must reproduce the in-process run.
  TrainConfig c = make_preset("toy");
  c.strategy = Strategy::FWL;
  c.seed = 11;
  c.hidden = {16, 16};
  c.n_weak = 30;
  c.n_test = 51;
  c.pretrain_epochs = 20;
  c.finetune_epochs = 15;
  const TaskData data = make_datasets(c);
  const RunReport direct = run_strategy(c, data.weak, data.strong, data.test);

  RunStreams st = RunStreams::make(c);
  StudentNet net = fresh_student(c, 1, 1, st.init);
  step1_pretrain(net, data.weak, c, st.step1);
  const std::string net_path = temp_path("fwl_stage_net.json");
  save_net(net, net_path);

  StudentNet net2 = load_net(net_path);
  const ClusteredGp teacher = step2_fit_teacher(net2, data.strong, c, st.step2);
  const std::string teacher_path = temp_path("fwl_stage_teacher.json");
  save_teacher(teacher, teacher_path);

  const ClusteredGp teacher2 = load_teacher(teacher_path);
  LabeledSet soft =
      make_soft_dataset(teacher2, net2, concat_rows(data.weak.inputs, data.strong.inputs), c);
  const std::string soft_path = temp_path("fwl_stage_soft.csv");
  save_dataset_csv(soft, soft_path);

  LabeledSet soft2 = load_dataset_csv(soft_path);
  step3_finetune(net2, soft2, c, st.step3);
  EXPECT_EQ(evaluate(net2, data.test, c.task), direct.metric);

  std::remove(net_path.c_str());
  std::remove(teacher_path.c_str());
  std::remove(soft_path.c_str());
}
