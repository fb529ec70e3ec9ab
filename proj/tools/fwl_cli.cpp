// fwl: command-line front end for the fidelity-weighted learning experiments.
//
// Subcommands: gen-data, run, grid, sweep-beta, budget-curve, fwl-vs-fwls.
// Every result CSV carries a header row and a config-hash column, and
// re-running an identical spec reproduces the files byte for byte.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fwl/fwl.hpp"

namespace fs = std::filesystem;
using namespace fwl;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string preset;
  std::string strategy;
  double beta = -1.0;  // <0 means "not set on the command line"
  std::string seeds_expr = "1..10";
  std::string out_dir = "fwl-out";
};

std::vector<std::uint64_t> parse_seeds(const std::string& expr) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(expr);
  std::string token;
  while (std::getline(ss, token, ',')) {
    const auto dots = token.find("..");
    if (dots != std::string::npos) {
      const std::uint64_t lo = std::stoull(token.substr(0, dots));
      const std::uint64_t hi = std::stoull(token.substr(dots + 2));
      if (hi < lo) throw ConfigParse("bad seed range: '" + token + "'");
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else if (!token.empty()) {
      seeds.push_back(std::stoull(token));
    }
  }
  if (seeds.empty()) throw ConfigParse("empty seed list: '" + expr + "'");
  return seeds;
}

std::vector<double> parse_fractions(const std::string& expr) {
  std::vector<double> out;
  std::stringstream ss(expr);
  std::string token;
  while (std::getline(ss, token, ','))
    if (!token.empty()) out.push_back(std::stod(token));
  if (out.empty()) throw ConfigParse("empty fraction list: '" + expr + "'");
  for (double f : out)
    if (!(f > 0.0) || f > 1.0) throw ConfigParse("fractions must be in (0, 1]");
  return out;
}

std::vector<double> parse_betas(const std::string& expr) {
  std::vector<double> out;
  std::stringstream ss(expr);
  std::string token;
  while (std::getline(ss, token, ','))
    if (!token.empty()) out.push_back(std::stod(token));
  if (out.empty()) throw ConfigParse("empty beta list: '" + expr + "'");
  for (double b : out)
    if (b < 0.0) throw ConfigParse("beta must be >= 0");
  return out;
}

/// Resolve the effective config: preset -> config file -> command line.
TrainConfig resolve_config(const CommonOpts& opts) {
  Json file = Json::object();
  if (!opts.config_path.empty()) file = load_json(opts.config_path);

  std::string preset = "toy";
  if (file.contains("preset")) preset = file.at("preset").get<std::string>();
  if (!opts.preset.empty()) preset = opts.preset;

  TrainConfig config = make_preset(preset);
  if (!file.is_null() && !file.empty()) {
    // overlay file fields onto the preset defaults
    Json merged = Json(config);
    merged.update(file);
    config = merged.get<TrainConfig>();
    config.preset = preset;
  }
  if (!opts.strategy.empty()) config.strategy = strategy_from_name(opts.strategy);
  if (opts.beta >= 0.0) config.beta = opts.beta;
  return config;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Io("cannot create output directory: " + dir);
}

std::string canonical_hash(TrainConfig config) {
  config.seed = 0;  // aggregate rows hash the seed-independent config
  return config_hash(config);
}

void write_per_seed_csv(const std::string& path, const std::vector<RunReport>& reports) {
  CsvWriter csv(path, {"strategy", "seed", "metric", "value", "config_hash"});
  for (const RunReport& r : reports)
    csv.write_row({r.strategy, csv::cell(std::size_t{r.config.seed}), r.metric_name,
                   csv::cell(r.metric), config_hash(r.config)});
}

void write_aggregate_csv(const std::string& path,
                         const std::map<std::string, std::vector<RunReport>>& by_strategy) {
  CsvWriter csv(path, {"strategy", "metric", "n_seeds", "mean", "sd", "config_hash"});
  for (const auto& [name, reports] : by_strategy) {
    Vector values;
    for (const RunReport& r : reports) values.push_back(r.metric);
    csv.write_row({name, reports.front().metric_name, csv::cell(values.size()),
                   csv::cell(mean(values)), csv::cell(sample_sd(values)),
                   canonical_hash(reports.front().config)});
  }
}

std::string report_filename(const RunReport& r) {
  return "report_" + r.strategy + "_seed" + std::to_string(r.config.seed) + ".json";
}

// ---------------------------------------------------------------- gen-data

void cmd_gen_data(const CommonOpts& opts) {
  const TrainConfig base = resolve_config(opts);
  ensure_dir(opts.out_dir);
  for (const std::uint64_t seed : parse_seeds(opts.seeds_expr)) {
    TrainConfig config = base;
    config.seed = seed;
    const TaskData data = make_datasets(config);
    const std::string stem =
        (fs::path(opts.out_dir) / (config.preset + "_seed" + std::to_string(seed))).string();
    save_dataset_csv(data.weak, stem + "_weak.csv");
    save_dataset_csv(data.strong, stem + "_strong.csv");
    save_dataset_csv(data.test, stem + "_test.csv");
  }
  std::printf("gen-data: wrote datasets to %s\n", opts.out_dir.c_str());
}

// --------------------------------------------------------------------- run

void save_stage_files(const TrainConfig& config, const TaskData& data, const std::string& dir) {
  RunStreams st = RunStreams::make(config);
  StudentNet net = fresh_student(config, data.weak.input_dim(), data.weak.label_dim(), st.init);
  step1_pretrain(net, data.weak, config, st.step1);
  const ClusteredGp teacher = step2_fit_teacher(net, data.strong, config, st.step2);
  const LabeledSet soft =
      make_soft_dataset(teacher, net, concat_rows(data.weak.inputs, data.strong.inputs), config);
  const std::string stem =
      (fs::path(dir) / ("stage_seed" + std::to_string(config.seed))).string();
  save_net(net, stem + "_net.json");
  save_teacher(teacher, stem + "_teacher.json");
  save_dataset_csv(soft, stem + "_soft.csv");
}

void cmd_run(const CommonOpts& opts, bool save_stages) {
  const TrainConfig base = resolve_config(opts);
  ensure_dir(opts.out_dir);
  std::vector<RunReport> reports;
  for (const std::uint64_t seed : parse_seeds(opts.seeds_expr)) {
    TrainConfig config = base;
    config.seed = seed;
    const TaskData data = make_datasets(config);
    if (save_stages) save_stage_files(config, data, opts.out_dir);
    RunReport report = run_strategy(config, data.weak, data.strong, data.test);
    save_json(Json(report), (fs::path(opts.out_dir) / report_filename(report)).string());
    reports.push_back(std::move(report));
  }
  write_per_seed_csv((fs::path(opts.out_dir) / "per_seed.csv").string(), reports);
  write_aggregate_csv((fs::path(opts.out_dir) / "aggregate.csv").string(),
                      {{reports.front().strategy, reports}});
  std::printf("run: %zu report(s) in %s\n", reports.size(), opts.out_dir.c_str());
}

// -------------------------------------------------------------------- grid

void cmd_grid(const CommonOpts& opts) {
  const TrainConfig base = resolve_config(opts);
  ensure_dir(opts.out_dir);
  std::map<std::string, std::vector<RunReport>> by_strategy;
  std::vector<RunReport> all;
  for (const auto& [strategy, name] : strategy_names()) {
    for (const std::uint64_t seed : parse_seeds(opts.seeds_expr)) {
      TrainConfig config = base;
      config.strategy = strategy;
      config.seed = seed;
      const TaskData data = make_datasets(config);
      RunReport report = run_strategy(config, data.weak, data.strong, data.test);
      save_json(Json(report), (fs::path(opts.out_dir) / report_filename(report)).string());
      by_strategy[name].push_back(report);
      all.push_back(std::move(report));
    }
  }
  write_per_seed_csv((fs::path(opts.out_dir) / "per_seed.csv").string(), all);
  write_aggregate_csv((fs::path(opts.out_dir) / "aggregate.csv").string(), by_strategy);
  std::printf("grid: %zu runs in %s\n", all.size(), opts.out_dir.c_str());
}

// -------------------------------------------------------------- sweep-beta

void cmd_sweep_beta(const CommonOpts& opts, const std::string& betas_expr) {
  const std::vector<double> betas = parse_betas(betas_expr);
  const std::vector<std::uint64_t> seeds = parse_seeds(opts.seeds_expr);
  std::vector<std::string> presets = {"toy", "toy-star", "toy-doublestar"};
  if (!opts.preset.empty()) presets = {opts.preset};
  ensure_dir(opts.out_dir);

  CsvWriter per_seed((fs::path(opts.out_dir) / "sweep_beta_per_seed.csv").string(),
                     {"beta", "preset", "seed", "metric", "value", "config_hash"});
  std::map<std::pair<double, std::string>, Vector> cells;

  for (const std::string& preset : presets) {
    for (const std::uint64_t seed : seeds) {
      CommonOpts preset_opts = opts;
      preset_opts.preset = preset;
      TrainConfig config = resolve_config(preset_opts);
      config.strategy = Strategy::FWL;
      config.seed = seed;
      const TaskData data = make_datasets(config);

      // steps 1-2 do not depend on beta: run them once per (preset, seed)
      RunStreams st = RunStreams::make(config);
      StudentNet pretrained =
          fresh_student(config, data.weak.input_dim(), data.weak.label_dim(), st.init);
      step1_pretrain(pretrained, data.weak, config, st.step1);

      for (const double beta : betas) {
        TrainConfig run_config = config;
        run_config.beta = beta;
        const RunReport report = run_strategy_with_pretrained(run_config, data.weak, data.strong,
                                                              data.test, &pretrained);
        per_seed.write_row({csv::cell(beta), preset, csv::cell(std::size_t{seed}),
                            report.metric_name, csv::cell(report.metric),
                            config_hash(report.config)});
        cells[{beta, preset}].push_back(report.metric);
      }
    }
  }

  CsvWriter agg((fs::path(opts.out_dir) / "sweep_beta.csv").string(),
                {"beta", "preset", "n_seeds", "mean", "sd", "config_hash"});
  for (const std::string& preset : presets) {
    for (const double beta : betas) {
      const Vector& values = cells.at({beta, preset});
      CommonOpts preset_opts = opts;
      preset_opts.preset = preset;
      TrainConfig config = resolve_config(preset_opts);
      config.strategy = Strategy::FWL;
      config.beta = beta;
      agg.write_row({csv::cell(beta), preset, csv::cell(values.size()), csv::cell(mean(values)),
                     csv::cell(sample_sd(values)), canonical_hash(config)});
    }
  }
  std::printf("sweep-beta: %zu cells in %s\n", cells.size(), opts.out_dir.c_str());
}

// ------------------------------------------------------------ budget-curve

void run_budget_curve(const CommonOpts& opts, const std::vector<double>& fractions,
                      bool vary_weak, const std::string& csv_name) {
  const std::vector<std::uint64_t> seeds = parse_seeds(opts.seeds_expr);
  const std::vector<Strategy> strategies = {Strategy::FWL, Strategy::NN_WtoS};

  CsvWriter per_seed(
      (fs::path(opts.out_dir) / (csv_name + "_per_seed.csv")).string(),
      {"curve", "fraction", "strategy", "seed", "metric", "value", "config_hash"});
  std::map<std::pair<double, std::string>, Vector> cells;
  const std::string curve = vary_weak ? "weak" : "strong";

  for (const Strategy strategy : strategies) {
    for (const std::uint64_t seed : seeds) {
      TrainConfig config = resolve_config(opts);
      config.strategy = strategy;
      config.seed = seed;
      if (vary_weak) config.n_strong = 50;  // all available strong data
      const TaskData data = make_datasets(config);

      // with the weak set fixed, the pretrained student is shared across
      // strong fractions; with the weak set varying it cannot be
      StudentNet pretrained;
      if (!vary_weak) {
        RunStreams st = RunStreams::make(config);
        pretrained = fresh_student(config, data.weak.input_dim(), data.weak.label_dim(), st.init);
        step1_pretrain(pretrained, data.weak, config, st.step1);
      }

      for (const double fraction : fractions) {
        const LabeledSet weak = vary_weak ? data.weak.head_fraction(fraction) : data.weak;
        const LabeledSet strong = vary_weak ? data.strong : data.strong.head_fraction(fraction);
        const RunReport report =
            vary_weak ? run_strategy(config, weak, strong, data.test)
                      : run_strategy_with_pretrained(config, weak, strong, data.test, &pretrained);
        per_seed.write_row({curve, csv::cell(fraction), report.strategy,
                            csv::cell(std::size_t{seed}), report.metric_name,
                            csv::cell(report.metric), config_hash(report.config)});
        cells[{fraction, report.strategy}].push_back(report.metric);
      }
    }
  }

  CsvWriter agg((fs::path(opts.out_dir) / (csv_name + ".csv")).string(),
                {"curve", "fraction", "strategy", "n_seeds", "mean", "sd", "config_hash"});
  for (const Strategy strategy : strategies) {
    for (const double fraction : fractions) {
      TrainConfig config = resolve_config(opts);
      config.strategy = strategy;
      if (vary_weak) config.n_strong = 50;
      const Vector& values = cells.at({fraction, strategy_name(strategy)});
      agg.write_row({curve, csv::cell(fraction), strategy_name(strategy),
                     csv::cell(values.size()), csv::cell(mean(values)),
                     csv::cell(sample_sd(values)), canonical_hash(config)});
    }
  }
}

void cmd_budget_curve(const CommonOpts& opts, const std::string& weak_fractions,
                      const std::string& strong_fractions) {
  ensure_dir(opts.out_dir);
  run_budget_curve(opts, parse_fractions(weak_fractions), true, "budget_weak");
  run_budget_curve(opts, parse_fractions(strong_fractions), false, "budget_strong");
  std::printf("budget-curve: wrote budget_weak.csv and budget_strong.csv in %s\n",
              opts.out_dir.c_str());
}

// ------------------------------------------------------------- fwl-vs-fwls

LabeledSet subsample_soft(const LabeledSet& soft, double fraction, Rng rng) {
  std::size_t m =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(soft.size())));
  if (m == 0) m = 1;
  if (m > soft.size()) m = soft.size();
  std::vector<std::size_t> idx = rng.sample_without_replacement(soft.size(), m);
  std::sort(idx.begin(), idx.end());
  return soft.subset(idx);
}

void cmd_fwl_vs_fwls(const CommonOpts& opts, const std::string& fractions_expr) {
  const std::vector<double> fractions = parse_fractions(fractions_expr);
  const std::vector<std::uint64_t> seeds = parse_seeds(opts.seeds_expr);
  ensure_dir(opts.out_dir);

  CsvWriter per_seed((fs::path(opts.out_dir) / "fwl_vs_fwls_per_seed.csv").string(),
                     {"fraction", "seed", "strategy", "metric", "value", "config_hash"});
  std::map<std::pair<double, std::string>, Vector> cells;

  for (const Strategy strategy : {Strategy::FWL, Strategy::FWL_s}) {
    for (const std::uint64_t seed : seeds) {
      TrainConfig config = resolve_config(opts);
      config.strategy = strategy;
      config.seed = seed;
      const TaskData data = make_datasets(config);

      RunStreams st = RunStreams::make(config);
      StudentNet pretrained =
          fresh_student(config, data.weak.input_dim(), data.weak.label_dim(), st.init);
      step1_pretrain(pretrained, data.weak, config, st.step1);
      const ClusteredGp teacher = step2_fit_teacher(pretrained, data.strong, config, st.step2);
      const LabeledSet soft = make_soft_dataset(
          teacher, pretrained, concat_rows(data.weak.inputs, data.strong.inputs), config);

      for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        const LabeledSet part =
            subsample_soft(soft, fractions[fi], st.subsample.child(fi));
        StudentNet net = pretrained;
        Rng step3 = st.step3;
        if (strategy == Strategy::FWL_s) {
          finetune_weighted_sampling(net, part, config, step3);
        } else {
          step3_finetune(net, part, config, step3);
        }
        const double metric = evaluate(net, data.test, config.task);
        per_seed.write_row({csv::cell(fractions[fi]), csv::cell(std::size_t{seed}),
                            strategy_name(strategy),
                            config.task == Task::Regression ? "rmse" : "macro_f1",
                            csv::cell(metric), config_hash(config)});
        cells[{fractions[fi], strategy_name(strategy)}].push_back(metric);
      }
    }
  }

  CsvWriter agg((fs::path(opts.out_dir) / "fwl_vs_fwls.csv").string(),
                {"fraction", "n_seeds", "fwl_mean", "fwl_sd", "fwls_mean", "fwls_sd",
                 "config_hash"});
  for (const double fraction : fractions) {
    const Vector& fwl = cells.at({fraction, "FWL"});
    const Vector& fwls = cells.at({fraction, "FWL_s"});
    TrainConfig config = resolve_config(opts);
    config.strategy = Strategy::FWL;
    agg.write_row({csv::cell(fraction), csv::cell(fwl.size()), csv::cell(mean(fwl)),
                   csv::cell(sample_sd(fwl)), csv::cell(mean(fwls)), csv::cell(sample_sd(fwls)),
                   canonical_hash(config)});
  }
  std::printf("fwl-vs-fwls: %zu fractions in %s\n", fractions.size(), opts.out_dir.c_str());
}

void add_common_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file; fields override the preset");
  cmd->add_option("--preset", opts.preset, "toy | toy-star | toy-doublestar | synth-class");
  cmd->add_option("--strategy", opts.strategy, "strategy name, e.g. FWL or NN_WtoS");
  cmd->add_option("--beta", opts.beta, "fidelity exponent");
  cmd->add_option("--seeds", opts.seeds_expr, "seed list, e.g. 1..10 or 1,2,5");
  cmd->add_option("--out", opts.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fidelity-weighted learning experiment runner"};
  app.require_subcommand(1);

  CommonOpts gen_opts, run_opts, grid_opts, sweep_opts, budget_opts, vs_opts;
  bool save_stages = false;
  std::string betas_expr = "0,0.1,1,2,5";
  std::string weak_fractions = "0.1,0.25,0.5,0.75,1";
  std::string strong_fractions = "0.2,0.4,0.6,0.8,1";
  std::string vs_fractions = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";

  CLI::App* gen = app.add_subcommand("gen-data", "write the preset's datasets as CSV");
  add_common_options(gen, gen_opts);

  CLI::App* run = app.add_subcommand("run", "run one strategy over a seed list");
  add_common_options(run, run_opts);
  run->add_flag("--save-stages", save_stages,
                "also write per-seed student/teacher/soft-set checkpoints");

  CLI::App* grid = app.add_subcommand("grid", "run every strategy over a seed list");
  add_common_options(grid, grid_opts);

  CLI::App* sweep = app.add_subcommand("sweep-beta", "FWL fine-tuning across beta values");
  add_common_options(sweep, sweep_opts);
  sweep->add_option("--betas", betas_expr, "comma-separated beta values");

  CLI::App* budget = app.add_subcommand("budget-curve", "metric vs weak/strong data fractions");
  add_common_options(budget, budget_opts);
  budget->add_option("--weak-fractions", weak_fractions, "fractions of the weak set");
  budget->add_option("--strong-fractions", strong_fractions, "fractions of the strong set");

  CLI::App* vs = app.add_subcommand("fwl-vs-fwls", "FWL vs weighted-sampling FWL_s");
  add_common_options(vs, vs_opts);
  vs->add_option("--fractions", vs_fractions, "fractions of the soft dataset");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) cmd_gen_data(gen_opts);
    if (run->parsed()) cmd_run(run_opts, save_stages);
    if (grid->parsed()) cmd_grid(grid_opts);
    if (sweep->parsed()) cmd_sweep_beta(sweep_opts, betas_expr);
    if (budget->parsed()) cmd_budget_curve(budget_opts, weak_fractions, strong_fractions);
    if (vs->parsed()) cmd_fwl_vs_fwls(vs_opts, vs_fractions);
  } catch (const ConfigParse& e) {
    std::cerr << "error: ConfigParse: " << e.what() << "\n";
    return 2;
  } catch (const Io& e) {
    std::cerr << "error: Io: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: Domain: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
