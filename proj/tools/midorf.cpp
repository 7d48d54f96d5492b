// midorf: generate synthetic data, train, predict, evaluate, benchmark.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "midorf/benchmark.hpp"
#include "midorf/experiment.hpp"
#include "midorf/io.hpp"
#include "midorf/learning.hpp"
#include "midorf/model_max.hpp"
#include "midorf/model_rel.hpp"
#include "midorf/oracle.hpp"
#include "midorf/parallel.hpp"
#include "midorf/predict.hpp"
#include "midorf/synthetic.hpp"

namespace fs = std::filesystem;
using namespace midorf;

namespace {

const std::map<std::string, Setting> kSettings = {{"max", Setting::Max}, {"rel", Setting::Rel}};
const std::map<std::string, ModelType> kModels = {
    {"max", ModelType::Max}, {"rel", ModelType::Rel}, {"chain", ModelType::Chain}};
const std::map<std::string, DecodeMode> kModes = {{"marginal", DecodeMode::Marginal},
                                                  {"viterbi", DecodeMode::Viterbi}};

struct GenerateArgs {
  Setting setting = Setting::Max;
  std::uint64_t seed = 0;
  std::string out;
  int count = 1;
  std::optional<int> L, d, n_train, n_val, n_test, min_length, max_length, pool;
  std::optional<double> noise, stay, jump;
};

int cmd_generate(const GenerateArgs& a) {
  auto config = synthetic::SyntheticConfig::defaults(a.setting);
  if (a.L) config.L = *a.L;
  if (a.d) config.d = *a.d;
  if (a.n_train) config.n_train = *a.n_train;
  if (a.n_val) config.n_val = *a.n_val;
  if (a.n_test) config.n_test = *a.n_test;
  if (a.min_length) config.min_length = *a.min_length;
  if (a.max_length) config.max_length = *a.max_length;
  if (a.pool) config.pool_size = *a.pool;
  if (a.noise) config.noise_sigma = *a.noise;
  if (a.stay) config.stay_concentration = *a.stay;
  if (a.jump) config.jump_concentration = *a.jump;
  synthetic::validate(config);
  for (int i = 0; i < a.count; ++i) {
    config.seed = synthetic::suite_seed(a.seed, i);
    const auto data = synthetic::generate_dataset(config);
    char name[32];
    std::snprintf(name, sizeof name, "set_%02d", i);
    const fs::path dir = a.count == 1 ? fs::path(a.out) : fs::path(a.out) / name;
    synthetic::write_dataset_files(data, dir);
    std::cout << "wrote " << dir.string() << "\n";
  }
  return 0;
}

struct TrainArgs {
  ModelType model = ModelType::Max;
  std::string train, val, out, trace;
  double alpha = 1e-2;
  bool grid = false;
  std::uint64_t seed = 0;
  int restarts = 3;
  int max_iterations = 200;
  DecodeMode mode = DecodeMode::Marginal;
  bool freeze_w = false;
  double initial_w = 1.0;
  int jobs = 1;
};

int cmd_train(const TrainArgs& a) {
  const Dataset train_set = io::read_dataset(a.train);
  std::optional<Dataset> val;
  if (!a.val.empty()) val = io::read_dataset(a.val);
  if (a.grid && !val) throw Error("--grid needs --val");

  learning::TrainConfig config;
  config.alpha = a.alpha;
  config.seed = a.seed;
  config.restarts = a.restarts;
  config.max_iterations = a.max_iterations;
  config.decode_mode = a.mode;
  config.freeze_w = a.freeze_w;
  config.initial_w = a.initial_w;
  config.jobs = a.jobs;

  learning::TrainResult result;
  nlohmann::json meta;
  if (a.grid) {
    auto grid = learning::grid_search(train_set, *val, learning::kDefaultAlphaGrid, config, a.model);
    std::vector<std::pair<std::string, metrics::Scores>> rows;
    nlohmann::json grid_rows = nlohmann::json::array();
    for (const auto& r : grid.rows) {
      std::ostringstream label;
      label << "alpha=" << r.alpha;
      rows.emplace_back(label.str(), r.validation);
      grid_rows.push_back({{"alpha", r.alpha},
                           {"validation_icc", r.validation.icc.value_or(-1.0)},
                           {"final_objective", r.final_objective}});
    }
    std::cout << "validation metrics per alpha\n" << metrics::format_table(rows);
    config.alpha = grid.best_alpha;
    meta["grid"] = grid_rows;
    result = std::move(grid.best);
  } else {
    result = learning::train(train_set, config, a.model, val ? &*val : nullptr);
    if (val) {
      const auto report = evaluate_model(*val, result.params, a.model, a.mode, a.jobs);
      std::cout << "validation metrics\n"
                << metrics::format_table({{std::string(to_string(a.model)), report.pooled}});
    }
  }

  meta["alpha"] = config.alpha;
  meta["seed"] = a.seed;
  meta["restarts"] = a.restarts;
  meta["selected_restart"] = result.restart;
  meta["max_iterations"] = a.max_iterations;
  meta["iterations"] = result.trace.empty() ? 0 : result.trace.back().iteration;
  meta["final_objective"] = result.final_objective;
  meta["termination"] = result.termination;
  meta["decode_mode"] = to_string(a.mode);
  io::write_checkpoint(a.out, {a.model, result.params, meta});
  io::write_json(a.trace.empty() ? a.out + ".trace.json" : a.trace, learning::trace_to_json(result));
  std::cout << "final objective " << result.final_objective << " (" << result.termination << ")\n"
            << "wrote " << a.out << "\n";
  return 0;
}

struct PredictArgs {
  std::string model, data, out;
  DecodeMode mode = DecodeMode::Marginal;
  int jobs = 1;
};

int cmd_predict(const PredictArgs& a) {
  const auto ck = io::read_checkpoint(a.model);
  const Dataset ds = io::read_dataset(a.data);
  io::PredictionSet set;
  set.model_type = ck.model_type;
  set.mode = a.mode;
  set.predictions = predict_dataset(ds, ck.params, ck.model_type, a.mode, a.jobs);
  for (const auto& bag : ds.bags) set.ids.push_back(bag.sequence.id);
  io::write_json(a.out, io::predictions_to_json(set));
  std::cout << "wrote " << set.predictions.size() << " sequences to " << a.out << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string pred, truth, json_out;
  bool per_sequence = false;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const auto set = io::predictions_from_json(io::read_json(a.pred));
  std::vector<std::vector<int>> truth;
  std::vector<std::string> truth_ids;
  // A prediction file is accepted as truth too (its levels are the labels).
  const auto truth_doc = io::read_json(a.truth);
  if (truth_doc.contains("sequences")) {
    const auto other = io::predictions_from_json(truth_doc);
    truth_ids = other.ids;
    for (const auto& p : other.predictions) truth.push_back(p.levels);
  } else {
    const Dataset ds = io::dataset_from_json(truth_doc);
    truth = frame_truth(ds);
    for (const auto& bag : ds.bags) truth_ids.push_back(bag.sequence.id);
  }
  if (truth_ids != set.ids) throw Error("prediction and truth sequence ids differ");
  std::vector<std::vector<int>> levels;
  for (const auto& p : set.predictions) levels.push_back(p.levels);
  const auto report = metrics::evaluate_sequences(set.ids, levels, truth);
  std::vector<std::pair<std::string, metrics::Scores>> rows = {
      {std::string(to_string(set.model_type)), report.pooled}};
  if (a.per_sequence)
    for (const auto& s : report.per_sequence) rows.emplace_back(s.id, s.scores);
  std::cout << metrics::format_table(rows);
  if (!a.json_out.empty()) io::write_json(a.json_out, metrics::to_json(report));
  return 0;
}

struct BenchmarkArgs {
  std::string max_data, rel_data, model, json_out;
  std::uint64_t seed = 0;
  int runs = 50;
  bool scaling = false;
};

Dataset benchmark_data(const std::string& path, Setting setting, std::uint64_t seed) {
  if (!path.empty()) return io::read_dataset(path);
  auto c = synthetic::SyntheticConfig::defaults(setting);
  c.seed = synthetic::suite_seed(seed, 0);
  return synthetic::generate_dataset(c).weak_split(Split::Test);
}

int cmd_benchmark(const BenchmarkArgs& a) {
  nlohmann::json report;
  for (const auto [setting, type] : {std::pair{Setting::Max, ModelType::Max},
                                     std::pair{Setting::Rel, ModelType::Rel}}) {
    const Dataset ds = benchmark_data(setting == Setting::Max ? a.max_data : a.rel_data, setting,
                                      a.seed);
    const ModelParams params = a.model.empty() ? bench::random_params(ds.scale.L, ds.d, a.seed)
                                               : io::read_checkpoint(a.model).params;
    const auto t = bench::time_inference(ds, params, type, a.runs);
    std::printf("%-4s augmented %.6fs  plain %.6fs  ratio %.3f  (median of %d runs, %zu sequences)\n",
                std::string(to_string(type)).c_str(), t.augmented_seconds, t.plain_seconds, t.ratio(),
                a.runs, ds.bags.size());
    auto j = bench::to_json(t);
    if (a.scaling) {
      const auto s = bench::time_vs_length(params, type, {100, 200, 300, 400, 500, 600, 700, 800, 900, 1000},
                                           a.runs, a.seed);
      std::printf("%-4s time vs T: slope %.3es/frame  R^2 %.5f\n",
                  std::string(to_string(type)).c_str(), s.slope, s.r_squared);
      j["scaling"] = bench::to_json(s);
    }
    report[std::string(to_string(type))] = j;
  }
  if (!a.json_out.empty()) io::write_json(a.json_out, report);
  return 0;
}

struct ExperimentArgs {
  std::string config, json_out;
  std::optional<int> count;
  int jobs = 1;
};

int cmd_experiment(const ExperimentArgs& a) {
  auto recipe = experiment::recipe_from_json(io::read_json(a.config));
  if (a.count) recipe.count = *a.count;
  recipe.train.jobs = a.jobs;
  const auto result = experiment::run(recipe);
  std::cout << recipe.name << ": mean test scores over " << recipe.count << " datasets\n"
            << experiment::format_summary(result);
  if (!a.json_out.empty()) io::write_json(a.json_out, experiment::to_json(result));
  return 0;
}

struct OracleArgs {
  std::string model, data;
};

// Brute-force per-label log partitions next to the lattice values.
int cmd_oracle(const OracleArgs& a) {
  const auto ck = io::read_checkpoint(a.model);
  const Dataset ds = io::read_dataset(a.data);
  for (const auto& bag : ds.bags) {
    if (ds.setting == Setting::Max) {
      const auto fast = max_model::label_log_partitions(bag.sequence, ck.params);
      for (int y = 1; y <= ds.scale.L; ++y)
        std::printf("%s y=%d lattice %.12g enumeration %.12g\n", bag.sequence.id.c_str(), y,
                    fast(y - 1), oracle::enumerate_energy_max(bag.sequence, y, ck.params).log_sum);
    } else {
      const auto fast = rel_model::label_log_partitions(bag.sequence, ck.params);
      for (RelLabel y : kRelLabels)
        std::printf("%s y=%s lattice %.12g enumeration %.12g\n", bag.sequence.id.c_str(),
                    std::string(to_string(y)).c_str(), fast(static_cast<int>(y)),
                    oracle::enumerate_energy_rel(bag.sequence, y, ck.params).log_sum);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-instance dynamic ordinal random fields"};
  app.require_subcommand(1);
  const int env_jobs = default_jobs();

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write seeded synthetic dataset triples");
  std::string gen_setting;
  g->add_option("--setting", gen_setting, "max or rel")
      ->required()
      ->transform(CLI::IsMember(kSettings, CLI::ignore_case));
  g->add_option("--seed", gen.seed, "Base seed")->required();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--count", gen.count, "Number of datasets (set_NN subdirectories when > 1)")
      ->check(CLI::PositiveNumber);
  g->add_option("--L", gen.L, "Ordinal levels");
  g->add_option("--d", gen.d, "Feature dimension");
  g->add_option("--n-train", gen.n_train);
  g->add_option("--n-val", gen.n_val);
  g->add_option("--n-test", gen.n_test);
  g->add_option("--min-length", gen.min_length);
  g->add_option("--max-length", gen.max_length);
  g->add_option("--pool", gen.pool, "Feature pool size");
  g->add_option("--noise", gen.noise, "Feature noise sigma");
  g->add_option("--stay", gen.stay, "Dirichlet concentration of self-transitions");
  g->add_option("--jump", gen.jump, "Dirichlet concentration of jumps by two or more levels");

  TrainArgs tr;
  tr.jobs = env_jobs;
  auto* t = app.add_subcommand("train", "Fit a model by L-BFGS");
  std::string train_model;
  t->add_option("--setting", train_model, "max, rel or chain")
      ->required()
      ->transform(CLI::IsMember(kModels, CLI::ignore_case));
  t->add_option("--train", tr.train, "Training dataset")->required()->check(CLI::ExistingFile);
  t->add_option("--val", tr.val, "Fully annotated validation dataset")->check(CLI::ExistingFile);
  auto* alpha = t->add_option("--alpha", tr.alpha, "L2 weight on beta and W");
  auto* grid = t->add_flag("--grid", tr.grid, "Select alpha from {1e-4,1e-3,1e-2,1e-1} on --val");
  alpha->excludes(grid);
  t->add_option("--seed", tr.seed, "Initialization seed")->required();
  t->add_option("--out", tr.out, "Checkpoint path")->required();
  t->add_option("--trace", tr.trace, "Optimizer trace path (default <out>.trace.json)");
  t->add_option("--restarts", tr.restarts)->check(CLI::PositiveNumber);
  t->add_option("--max-iter", tr.max_iterations)->check(CLI::PositiveNumber);
  std::string train_mode = "marginal";
  t->add_option("--mode", train_mode, "Decoding for validation: marginal or viterbi")
      ->transform(CLI::IsMember(kModes, CLI::ignore_case));
  t->add_flag("--freeze-w", tr.freeze_w, "Keep the MIL weight w at --init-w");
  t->add_option("--init-w", tr.initial_w);
  t->add_option("--jobs", tr.jobs)->check(CLI::PositiveNumber);

  PredictArgs pr;
  pr.jobs = env_jobs;
  auto* p = app.add_subcommand("predict", "Decode frame levels");
  p->add_option("--model", pr.model)->required()->check(CLI::ExistingFile);
  p->add_option("--data", pr.data)->required()->check(CLI::ExistingFile);
  p->add_option("--out", pr.out)->required();
  std::string predict_mode = "marginal";
  p->add_option("--mode", predict_mode, "marginal or viterbi")
      ->transform(CLI::IsMember(kModes, CLI::ignore_case));
  p->add_option("--jobs", pr.jobs)->check(CLI::PositiveNumber);

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score predictions against frame labels");
  e->add_option("--pred", ev.pred)->required()->check(CLI::ExistingFile);
  e->add_option("--truth", ev.truth, "Annotated dataset or prediction file")
      ->required()
      ->check(CLI::ExistingFile);
  e->add_option("--json", ev.json_out, "Also write the report as JSON");
  e->add_flag("--per-sequence", ev.per_sequence);

  BenchmarkArgs be;
  auto* b = app.add_subcommand("benchmark", "Time augmented vs plain forward-backward");
  b->add_option("--max-data", be.max_data, "MAX dataset (default: generated test split)")
      ->check(CLI::ExistingFile);
  b->add_option("--rel-data", be.rel_data, "REL dataset (default: generated test split)")
      ->check(CLI::ExistingFile);
  b->add_option("--model", be.model, "Checkpoint supplying parameters")->check(CLI::ExistingFile);
  b->add_option("--seed", be.seed);
  b->add_option("--runs", be.runs)->check(CLI::PositiveNumber);
  b->add_flag("--scaling", be.scaling, "Also fit time against T in 100..1000");
  b->add_option("--json", be.json_out);

  ExperimentArgs ex;
  ex.jobs = env_jobs;
  auto* x = app.add_subcommand("experiment", "Run a recipe over a seeded benchmark suite");
  x->add_option("--config", ex.config)->required()->check(CLI::ExistingFile);
  x->add_option("--count", ex.count)->check(CLI::PositiveNumber);
  x->add_option("--jobs", ex.jobs)->check(CLI::PositiveNumber);
  x->add_option("--json", ex.json_out);

  OracleArgs orc;
  auto* o = app.add_subcommand("oracle", "");  // hidden: empty description
  o->group("");
  o->add_option("--model", orc.model)->required()->check(CLI::ExistingFile);
  o->add_option("--data", orc.data)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n\n" << app.help();
    return 2;
  }
  if (*g) gen.setting = kSettings.at(gen_setting);
  if (*t) {
    tr.model = kModels.at(train_model);
    tr.mode = kModes.at(train_mode);
  }
  if (*p) pr.mode = kModes.at(predict_mode);

  try {
    if (*g) return cmd_generate(gen);
    if (*t) return cmd_train(tr);
    if (*p) return cmd_predict(pr);
    if (*e) return cmd_evaluate(ev);
    if (*b) return cmd_benchmark(be);
    if (*x) return cmd_experiment(ex);
    if (*o) return cmd_oracle(orc);
  } catch (const InfeasibleError& err) {
    std::cerr << "error: infeasible bag '" << err.bag_id() << "': " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 1;
}
