#include "midorf/experiment.hpp"

#include <chrono>
#include <iomanip>
#include <sstream>

#include "midorf/parallel.hpp"
#include "midorf/predict.hpp"

namespace midorf::experiment {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Weak: return "weak";
    case Method::Partial: return "partial";
    case Method::Supervised: return "supervised";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  if (s == "weak") return Method::Weak;
  if (s == "partial") return Method::Partial;
  if (s == "supervised") return Method::Supervised;
  throw Error("unknown method '" + std::string(s) + "'");
}

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys,
                    const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw FormatError("unknown key '" + k + "' in " + where);
  }
}

}  // namespace

Recipe recipe_from_json(const nlohmann::json& j) {
  try {
    reject_unknown(j, {"name", "setting", "base_seed", "count", "data", "methods", "alphas", "train"},
                   "recipe");
    Recipe r;
    r.data = synthetic::SyntheticConfig::defaults(parse_setting(j.at("setting").get<std::string>()));
    r.name = j.value("name", std::string(to_string(r.data.setting)));
    r.base_seed = j.at("base_seed").get<std::uint64_t>();
    r.count = j.value("count", 10);
    if (j.contains("data")) {
      const auto& d = j.at("data");
      reject_unknown(d, {"L", "d", "n_train", "n_val", "n_test", "min_length", "max_length",
                         "noise_sigma", "pool_size", "scale_cutpoints", "stay_concentration",
                         "jump_concentration"},
                     "recipe data");
      r.data.L = d.value("L", r.data.L);
      r.data.d = d.value("d", r.data.d);
      r.data.n_train = d.value("n_train", r.data.n_train);
      r.data.n_val = d.value("n_val", r.data.n_val);
      r.data.n_test = d.value("n_test", r.data.n_test);
      r.data.min_length = d.value("min_length", r.data.min_length);
      r.data.max_length = d.value("max_length", r.data.max_length);
      r.data.noise_sigma = d.value("noise_sigma", r.data.noise_sigma);
      r.data.pool_size = d.value("pool_size", r.data.pool_size);
      r.data.scale_cutpoints = d.value("scale_cutpoints", r.data.scale_cutpoints);
      r.data.stay_concentration = d.value("stay_concentration", r.data.stay_concentration);
      r.data.jump_concentration = d.value("jump_concentration", r.data.jump_concentration);
    }
    if (j.contains("methods")) {
      r.methods.clear();
      for (const auto& m : j.at("methods")) r.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("alphas")) r.alphas = j.at("alphas").get<std::vector<double>>();
    if (j.contains("train")) {
      const auto& t = j.at("train");
      reject_unknown(t, {"alpha", "max_iterations", "gradient_tolerance", "function_tolerance",
                         "restarts", "initial_w", "freeze_w", "mode", "seed"},
                     "recipe train");
      r.train.alpha = t.value("alpha", r.train.alpha);
      r.train.max_iterations = t.value("max_iterations", r.train.max_iterations);
      r.train.gradient_tolerance = t.value("gradient_tolerance", r.train.gradient_tolerance);
      r.train.function_tolerance = t.value("function_tolerance", r.train.function_tolerance);
      r.train.restarts = t.value("restarts", r.train.restarts);
      r.train.initial_w = t.value("initial_w", r.train.initial_w);
      r.train.freeze_w = t.value("freeze_w", r.train.freeze_w);
      r.train.seed = t.value("seed", r.train.seed);
      if (t.contains("mode")) r.train.decode_mode = parse_decode_mode(t.at("mode").get<std::string>());
    }
    synthetic::validate(r.data);
    if (r.count < 1) throw FormatError("recipe count must be at least 1");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed recipe: ") + e.what());
  }
}

nlohmann::json recipe_to_json(const Recipe& r) {
  nlohmann::json methods = nlohmann::json::array();
  for (Method m : r.methods) methods.push_back(to_string(m));
  return {{"name", r.name},
          {"setting", to_string(r.data.setting)},
          {"base_seed", r.base_seed},
          {"count", r.count},
          {"data",
           {{"L", r.data.L},
            {"d", r.data.d},
            {"n_train", r.data.n_train},
            {"n_val", r.data.n_val},
            {"n_test", r.data.n_test},
            {"min_length", r.data.min_length},
            {"max_length", r.data.max_length},
            {"noise_sigma", r.data.noise_sigma},
            {"pool_size", r.data.pool_size},
            {"scale_cutpoints", r.data.scale_cutpoints},
            {"stay_concentration", r.data.stay_concentration},
            {"jump_concentration", r.data.jump_concentration}}},
          {"methods", methods},
          {"alphas", r.alphas},
          {"train",
           {{"alpha", r.train.alpha},
            {"max_iterations", r.train.max_iterations},
            {"gradient_tolerance", r.train.gradient_tolerance},
            {"function_tolerance", r.train.function_tolerance},
            {"restarts", r.train.restarts},
            {"initial_w", r.train.initial_w},
            {"freeze_w", r.train.freeze_w},
            {"seed", r.train.seed},
            {"mode", to_string(r.train.decode_mode)}}}};
}

const Cell& Result::cell(int dataset, Method m) const {
  for (const auto& c : cells)
    if (c.dataset == dataset && c.method == m) return c;
  throw Error("no result for dataset " + std::to_string(dataset) + " / " + std::string(to_string(m)));
}

ModelType model_for(Method m, Setting s) {
  if (m == Method::Supervised) return ModelType::Chain;
  return s == Setting::Max ? ModelType::Max : ModelType::Rel;
}

std::vector<Cell> run_dataset(const Recipe& recipe, int index, const synthetic::SyntheticData& data) {
  const Dataset& val = data.full_split(Split::Val);
  const Dataset& test = data.full_split(Split::Test);
  std::vector<Cell> cells;
  for (Method m : recipe.methods) {
    const ModelType type = model_for(m, recipe.data.setting);
    const Dataset train_set = m == Method::Weak      ? data.weak_split(Split::Train)
                              : m == Method::Partial ? synthetic::partial_train(data)
                                                     : data.full_split(Split::Train);
    learning::TrainConfig config = recipe.train;
    config.seed = derive_seed(recipe.train.seed, static_cast<std::uint64_t>(index));
    const auto start = std::chrono::steady_clock::now();
    Cell cell;
    cell.dataset = index;
    cell.method = m;
    learning::TrainResult trained;
    if (recipe.alphas.empty()) {
      trained = learning::train(train_set, config, type, &val);
      cell.alpha = config.alpha;
    } else {
      auto grid = learning::grid_search(train_set, val, recipe.alphas, config, type);
      trained = std::move(grid.best);
      cell.alpha = grid.best_alpha;
    }
    cell.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    cell.final_objective = trained.final_objective;
    cell.test = evaluate_model(test, trained.params, type, config.decode_mode, config.jobs).pooled;
    cells.push_back(cell);
  }
  return cells;
}

Result run(const Recipe& recipe) {
  Result out;
  out.recipe = recipe;
  const int outer = recipe.train.jobs;
  Recipe inner = recipe;
  if (outer > 1) inner.train.jobs = 1;
  const auto per_dataset =
      parallel_map(static_cast<std::size_t>(recipe.count), outer, [&](std::size_t i) {
        synthetic::SyntheticConfig c = recipe.data;
        c.seed = synthetic::suite_seed(recipe.base_seed, static_cast<int>(i));
        return run_dataset(inner, static_cast<int>(i), synthetic::generate_dataset(c));
      });
  for (const auto& cells : per_dataset) out.cells.insert(out.cells.end(), cells.begin(), cells.end());
  for (Method m : recipe.methods) {
    Summary s;
    s.method = m;
    for (int i = 0; i < recipe.count; ++i) {
      const auto& t = out.cell(i, m).test;
      s.corr += t.corr.value_or(0.0) / recipe.count;
      s.mae += t.mae / recipe.count;
      s.icc += t.icc.value_or(0.0) / recipe.count;
    }
    out.means.push_back(s);
  }
  return out;
}

nlohmann::json to_json(const Result& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json();
  };
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells)
    cells.push_back({{"dataset", c.dataset},
                     {"method", to_string(c.method)},
                     {"alpha", c.alpha},
                     {"corr", opt(c.test.corr)},
                     {"mae", c.test.mae},
                     {"icc", opt(c.test.icc)},
                     {"final_objective", c.final_objective}});
  nlohmann::json means = nlohmann::json::array();
  for (const auto& s : r.means)
    means.push_back(
        {{"method", to_string(s.method)}, {"corr", s.corr}, {"mae", s.mae}, {"icc", s.icc}});
  return {{"recipe", recipe_to_json(r.recipe)}, {"cells", cells}, {"means", means}};
}

std::string format_summary(const Result& r) {
  std::vector<std::pair<std::string, metrics::Scores>> rows;
  for (const auto& s : r.means) {
    metrics::Scores sc;
    sc.corr = s.corr;
    sc.mae = s.mae;
    sc.icc = s.icc;
    const std::string label =
        std::string(to_string(model_for(s.method, r.recipe.data.setting))) +
        (s.method == Method::Partial ? " (1 frame/seq)" : s.method == Method::Supervised ? " (supervised)" : "");
    rows.emplace_back(label, sc);
  }
  return metrics::format_table(rows);
}

}  // namespace midorf::experiment
