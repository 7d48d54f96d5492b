#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "midorf/learning.hpp"
#include "midorf/metrics.hpp"
#include "midorf/synthetic.hpp"

namespace midorf::experiment {

/// Training variants compared on each synthetic dataset.
enum class Method {
  Weak,        // MAX or REL model from bag labels
  Partial,     // same model, plus one annotated frame per training sequence
  Supervised,  // plain chain from full frame labels
};

std::string_view to_string(Method m);
Method parse_method(std::string_view s);

struct Recipe {
  std::string name;
  std::uint64_t base_seed = 0;
  int count = 10;
  synthetic::SyntheticConfig data;
  std::vector<Method> methods = {Method::Weak, Method::Partial, Method::Supervised};
  /// Empty: train once with train.alpha. Otherwise grid search on the validation split.
  std::vector<double> alphas;
  learning::TrainConfig train;
};

/// Recipe from a JSON object; unknown keys are rejected.
Recipe recipe_from_json(const nlohmann::json& j);
nlohmann::json recipe_to_json(const Recipe& r);

struct Cell {
  int dataset = 0;
  Method method = Method::Weak;
  double alpha = 0.0;
  metrics::Scores test;
  double final_objective = 0.0;
  double train_seconds = 0.0;
};

struct Summary {
  Method method = Method::Weak;
  double corr = 0.0;
  double mae = 0.0;
  double icc = 0.0;
};

struct Result {
  Recipe recipe;
  std::vector<Cell> cells;
  std::vector<Summary> means;

  const Cell& cell(int dataset, Method m) const;
};

/// Model type a method trains for the recipe's setting.
ModelType model_for(Method m, Setting s);

/// One dataset of the suite: trains every method and scores it on the
/// fully annotated test split.
std::vector<Cell> run_dataset(const Recipe& recipe, int index, const synthetic::SyntheticData& data);

/// Generates the whole suite and runs every dataset (datasets in parallel
/// when recipe.train.jobs > 1; results in dataset order).
Result run(const Recipe& recipe);

nlohmann::json to_json(const Result& r);
std::string format_summary(const Result& r);

}  // namespace midorf::experiment
