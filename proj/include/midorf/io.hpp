#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "midorf/core.hpp"

namespace midorf::io {

using nlohmann::json;

// Dataset documents:
//   {"scale": {"L": int}, "setting": "MAX"|"REL", "d": int, "split": str,
//    "bags": [{"id": str, "features": [[real...]...], "y": int|str,
//              "observed": {"<t>": int, ...} | null}]}
json dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const json& j);

// Checkpoint documents:
//   {"model_type": "MAX"|"REL"|"CHAIN", "L": int, "d": int, "beta": [real],
//    "cutpoints_free": [real], "W": [[real]], "w": real|null, "meta": {...}}
struct Checkpoint {
  ModelType model_type = ModelType::Max;
  ModelParams params;
  json meta = json::object();
};

json checkpoint_to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const json& j);

// Prediction documents:
//   {"model_type": str, "mode": "marginal"|"viterbi",
//    "sequences": [{"id": str, "levels": [int], "posterior": [[real]]}]}
struct PredictionSet {
  ModelType model_type = ModelType::Max;
  DecodeMode mode = DecodeMode::Marginal;
  std::vector<std::string> ids;
  std::vector<FramePrediction> predictions;
};

json predictions_to_json(const PredictionSet& p);
PredictionSet predictions_from_json(const json& j);

/// Canonical text form: compact, sorted keys, round-trip reals, trailing newline.
std::string canonical_dump(const json& j);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Checkpoint read_checkpoint(const std::filesystem::path& path);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);

}  // namespace midorf::io
