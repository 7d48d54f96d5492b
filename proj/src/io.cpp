#include "midorf/io.hpp"

#include <fstream>
#include <sstream>

namespace midorf::io {

namespace {

json matrix_to_json(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw FormatError(std::string(what) + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw FormatError(std::string(what) + ": ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw FormatError(std::string(what) + ": non-numeric entry");
      m(r, c) = row[c].get<double>();
    }
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw FormatError(std::string(what) + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw FormatError(std::string(what) + ": non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

json dataset_to_json(const Dataset& ds) {
  json bags = json::array();
  for (const Bag& bag : ds.bags) {
    json b;
    b["id"] = bag.sequence.id;
    b["features"] = matrix_to_json(bag.sequence.features);
    if (std::holds_alternative<int>(bag.y))
      b["y"] = bag.max_label();
    else
      b["y"] = std::string(to_string(bag.rel_label()));
    if (has_annotations(bag.observed)) {
      json obs = json::object();
      for (std::size_t t = 0; t < bag.observed.size(); ++t)
        if (bag.observed[t]) obs[std::to_string(t)] = *bag.observed[t];
      b["observed"] = std::move(obs);
    } else {
      b["observed"] = nullptr;
    }
    bags.push_back(std::move(b));
  }
  json j;
  j["scale"] = {{"L", ds.scale.L}};
  j["setting"] = std::string(to_string(ds.setting));
  j["d"] = ds.d;
  j["split"] = std::string(to_string(ds.split));
  j["bags"] = std::move(bags);
  return j;
}

Dataset dataset_from_json(const json& j) {
  return guarded("dataset", [&] {
    Dataset ds;
    ds.scale.L = j.at("scale").at("L").get<int>();
    ds.setting = parse_setting(j.at("setting").get<std::string>());
    ds.d = j.at("d").get<int>();
    if (j.contains("split")) ds.split = parse_split(j.at("split").get<std::string>());
    for (const auto& b : j.at("bags")) {
      Bag bag;
      bag.sequence.id = b.at("id").get<std::string>();
      bag.sequence.features = matrix_from_json(b.at("features"), "features");
      if (bag.sequence.features.rows() > 0 && bag.sequence.features.cols() == 0)
        bag.sequence.features.resize(bag.sequence.features.rows(), 0);
      const auto& y = b.at("y");
      if (y.is_number_integer())
        bag.y = y.get<int>();
      else if (y.is_string())
        bag.y = parse_rel_label(y.get<std::string>());
      else
        throw FormatError("bag '" + bag.sequence.id + "': y must be an integer or a trend string");
      if (b.contains("observed") && !b.at("observed").is_null()) {
        const auto T = static_cast<std::size_t>(bag.sequence.features.rows());
        bag.observed.assign(T, std::nullopt);
        for (const auto& [key, value] : b.at("observed").items()) {
          std::size_t t = 0;
          try {
            t = std::stoul(key);
          } catch (const std::exception&) {
            throw FormatError("bag '" + bag.sequence.id + "': bad observed key '" + key + "'");
          }
          if (t >= T) throw FormatError("bag '" + bag.sequence.id + "': observed index out of range");
          bag.observed[t] = value.get<int>();
        }
      }
      ds.bags.push_back(std::move(bag));
    }
    return ds;
  });
}

json checkpoint_to_json(const Checkpoint& ck) {
  json j;
  j["model_type"] = std::string(to_string(ck.model_type));
  j["L"] = ck.params.levels();
  j["d"] = ck.params.dim();
  j["beta"] = vector_to_json(ck.params.beta);
  j["cutpoints_free"] = vector_to_json(ck.params.cutpoints);
  j["W"] = matrix_to_json(ck.params.W);
  if (ck.model_type == ModelType::Max)
    j["w"] = ck.params.w;
  else
    j["w"] = nullptr;
  j["meta"] = ck.meta;
  return j;
}

Checkpoint checkpoint_from_json(const json& j) {
  return guarded("checkpoint", [&] {
    Checkpoint ck;
    ck.model_type = parse_model_type(j.at("model_type").get<std::string>());
    const int L = j.at("L").get<int>();
    const int d = j.at("d").get<int>();
    ck.params.beta = vector_from_json(j.at("beta"), "beta");
    ck.params.cutpoints = vector_from_json(j.at("cutpoints_free"), "cutpoints_free");
    ck.params.W = matrix_from_json(j.at("W"), "W");
    ck.params.w = j.at("w").is_null() ? 0.0 : j.at("w").get<double>();
    if (j.contains("meta")) ck.meta = j.at("meta");
    if (L < 2 || ck.params.beta.size() != d || ck.params.cutpoints.size() != L - 1 ||
        ck.params.W.rows() != L || ck.params.W.cols() != L)
      throw FormatError("checkpoint: parameter shapes do not match L/d");
    if (!cutpoints_increasing(ck.params))
      throw FormatError("checkpoint: cut-points are not strictly increasing");
    return ck;
  });
}

json predictions_to_json(const PredictionSet& p) {
  json seqs = json::array();
  for (std::size_t i = 0; i < p.predictions.size(); ++i) {
    json s;
    s["id"] = p.ids.at(i);
    s["levels"] = p.predictions[i].levels;
    s["posterior"] = matrix_to_json(p.predictions[i].posterior);
    seqs.push_back(std::move(s));
  }
  json j;
  j["model_type"] = std::string(to_string(p.model_type));
  j["mode"] = std::string(to_string(p.mode));
  j["sequences"] = std::move(seqs);
  return j;
}

PredictionSet predictions_from_json(const json& j) {
  return guarded("predictions", [&] {
    PredictionSet p;
    p.model_type = parse_model_type(j.at("model_type").get<std::string>());
    p.mode = parse_decode_mode(j.at("mode").get<std::string>());
    for (const auto& s : j.at("sequences")) {
      p.ids.push_back(s.at("id").get<std::string>());
      FramePrediction fp;
      fp.levels = s.at("levels").get<std::vector<int>>();
      fp.posterior = matrix_from_json(s.at("posterior"), "posterior");
      p.predictions.push_back(std::move(fp));
    }
    return p;
  });
}

std::string canonical_dump(const json& j) { return j.dump() + "\n"; }

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << canonical_dump(j);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

Dataset read_dataset(const std::filesystem::path& path) { return dataset_from_json(read_json(path)); }

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  write_json(path, dataset_to_json(ds));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_json(path));
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  write_json(path, checkpoint_to_json(ck));
}

}  // namespace midorf::io
