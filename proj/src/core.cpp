#include "midorf/core.hpp"

#include <algorithm>
#include <sstream>

namespace midorf {

std::string_view to_string(Setting s) { return s == Setting::Max ? "MAX" : "REL"; }

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

std::string_view to_string(RelLabel y) {
  switch (y) {
    case RelLabel::Inc: return "INC";
    case RelLabel::Dec: return "DEC";
    case RelLabel::Both: return "BOTH";
    case RelLabel::None: return "NONE";
  }
  return "NONE";
}

std::string_view to_string(ModelType m) {
  switch (m) {
    case ModelType::Max: return "MAX";
    case ModelType::Rel: return "REL";
    case ModelType::Chain: return "CHAIN";
  }
  return "MAX";
}

std::string_view to_string(DecodeMode m) { return m == DecodeMode::Marginal ? "marginal" : "viterbi"; }

ModelType parse_model_type(std::string_view s) {
  if (s == "MAX") return ModelType::Max;
  if (s == "REL") return ModelType::Rel;
  if (s == "CHAIN") return ModelType::Chain;
  throw FormatError("unknown model type '" + std::string(s) + "'");
}

DecodeMode parse_decode_mode(std::string_view s) {
  if (s == "marginal") return DecodeMode::Marginal;
  if (s == "viterbi") return DecodeMode::Viterbi;
  throw FormatError("unknown decode mode '" + std::string(s) + "'");
}

Setting parse_setting(std::string_view s) {
  if (s == "MAX") return Setting::Max;
  if (s == "REL") return Setting::Rel;
  throw FormatError("unknown setting '" + std::string(s) + "'");
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw FormatError("unknown split '" + std::string(s) + "'");
}

RelLabel parse_rel_label(std::string_view s) {
  if (s == "INC") return RelLabel::Inc;
  if (s == "DEC") return RelLabel::Dec;
  if (s == "BOTH") return RelLabel::Both;
  if (s == "NONE") return RelLabel::None;
  throw FormatError("unknown trend label '" + std::string(s) + "'");
}

RelLabel trend_of(const std::vector<int>& path) {
  bool up = false;
  bool down = false;
  for (std::size_t t = 1; t < path.size(); ++t) {
    up |= path[t] > path[t - 1];
    down |= path[t] < path[t - 1];
  }
  if (up && down) return RelLabel::Both;
  if (up) return RelLabel::Inc;
  if (down) return RelLabel::Dec;
  return RelLabel::None;
}

bool has_annotations(const Annotations& a) {
  return std::any_of(a.begin(), a.end(), [](const auto& v) { return v.has_value(); });
}

bool fully_annotated(const Annotations& a, int T) {
  return static_cast<int>(a.size()) == T &&
         std::all_of(a.begin(), a.end(), [](const auto& v) { return v.has_value(); });
}

std::vector<int> annotated_path(const Annotations& a) {
  std::vector<int> path;
  path.reserve(a.size());
  for (const auto& v : a) {
    if (!v) throw Error("annotated_path: sequence is not fully annotated");
    path.push_back(*v);
  }
  return path;
}

double ModelParams::cut(int l) const {
  if (l <= 0) return -std::numeric_limits<double>::infinity();
  if (l >= levels()) return std::numeric_limits<double>::infinity();
  return cutpoints[l - 1];
}

ModelParams ModelParams::zeros(int L, int d) {
  ModelParams p;
  p.beta = Eigen::VectorXd::Zero(d);
  p.cutpoints = Eigen::VectorXd::LinSpaced(L - 1, -1.0, 1.0);
  if (L == 2) p.cutpoints(0) = 0.0;
  p.W = Eigen::MatrixXd::Zero(L, L);
  return p;
}

bool cutpoints_increasing(const ModelParams& p) {
  for (Eigen::Index i = 0; i < p.cutpoints.size(); ++i) {
    if (!std::isfinite(p.cutpoints(i))) return false;
    if (i > 0 && !(p.cutpoints(i) > p.cutpoints(i - 1))) return false;
  }
  return true;
}

namespace {

void check_annotations(const Dataset& ds, const Bag& bag, std::vector<Violation>& out) {
  const int L = ds.scale.L;
  const int T = bag.sequence.length();
  if (bag.observed.empty()) return;
  if (static_cast<int>(bag.observed.size()) != T) {
    out.push_back({bag.sequence.id, "annotation length differs from sequence length"});
    return;
  }
  for (const auto& v : bag.observed) {
    if (v && (*v < 1 || *v > L)) {
      out.push_back({bag.sequence.id, "observed label out of range"});
      return;
    }
  }
  if (ds.setting == Setting::Max) {
    const int y = bag.max_label();
    for (const auto& v : bag.observed) {
      if (v && *v > y) {
        out.push_back({bag.sequence.id, "observed label exceeds bag label"});
        return;
      }
    }
    if (fully_annotated(bag.observed, T)) {
      const auto path = annotated_path(bag.observed);
      if (*std::max_element(path.begin(), path.end()) != y)
        out.push_back({bag.sequence.id, "full annotation maximum differs from bag label"});
    }
  } else {
    const RelLabel y = bag.rel_label();
    if (y == RelLabel::None) {
      std::optional<int> first;
      for (const auto& v : bag.observed) {
        if (!v) continue;
        if (first && *first != *v) {
          out.push_back({bag.sequence.id, "observed labels vary in a NONE bag"});
          return;
        }
        first = v;
      }
    }
    if (fully_annotated(bag.observed, T) && trend_of(annotated_path(bag.observed)) != y)
      out.push_back({bag.sequence.id, "full annotation trend differs from bag label"});
  }
}

}  // namespace

std::vector<Violation> validate_dataset(const Dataset& ds) {
  std::vector<Violation> out;
  if (ds.scale.L < 2) out.push_back({"", "ordinal scale needs at least 2 levels"});
  if (ds.d < 1) out.push_back({"", "feature dimension must be positive"});

  for (const Bag& bag : ds.bags) {
    const auto& id = bag.sequence.id;
    const auto& X = bag.sequence.features;
    if (X.rows() < 1) out.push_back({id, "empty sequence"});
    if (X.cols() != ds.d) out.push_back({id, "inconsistent feature dimension"});
    if (!X.allFinite()) out.push_back({id, "non-finite feature value"});

    const bool max_label = std::holds_alternative<int>(bag.y);
    if (max_label != (ds.setting == Setting::Max)) {
      out.push_back({id, "bag label type does not match dataset setting"});
      continue;
    }
    if (max_label) {
      const int y = bag.max_label();
      if (y < 1 || y > ds.scale.L) {
        out.push_back({id, "bag label out of range"});
        continue;
      }
    } else if (X.rows() == 1 && bag.rel_label() != RelLabel::None) {
      out.push_back({id, "single-frame bag must be labeled NONE"});
    }
    check_annotations(ds, bag, out);
  }
  return out;
}

void require_valid(const Dataset& ds) {
  const auto violations = validate_dataset(ds);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << "invalid dataset (" << violations.size() << " violations)";
  for (std::size_t i = 0; i < violations.size() && i < 5; ++i)
    msg << "\n  " << (violations[i].bag_id.empty() ? "<dataset>" : violations[i].bag_id) << ": "
        << violations[i].reason;
  throw Error(msg.str());
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace midorf
