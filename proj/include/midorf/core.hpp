#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace midorf {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input (bad JSON, wrong shapes, missing keys).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A bag whose clamped lattice admits no path with finite score.
class InfeasibleError : public Error {
 public:
  InfeasibleError(std::string bag_id, const std::string& what)
      : Error(what), bag_id_(std::move(bag_id)) {}
  const std::string& bag_id() const { return bag_id_; }

 private:
  std::string bag_id_;
};

enum class Setting { Max, Rel };
enum class Split { Train, Val, Test };
enum class ModelType { Max, Rel, Chain };
enum class DecodeMode { Marginal, Viterbi };

/// Trend label of a sequence. The numeric values double as the auxiliary
/// trend-state index of the relative model's lattice.
enum class RelLabel { None = 0, Inc = 1, Dec = 2, Both = 3 };
inline constexpr int kNumRelLabels = 4;
inline constexpr RelLabel kRelLabels[kNumRelLabels] = {RelLabel::None, RelLabel::Inc,
                                                       RelLabel::Dec, RelLabel::Both};

std::string_view to_string(Setting s);
std::string_view to_string(Split s);
std::string_view to_string(RelLabel y);
std::string_view to_string(ModelType m);
std::string_view to_string(DecodeMode m);
Setting parse_setting(std::string_view s);
ModelType parse_model_type(std::string_view s);
DecodeMode parse_decode_mode(std::string_view s);
Split parse_split(std::string_view s);
RelLabel parse_rel_label(std::string_view s);

/// Trend of a level path: INC/DEC if it moves in one direction only,
/// BOTH if it moves both ways, NONE if constant (or length 1).
RelLabel trend_of(const std::vector<int>& path);

struct OrdinalScale {
  int L = 2;
};

struct Sequence {
  std::string id;
  Eigen::MatrixXd features;  // T x d, one row per time step

  int length() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

/// Per-frame partial annotations; empty means "no annotations at all".
/// Otherwise length T, with std::nullopt for unannotated frames.
using Annotations = std::vector<std::optional<int>>;

bool has_annotations(const Annotations& a);
bool fully_annotated(const Annotations& a, int T);
std::vector<int> annotated_path(const Annotations& a);

/// Bag label: an ordinal level (MAX setting) or a trend (REL setting).
using BagLabel = std::variant<int, RelLabel>;

struct Bag {
  Sequence sequence;
  BagLabel y;
  Annotations observed;

  int max_label() const { return std::get<int>(y); }
  RelLabel rel_label() const { return std::get<RelLabel>(y); }
};

struct Dataset {
  OrdinalScale scale;
  Setting setting = Setting::Max;
  int d = 0;
  std::vector<Bag> bags;
  Split split = Split::Train;
};

/// Model parameters. Cut-points hold the L-1 interior values b_1 < ... < b_{L-1};
/// b_0 = -inf and b_L = +inf are implicit. The probit noise scale is fixed at 1.
struct ModelParams {
  Eigen::VectorXd beta;
  Eigen::VectorXd cutpoints;
  Eigen::MatrixXd W;
  double w = 0.0;

  static constexpr double sigma = 1.0;

  int levels() const { return static_cast<int>(W.rows()); }
  int dim() const { return static_cast<int>(beta.size()); }

  /// Cut-point b_l for l in 0..L, with the infinite end points.
  double cut(int l) const;

  static ModelParams zeros(int L, int d);
};

bool cutpoints_increasing(const ModelParams& p);

/// Frame-level decoding result: predicted levels (1..L) and the T x L
/// per-frame posterior over levels.
struct FramePrediction {
  std::vector<int> levels;
  RowMatrix posterior;
};

struct Violation {
  std::string bag_id;
  std::string reason;

  bool operator==(const Violation&) const = default;
};

/// Every invariant violation in the dataset; empty for a valid dataset.
std::vector<Violation> validate_dataset(const Dataset& dataset);

/// Throws Error listing the violations when the dataset is invalid.
void require_valid(const Dataset& dataset);

/// Child seed for stream `index` of a base seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace midorf
