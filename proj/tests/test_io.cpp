#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "midorf/io.hpp"
#include "support.hpp"

using namespace midorf;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "midorf_test_io";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_equal(const Dataset& a, const Dataset& b) {
  CHECK(a.scale.L == b.scale.L);
  CHECK(a.setting == b.setting);
  CHECK(a.d == b.d);
  CHECK(a.split == b.split);
  REQUIRE(a.bags.size() == b.bags.size());
  for (std::size_t i = 0; i < a.bags.size(); ++i) {
    CHECK(a.bags[i].sequence.id == b.bags[i].sequence.id);
    CHECK(a.bags[i].sequence.features == b.bags[i].sequence.features);
    CHECK(a.bags[i].y == b.bags[i].y);
    CHECK(has_annotations(a.bags[i].observed) == has_annotations(b.bags[i].observed));
    if (has_annotations(a.bags[i].observed)) CHECK(a.bags[i].observed == b.bags[i].observed);
  }
}

}  // namespace

TEST_CASE("datasets round-trip exactly") {
  testing_support::Rng rng(11);
  for (Setting s : {Setting::Max, Setting::Rel}) {
    auto ds = testing_support::random_dataset(s, 6, 4, 3, 1, 7, rng, 0.4);
    ds.split = Split::Val;
    const fs::path file = temp_dir() / "ds.json";
    io::write_dataset(file, ds);
    const Dataset back = io::read_dataset(file);
    check_equal(ds, back);

    // write(read(file)) is byte-identical
    const fs::path again = temp_dir() / "ds2.json";
    io::write_dataset(again, back);
    CHECK(slurp(file) == slurp(again));
  }
}

TEST_CASE("dataset schema") {
  testing_support::Rng rng(2);
  auto ds = testing_support::random_dataset(Setting::Rel, 2, 3, 2, 3, 3, rng);
  ds.bags[0].observed = {std::nullopt, 2, std::nullopt};
  const auto j = io::dataset_to_json(ds);
  CHECK(j.at("setting") == "REL");
  CHECK(j.at("scale").at("L") == 3);
  CHECK(j.at("bags")[0].at("observed").at("1") == 2);
  CHECK(j.at("bags")[0].at("observed").size() == 1);
  CHECK(j.at("bags")[1].at("observed").is_null());
  CHECK(j.at("bags")[0].at("y").is_string());
}

TEST_CASE("checkpoints round-trip") {
  testing_support::Rng rng(5);
  io::Checkpoint ck;
  ck.model_type = ModelType::Max;
  ck.params = testing_support::random_params(5, 4, rng);
  ck.meta = {{"alpha", 0.01}};
  const fs::path file = temp_dir() / "ck.json";
  io::write_checkpoint(file, ck);
  const auto back = io::read_checkpoint(file);
  CHECK(back.model_type == ModelType::Max);
  CHECK(back.params.beta == ck.params.beta);
  CHECK(back.params.cutpoints == ck.params.cutpoints);
  CHECK(back.params.W == ck.params.W);
  CHECK(back.params.w == ck.params.w);
  CHECK(back.meta == ck.meta);

  ck.model_type = ModelType::Rel;
  CHECK(io::checkpoint_to_json(ck).at("w").is_null());
}

TEST_CASE("malformed inputs raise format errors") {
  CHECK_THROWS_AS(io::dataset_from_json(nlohmann::json::parse(R"({"scale": {"L": 3}})")),
                  FormatError);
  CHECK_THROWS_AS(io::dataset_from_json(nlohmann::json::parse(
                      R"({"scale": {"L": 3}, "setting": "MAX", "d": 1,
                          "bags": [{"id": "x", "features": [[0.0], [1.0, 2.0]], "y": 2, "observed": null}]})")),
                  FormatError);
  CHECK_THROWS_AS(io::dataset_from_json(nlohmann::json::parse(
                      R"({"scale": {"L": 3}, "setting": "REL", "d": 1,
                          "bags": [{"id": "x", "features": [[0.0]], "y": "UP", "observed": null}]})")),
                  FormatError);
  auto ck = io::checkpoint_to_json({ModelType::Max, ModelParams::zeros(3, 2), {}});
  ck["cutpoints_free"] = {1.0, 0.5};
  CHECK_THROWS_AS(io::checkpoint_from_json(ck), FormatError);
  ck["cutpoints_free"] = {0.0};
  CHECK_THROWS_AS(io::checkpoint_from_json(ck), FormatError);

  const fs::path bad = temp_dir() / "bad.json";
  std::ofstream(bad) << "{ not json";
  CHECK_THROWS_AS(io::read_dataset(bad), FormatError);
  CHECK_THROWS_AS(io::read_dataset(temp_dir() / "missing.json"), Error);
}

TEST_CASE("predictions round-trip") {
  io::PredictionSet p;
  p.model_type = ModelType::Rel;
  p.mode = DecodeMode::Viterbi;
  p.ids = {"a", "b"};
  FramePrediction f;
  f.levels = {1, 2};
  f.posterior = RowMatrix::Constant(2, 3, 1.0 / 3.0);
  p.predictions = {f, f};
  const auto back = io::predictions_from_json(io::predictions_to_json(p));
  CHECK(back.model_type == ModelType::Rel);
  CHECK(back.mode == DecodeMode::Viterbi);
  CHECK(back.ids == p.ids);
  CHECK(back.predictions[1].levels == f.levels);
  CHECK(back.predictions[1].posterior == f.posterior);
}
