#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "prediag/core.hpp"
#include "prediag/error.hpp"
#include "prediag/fileio.hpp"
#include "prediag/forest.hpp"
#include "prediag/persist.hpp"
#include "prediag/svm.hpp"

#include "golden_models.hpp"

using namespace prediag;
using namespace prediag::persist;
using golden::envelope;
using golden::small_forest;
using golden::small_svm;

namespace {

const std::filesystem::path kGolden = PREDIAG_GOLDEN_DIR;

// Set PREDIAG_UPDATE_GOLDEN=1 to rewrite the golden files after a deliberate format change.
void check_golden(const std::string& name, const ModelEnvelope& env) {
  const auto path = kGolden / name;
  const auto text = save_model(env);
  if (std::getenv("PREDIAG_UPDATE_GOLDEN")) io::write_atomic(path, text);
  CHECK(text == io::read_text(path));
  const auto loaded = load_model_file(path);
  CHECK(save_model(loaded) == text);
  CHECK(loaded.created_with == env.created_with);
}

std::string error_of(const std::string& text) {
  try {
    load_model(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

std::string replaced(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

LabeledDataset random_set(Rng& rng, std::size_t n, std::size_t d) {
  LabeledDataset data;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector x(d);
    for (double& v : x) v = rng.gaussian();
    const Label y = x[0] + 0.5 * x[1] * x[1] > 0.3 ? 1 : 0;
    data.add(std::move(x), y);
  }
  return data;
}

} // namespace

TEST_CASE("golden svm file") {
  check_golden("svm.pdmodel.json", envelope(small_svm()));
  const auto text = save_model(envelope(small_svm()));
  CHECK(text.find("3.3333333333333331e-01") != std::string::npos);
  CHECK(text.find("-1.2500000000000000e+00") != std::string::npos);
  CHECK(std::get<ml::SvmModel>(load_model(text).payload).support_vectors[0][2] == 1.0 / 3.0);
}

TEST_CASE("golden forest file") {
  check_golden("forest.pdmodel.json", envelope(small_forest()));
  const auto loaded = load_model_file(kGolden / "forest.pdmodel.json");
  CHECK(loaded.kind() == ModelKind::Forest);
  CHECK(std::get<ml::ForestModel>(loaded.payload) == small_forest());
}

TEST_CASE("trained models predict bit-identically after a round trip") {
  Rng rng(404);
  const auto data = random_set(rng, 80, 5);
  const auto svm = ml::train_svm_smo(data, 3.0, 0.3);
  ml::ForestParams fp;
  fp.n_trees = 15;
  fp.seed = 5;
  const auto forest = ml::train_random_forest(data, fp);

  const auto svm_text = save_model(envelope(svm));
  const auto forest_text = save_model(envelope(forest));
  const auto svm_back = std::get<ml::SvmModel>(load_model(svm_text).payload);
  const auto forest_back = std::get<ml::ForestModel>(load_model(forest_text).payload);
  CHECK(save_model(envelope(svm_back)) == svm_text);
  CHECK(save_model(envelope(forest_back)) == forest_text);
  CHECK(forest_back == forest);
  for (int i = 0; i < 100; ++i) {
    FeatureVector x(5);
    for (double& v : x) v = 2.0 * rng.gaussian();
    CHECK(ml::svm_decision(svm_back, x) == ml::svm_decision(svm, x));
    CHECK(ml::forest_predict(forest_back, x).score == ml::forest_predict(forest, x).score);
  }
}

TEST_CASE("schema errors name the offending field") {
  const auto svm = save_model(envelope(small_svm()));
  CHECK(error_of(replaced(svm, "\"format_version\": 1", "\"format_version\": 2")).find("format_version 2") !=
        std::string::npos);
  CHECK(error_of(replaced(svm, "\"kind\": \"svm\"", "\"kind\": \"cnn\"")).find("unknown model kind") !=
        std::string::npos);
  CHECK(error_of(replaced(svm, "\"bias\"", "\"offset\"")).find("$.payload.bias") != std::string::npos);
  CHECK(error_of(replaced(svm, "2.0000000000000000e+00", "\"two\"")).find("$.payload.support_vectors[1][0]") !=
        std::string::npos);
  CHECK(error_of(replaced(svm, ",\n        -1.0000000000000001e-01", "")).find("support_vectors[1]") != std::string::npos);
  CHECK(error_of("not json").find("not valid JSON") != std::string::npos);
  CHECK(error_of("[1, 2]").find("document must be an object") != std::string::npos);

  const auto forest = save_model(envelope(small_forest()));
  CHECK(error_of(replaced(forest, "\"threshold\"", "\"cut\"")).find("$.payload.trees[0].threshold") !=
        std::string::npos);
  CHECK(error_of(replaced(forest, "\"feature\": 1", "\"feature\": -1")).find("$.payload.trees[0].feature") !=
        std::string::npos);
  // feature index beyond n_features fails model validation
  CHECK(error_of(replaced(forest, "\"feature\": 1", "\"feature\": 7")).find("model schema") != std::string::npos);
}

TEST_CASE("model files") {
  const auto dir = std::filesystem::temp_directory_path() / "prediag_test_persist";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto path = dir / "m.pdmodel.json";
  save_model_file(path, envelope(small_svm()));
  CHECK(std::get<ml::SvmModel>(load_model_file(path).payload).bias == -0.125);
  CHECK_THROWS_AS(load_model_file(dir / "missing.pdmodel.json"), DataError);
  ModelEnvelope bad = envelope(small_svm());
  bad.created_with = json::Json::array();
  CHECK_THROWS_AS(save_model(bad), InvalidArgument);
  std::filesystem::remove_all(dir);
}
