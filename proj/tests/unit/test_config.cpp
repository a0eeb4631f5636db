#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "surgrec/config.hpp"
#include "surgrec/errors.hpp"

using namespace surgrec;
using nlohmann::json;

namespace {

std::string snapshot(const std::string& name) {
  std::ifstream in(std::string(SURGREC_SNAPSHOT_DIR) + "/" + name);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(PaperProfile, SnapshotMatchesGolden) {
  const auto text = config_to_json(RunConfig::paper());
  EXPECT_EQ(text, snapshot("paper_config.json"));
}

TEST(PaperProfile, HyperparametersAreThePublishedOnes) {
  const auto j = json::parse(config_to_json(RunConfig::paper()));
  EXPECT_EQ(j["optimizer"]["base_lr"], 0.001);
  EXPECT_EQ(j["optimizer"]["weight_decay"], 0.005);
  EXPECT_EQ(j["optimizer"]["step_factor"], 0.1);
  EXPECT_EQ(j["optimizer"]["step_period"], 20000);
  EXPECT_EQ(j["optimizer"]["clip_threshold"], 15.0);
  EXPECT_EQ(j["training"]["max_iters"]["frame"], 40000);
  EXPECT_EQ(j["training"]["max_iters"]["lstm"], 60000);
  EXPECT_EQ(j["training"]["max_iters"]["joint"], 90000);
  EXPECT_EQ(j["architecture"]["hidden"], 256);
  EXPECT_EQ(j["training"]["clip_length"], 8);
  EXPECT_EQ(j["training"]["clip_stride"], 4);
  EXPECT_EQ(j["input"]["crop_height"], 227);
  EXPECT_EQ(j["input"]["crop_width"], 227);
  EXPECT_EQ(j["input"]["resize_height"], 240);
  EXPECT_EQ(j["input"]["resize_width"], 320);
  EXPECT_EQ(j["preprocess"]["extraction_fps"], 8.0);
  EXPECT_EQ(j["splits"]["count"], 6);
  EXPECT_EQ(j["splits"]["train"], 1200);
  EXPECT_EQ(j["architecture"]["conv"].size(), 5u);
}

TEST(Config, RoundTripReproducesConfig) {
  for (const auto& c : {RunConfig::paper(), RunConfig::desk()}) {
    const auto text = config_to_json(c);
    const auto back = config_from_json(text);
    EXPECT_EQ(config_to_json(back), text);
    EXPECT_EQ(config_hash(back), config_hash(c));
  }
}

TEST(Config, ProfilesValidate) {
  EXPECT_NO_THROW(RunConfig::paper().validate());
  EXPECT_NO_THROW(RunConfig::desk().validate());
  EXPECT_EQ(RunConfig::for_profile("desk").profile, "desk");
  EXPECT_THROW(RunConfig::for_profile("huge"), ConfigError);
  EXPECT_EQ(RunConfig::paper().max_iterations(Stage::kLstmRgb), 60000u);
}

TEST(Config, PartialDocumentStartsFromProfile) {
  const auto c = config_from_json(R"({"profile": "paper", "seed": 9, "training": {"batch": 4}})");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.training.batch, 4u);
  EXPECT_EQ(c.optimizer.base_lr, 0.001);
  EXPECT_EQ(config_from_json("{}").profile, "desk");
}

TEST(Config, FieldLevelErrors) {
  EXPECT_NE(error_of([] { config_from_json(R"({"optimizer": {"learning_rate": 1}})"); })
                .find("unknown config field 'optimizer.learning_rate'"),
            std::string::npos);
  EXPECT_NE(error_of([] { config_from_json(R"({"seed": "abc"})"); }).find("'seed'"), std::string::npos);
  EXPECT_NE(error_of([] { config_from_json(R"({"training": {"batch": 0}})"); }).find("training.batch"),
            std::string::npos);
  EXPECT_NE(error_of([] { config_from_json(R"({"optimizer": {"base_lr": -1}})"); }).find("optimizer.base_lr"),
            std::string::npos);
  EXPECT_FALSE(error_of([] { config_from_json("not json"); }).empty());
  EXPECT_FALSE(error_of([] { config_from_json("[1, 2]"); }).empty());
}

TEST(Config, Overrides) {
  const auto c = apply_overrides(RunConfig::desk(), {"optimizer.base_lr=0.5", "training.max_iters.joint=7",
                                                      "data_root=/tmp/x", "training.precision=f64"});
  EXPECT_EQ(c.optimizer.base_lr, 0.5);
  EXPECT_EQ(c.training.max_iters.joint, 7u);
  EXPECT_EQ(c.data_root, "/tmp/x");
  EXPECT_EQ(c.training.precision, Precision::kF64);
  EXPECT_THROW(apply_overrides(RunConfig::desk(), {"nonsense"}), ConfigError);
  EXPECT_THROW(apply_overrides(RunConfig::desk(), {"optimizer.momentum=0.9"}), ConfigError);
  EXPECT_THROW(apply_overrides(RunConfig::desk(), {"profile=paper"}), ConfigError);
}

TEST(Config, HashIgnoresRunLocation) {
  auto a = RunConfig::desk();
  auto b = a;
  b.data_root = "/elsewhere";
  b.out_dir = "/other";
  b.threads = 4;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
}
