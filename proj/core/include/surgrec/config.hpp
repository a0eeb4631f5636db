#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "surgrec/architecture.hpp"
#include "surgrec/checkpoint.hpp"
#include "surgrec/dataset.hpp"
#include "surgrec/optim.hpp"
#include "surgrec/synth.hpp"

namespace surgrec {

struct StageIterations {
  std::uint64_t frame = 40000;
  std::uint64_t lstm = 60000;
  std::uint64_t joint = 90000;

  bool operator==(const StageIterations&) const = default;
};

struct TrainingConfig {
  StageIterations max_iters;
  std::size_t batch = 8;
  std::size_t clip_length = 8;
  std::size_t clip_stride = 4;
  std::uint64_t checkpoint_interval = 0;
  Precision precision = Precision::kF32;
};

struct InputConfig {
  std::size_t resize_height = 240;
  std::size_t resize_width = 320;
  std::size_t crop_height = 227;
  std::size_t crop_width = 227;
  bool mirror = true;
};

struct SplitConfig {
  std::size_t count = 6;
  std::size_t train = 1200;
  std::size_t index = 0;  // split used by train-* and eval
  std::uint64_t seed = 2017;
};

// Everything a run depends on. The frozen copy written beside a run's
// outputs is config_to_json() of the effective config.
struct RunConfig {
  std::string profile = "paper";
  std::uint64_t seed = 1;
  std::string data_root = "data";
  std::string out_dir = "runs/default";
  std::size_t threads = 1;
  OptimizerState optimizer;
  TrainingConfig training;
  InputConfig input;
  PreprocessConfig preprocess;
  ArchitectureSpec architecture;
  SynthConfig synth;
  SplitConfig splits;

  static RunConfig paper();
  static RunConfig desk();
  static RunConfig for_profile(const std::string& name);

  // Throws ConfigError naming the offending field.
  void validate() const;

  std::uint64_t max_iterations(Stage stage) const;
};

std::string config_to_json(const RunConfig& config);

// Starts from the profile named in the document ("desk" when absent) and
// applies every field present. Unknown fields and type mismatches throw
// ConfigError naming the field path.
RunConfig config_from_json(const std::string& text);

// "a.b.c=value" assignments; value is parsed as JSON, falling back to a
// plain string.
RunConfig apply_overrides(const RunConfig& config, const std::vector<std::string>& assignments);

// Hex FNV-1a of the config with run-location fields (data_root, out_dir,
// threads) removed, so moving a run does not change its hash.
std::string config_hash(const RunConfig& config);

}  // namespace surgrec
