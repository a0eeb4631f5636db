#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "surgrec/architecture.hpp"
#include "surgrec/checkpoint.hpp"
#include "surgrec/config.hpp"
#include "surgrec/dataset.hpp"
#include "surgrec/loss.hpp"
#include "surgrec/metrics.hpp"
#include "surgrec/splits.hpp"
#include "surgrec/trainer.hpp"

namespace surgrec {

using LogFn = std::function<void(const std::string&)>;

// File layout of one run directory.
struct RunPaths {
  std::filesystem::path out;

  std::filesystem::path config() const { return out / "config.json"; }
  std::filesystem::path lock() const { return out / ".lock"; }
  std::filesystem::path checkpoint(Stage stage) const;
  std::filesystem::path loss_trace(Stage stage) const;
  std::filesystem::path metrics() const { return out / "metrics.json"; }
  std::filesystem::path baseline_metrics() const { return out / "baseline_metrics.json"; }
};

// <data_root>/splits.json
std::filesystem::path splits_path(const RunConfig& config);

// Splits from splits.json when present, otherwise generated from `ids` with
// the config's split block.
std::vector<Split> resolve_splits(const RunConfig& config, const std::vector<std::string>& ids);

struct DataSplit {
  std::size_t index = 0;
  Split split;
  std::vector<VideoSegment> train;
  std::vector<VideoSegment> test;
};

// Loads split `index` of the processed archive, resized to the input size.
DataSplit load_data_split(const RunConfig& config, std::size_t index);

// Seeds for a stage's initialization and sampling.
std::uint64_t stage_init_seed(const RunConfig& config, Stage stage);
std::uint64_t stage_train_seed(const RunConfig& config, Stage stage);

// Loss weights per stage. With single_task, RGB stages learn only the task
// head and flow stages only the gesture head (the baseline arm).
LossWeights stage_weights(Stage stage, bool single_task);

struct StageOptions {
  LossWeights weights;
  LogFn log;
  std::uint64_t log_every = 50;
};

struct StageOutcome {
  NetworkCheckpoint checkpoint;
  std::vector<LossRecord> trace;
};

// Builds the stage's network (from prerequisite checkpoints under `paths`
// for recurrent stages), trains it, and writes its checkpoint and loss trace.
// A missing prerequisite throws IoError naming the expected file.
StageOutcome run_stage(const RunConfig& config, Stage stage, const std::vector<VideoSegment>& train,
                       const RunPaths& paths, const StageOptions& options);

// Prerequisite stages of `stage`, in training order, excluding itself.
std::vector<Stage> prerequisites(Stage stage);

// Checkpoints `stage` is initialized from.
std::vector<Stage> initializers(Stage stage);

// Checkpoint for `stage` under `paths`; IoError naming the path when absent,
// CheckpointError when it belongs to another stage or architecture.
NetworkCheckpoint load_stage_checkpoint(const RunConfig& config, Stage stage, const RunPaths& paths);

// Clip-averaged evaluation of a checkpoint on the test segments.
MetricsReport evaluate_checkpoint(const RunConfig& config, const NetworkCheckpoint& checkpoint,
                                  const DataSplit& data);

// Baseline arm: task from the RGB recurrent model, gesture from the flow
// recurrent model; a segment is joint-correct iff both are right.
MetricsReport evaluate_baseline(const RunConfig& config, const NetworkCheckpoint& rgb_lstm,
                                const NetworkCheckpoint& flow_lstm, const DataSplit& data);

struct PipelineOptions {
  bool single_task_modalities = false;
  bool evaluate_baseline = false;
  LogFn log;
};

struct PipelineResult {
  MetricsReport joint;
  std::optional<MetricsReport> baseline;
};

// frame-rgb, frame-flow, lstm-rgb, lstm-flow, joint, then evaluation. Writes
// checkpoints, traces and metrics under `paths`.
PipelineResult run_pipeline(const RunConfig& config, const DataSplit& data, const RunPaths& paths,
                            const PipelineOptions& options);

struct ComparisonRow {
  std::size_t split = 0;
  std::uint64_t seed = 0;
  std::uint64_t split_hash = 0;
  MetricsReport baseline;
  MetricsReport joint;
};

struct ComparisonReport {
  std::vector<ComparisonRow> runs;
  std::vector<std::size_t> splits;

  // Per split: mean over seeds. Then the mean over splits.
  double baseline_mean(std::size_t split) const;
  double joint_mean(std::size_t split) const;
  double baseline_overall() const;
  double joint_overall() const;
};

// Joint accuracies in percent; header "split,baseline,joint,difference",
// one row per split and a final "mean" row.
std::string comparison_csv(const ComparisonReport& report);
std::string comparison_json(const ComparisonReport& report);

// For every split and seed: one pipeline with single-task modality stages.
// The baseline arm evaluates its two recurrent models; the joint arm is
// initialized from the same checkpoints and trained on the same split.
// Writes comparison.csv and comparison.json under `out`.
ComparisonReport run_baseline_comparison(const RunConfig& config, const std::vector<std::size_t>& splits,
                                         const std::vector<std::uint64_t>& seeds,
                                         const std::filesystem::path& out, const LogFn& log);

// Exclusive ownership of an output directory. Throws IoError when the lock
// file already exists.
class RunLock {
 public:
  explicit RunLock(std::filesystem::path path);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace surgrec
