#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "surgrec/clips.hpp"
#include "surgrec/dataset.hpp"
#include "surgrec/loss.hpp"
#include "surgrec/network.hpp"
#include "surgrec/optim.hpp"

namespace surgrec {

struct TrainConfig {
  std::uint64_t max_iterations = 500;
  std::size_t batch = 8;
  std::size_t clip_length = 8;  // recurrent stages; frame stages draw single frames
  CropSpec crop;
  bool mirror = true;
  LossWeights weights;
  std::uint64_t checkpoint_interval = 0;  // 0 disables periodic checkpoints
  std::filesystem::path checkpoint_dir;   // empty disables periodic checkpoints
  std::uint64_t seed = 1;
};

struct LossRecord {
  std::uint64_t iteration = 0;
  double lr = 0.0;
  double total = 0.0;    // batch mean of the weighted loss
  double gesture = 0.0;  // batch mean gesture cross-entropy
  double task = 0.0;     // batch mean task cross-entropy
};

// Minibatch SGD on `network` until optimizer.iteration reaches
// config.max_iterations. Each epoch visits every segment once in a seeded
// order; a visit draws one random window (one frame for per-frame networks)
// and one crop/mirror. Recurrent networks clip the global gradient norm at
// optimizer.clip_threshold. A non-finite loss aborts with NumericError
// naming the stage and iteration.
template <typename T>
std::vector<LossRecord> train_stage(Network<T>& network, const std::vector<VideoSegment>& train,
                                    const TrainConfig& config, OptimizerState& optimizer,
                                    const std::function<void(const LossRecord&)>& on_step = {});

std::string loss_trace_csv(const std::vector<LossRecord>& trace);
void write_loss_trace(const std::vector<LossRecord>& trace, const std::filesystem::path& path);

// Mean of trace[k*window, (k+1)*window) totals for each full window.
std::vector<double> window_means(const std::vector<LossRecord>& trace, std::size_t window);

}  // namespace surgrec
