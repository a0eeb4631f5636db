#include "surgrec/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "surgrec/checkpoint.hpp"
#include "surgrec/errors.hpp"
#include "surgrec/ops.hpp"
#include "surgrec/random.hpp"

namespace surgrec {

namespace {

// Seeded epoch order over segment indices.
class Sampler {
 public:
  Sampler(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) {}

  struct Draw {
    std::size_t segment;
    std::uint64_t epoch;
    std::size_t position;
  };

  Draw at(std::uint64_t global) {
    const std::uint64_t epoch = global / n_;
    if (epoch != cached_epoch_ || order_.empty()) {
      order_.resize(n_);
      std::iota(order_.begin(), order_.end(), std::size_t{0});
      Rng rng(derive_seed(seed_, "epoch", epoch));
      rng.shuffle(order_);
      cached_epoch_ = epoch;
    }
    const auto position = static_cast<std::size_t>(global % n_);
    return {order_[position], epoch, position};
  }

 private:
  std::size_t n_;
  std::uint64_t seed_;
  std::uint64_t cached_epoch_ = ~std::uint64_t{0};
  std::vector<std::size_t> order_;
};

}  // namespace

template <typename T>
std::vector<LossRecord> train_stage(Network<T>& network, const std::vector<VideoSegment>& train,
                                    const TrainConfig& config, OptimizerState& optimizer,
                                    const std::function<void(const LossRecord&)>& on_step) {
  if (train.empty()) throw std::invalid_argument("train_stage: no training segments");
  if (config.batch == 0) throw std::invalid_argument("train_stage: batch must be positive");
  const bool recurrent = network.form() != NetworkForm::kFrame;
  const std::size_t window = recurrent ? config.clip_length : 1;
  for (const auto& seg : train) {
    if (seg.length() < window) {
      throw DimensionError("training segment '" + seg.id + "' has " + std::to_string(seg.length()) +
                           " frames, fewer than the clip length " + std::to_string(window));
    }
  }
  const std::string stage(to_string(network.stage()));
  Sampler sampler(train.size(), derive_seed(config.seed, "sampler", 0));
  std::vector<LossRecord> trace;
  network.params().zero_grad();

  while (optimizer.iteration < config.max_iterations) {
    const std::uint64_t iter = optimizer.iteration;
    LossRecord rec;
    rec.iteration = iter;
    rec.lr = lr_schedule(optimizer, iter);
    const T inv_batch = T(1) / static_cast<T>(config.batch);
    try {
      for (std::size_t b = 0; b < config.batch; ++b) {
        const auto draw = sampler.at(iter * config.batch + b);
        const VideoSegment& seg = train[draw.segment];
        Rng rng(derive_seed(config.seed, "window", draw.epoch, draw.position));
        const std::size_t start = rng.uniform_index(seg.length() - window + 1);
        const auto aug = draw_augment(seg.rgb[0].height, seg.rgb[0].width, config.crop.height,
                                      config.crop.width,
                                      derive_seed(config.seed, "augment", draw.epoch, draw.position),
                                      config.mirror);
        const auto clip = make_clip<T>(seg, start, window, aug, config.crop);

        Tape<T> tape;
        const auto logits = network.forward_clip(tape, clip);
        Tensor<T> total;
        const T inv_steps = T(1) / static_cast<T>(logits.size());
        for (const auto& step : logits) {
          auto loss = multi_task_loss(tape, step.gesture, step.task, clip.gesture, clip.task, config.weights);
          rec.gesture += loss.gesture / static_cast<double>(logits.size() * config.batch);
          rec.task += loss.task / static_cast<double>(logits.size() * config.batch);
          auto scaled = ops::scale(tape, loss.total, inv_steps * inv_batch);
          total = total.defined() ? ops::add(tape, total, scaled) : scaled;
        }
        rec.total += static_cast<double>(total.item());
        tape.backward(total);
      }
    } catch (const NumericError& e) {
      throw NumericError("stage " + stage + " iteration " + std::to_string(iter) + ": " + e.what());
    }
    if (!std::isfinite(rec.total)) {
      throw NumericError("stage " + stage + " iteration " + std::to_string(iter) + ": non-finite loss");
    }

    auto grads = collect_gradients(network.params());
    if (recurrent) clip_gradients(grads, optimizer.clip_threshold);
    sgd_step(network.params(), grads, optimizer);
    network.params().zero_grad();

    trace.push_back(rec);
    if (on_step) on_step(rec);
    if (config.checkpoint_interval > 0 && !config.checkpoint_dir.empty() &&
        optimizer.iteration % config.checkpoint_interval == 0) {
      save_checkpoint(make_checkpoint(network, optimizer),
                      config.checkpoint_dir / (stage + "_iter" + std::to_string(optimizer.iteration) + ".ckpt"));
    }
  }
  network.params().drop_grad();
  return trace;
}

std::string loss_trace_csv(const std::vector<LossRecord>& trace) {
  std::ostringstream out;
  out << "iteration,lr,loss_total,loss_gesture,loss_task\n";
  char buf[160];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof(buf), "%llu,%.9g,%.9g,%.9g,%.9g\n",
                  static_cast<unsigned long long>(r.iteration), r.lr, r.total, r.gesture, r.task);
    out << buf;
  }
  return out.str();
}

void write_loss_trace(const std::vector<LossRecord>& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << loss_trace_csv(trace);
  if (!out) throw IoError("cannot write loss trace '" + path.string() + "'");
}

std::vector<double> window_means(const std::vector<LossRecord>& trace, std::size_t window) {
  std::vector<double> out;
  if (window == 0) return out;
  for (std::size_t k = 0; (k + 1) * window <= trace.size(); ++k) {
    double s = 0.0;
    for (std::size_t i = k * window; i < (k + 1) * window; ++i) s += trace[i].total;
    out.push_back(s / static_cast<double>(window));
  }
  return out;
}

template std::vector<LossRecord> train_stage<float>(Network<float>&, const std::vector<VideoSegment>&,
                                                    const TrainConfig&, OptimizerState&,
                                                    const std::function<void(const LossRecord&)>&);
template std::vector<LossRecord> train_stage<double>(Network<double>&, const std::vector<VideoSegment>&,
                                                     const TrainConfig&, OptimizerState&,
                                                     const std::function<void(const LossRecord&)>&);

}  // namespace surgrec
