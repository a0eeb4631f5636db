#include <benchmark/benchmark.h>

#include "surgrec/checkpoint.hpp"
#include "surgrec/loss.hpp"
#include "surgrec/network.hpp"
#include "surgrec/ops.hpp"
#include "surgrec/random.hpp"

using namespace surgrec;

namespace {

NetworkCheckpoint ckpt(const Network<float>& n) { return make_checkpoint(n, OptimizerState{}); }

Network<float> desk_joint() {
  const auto spec = ArchitectureSpec::desk();
  const auto fr = build_frame_cnn<float>(spec, Modality::kRgb, 1);
  const auto ff = build_frame_cnn<float>(spec, Modality::kFlow, 2);
  return build_joint_model<float>(spec, ckpt(build_modality_lstm<float>(spec, Modality::kRgb, ckpt(fr), 3)),
                                  ckpt(build_modality_lstm<float>(spec, Modality::kFlow, ckpt(ff), 4)), 5);
}

ClipSequence<float> clip(const ArchitectureSpec& spec) {
  Rng rng(6);
  ClipSequence<float> c;
  for (std::size_t t = 0; t < 8; ++t) {
    FramePair<float> f;
    for (auto* x : {&f.rgb, &f.flow}) {
      std::vector<float> v(spec.input_channels * spec.input_height * spec.input_width);
      for (auto& e : v) e = static_cast<float>(rng.uniform(-1.0, 1.0));
      *x = Tensor<float>({spec.input_channels, spec.input_height, spec.input_width}, std::move(v));
    }
    c.frames.push_back(std::move(f));
  }
  c.markers = clip_markers(8);
  return c;
}

void BM_JointClipInference(benchmark::State& state) {
  const auto net = desk_joint();
  const auto c = clip(net.spec());
  for (auto _ : state) benchmark::DoNotOptimize(forward_sequence(net, c));
}
BENCHMARK(BM_JointClipInference)->Unit(benchmark::kMillisecond);

void BM_JointClipTrainStep(benchmark::State& state) {
  auto net = desk_joint();
  const auto c = clip(net.spec());
  for (auto _ : state) {
    Tape<float> tape;
    Tensor<float> total;
    for (const auto& l : net.forward_clip(tape, c)) {
      auto part = multi_task_loss(tape, l.gesture, l.task, 0, 0).total;
      total = total.defined() ? ops::add(tape, total, part) : part;
    }
    tape.backward(total);
    net.params().zero_grad();
  }
}
BENCHMARK(BM_JointClipTrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
