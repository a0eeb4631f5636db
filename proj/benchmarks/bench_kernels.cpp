#include <benchmark/benchmark.h>

#include "surgrec/ops.hpp"
#include "surgrec/random.hpp"

using namespace surgrec;

namespace {

Tensor<float> random_tensor(Shape shape, Rng& rng, bool grad = false) {
  std::vector<float> v(shape_numel(shape));
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return Tensor<float>(std::move(shape), std::move(v), grad);
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  auto a = random_tensor({n, n}, rng), b = random_tensor({n, n}, rng);
  for (auto _ : state) {
    Tape<float> tape(Tape<float>::Mode::kInference);
    benchmark::DoNotOptimize(ops::matmul(tape, a, b));
  }
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

// Desk conv1 and a mid-network layer.
void BM_Conv2dForward(benchmark::State& state) {
  const auto cin = static_cast<std::size_t>(state.range(0)), hw = static_cast<std::size_t>(state.range(1));
  const auto cout = static_cast<std::size_t>(state.range(2)), k = static_cast<std::size_t>(state.range(3));
  Rng rng(2);
  auto x = random_tensor({cin, hw, hw}, rng);
  auto w = random_tensor({cout, cin, k, k}, rng);
  auto b = random_tensor({cout}, rng);
  for (auto _ : state) {
    Tape<float> tape(Tape<float>::Mode::kInference);
    benchmark::DoNotOptimize(ops::conv2d(tape, x, w, b, 1, k / 2));
  }
}
BENCHMARK(BM_Conv2dForward)->Args({3, 56, 16, 5})->Args({32, 14, 32, 3});

void BM_Conv2dForwardBackward(benchmark::State& state) {
  Rng rng(3);
  auto x = random_tensor({32, 14, 14}, rng, true);
  auto w = random_tensor({32, 32, 3, 3}, rng, true);
  auto b = random_tensor({32}, rng, true);
  for (auto _ : state) {
    Tape<float> tape;
    auto y = ops::sum(tape, ops::conv2d(tape, x, w, b, 1, 1));
    tape.backward(y);
    x.zero_grad();
    w.zero_grad();
    b.zero_grad();
  }
}
BENCHMARK(BM_Conv2dForwardBackward);

void BM_MaxPool(benchmark::State& state) {
  Rng rng(4);
  auto x = random_tensor({32, 28, 28}, rng);
  for (auto _ : state) {
    Tape<float> tape(Tape<float>::Mode::kInference);
    benchmark::DoNotOptimize(ops::max_pool2d(tape, x, 3, 2));
  }
}
BENCHMARK(BM_MaxPool);

}  // namespace

BENCHMARK_MAIN();
