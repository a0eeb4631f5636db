#include <benchmark/benchmark.h>

#include <cmath>

#include "surgrec/flow.hpp"

using namespace surgrec;

namespace {

std::vector<double> pattern(std::size_t h, std::size_t w, double dx) {
  std::vector<double> g(h * w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double u = static_cast<double>(x) - dx, v = static_cast<double>(y);
      g[y * w + x] = 128.0 + 40.0 * std::sin(0.3 * u) * std::cos(0.2 * v) + 20.0 * std::sin(0.11 * (u + v));
    }
  }
  return g;
}

void BM_HornSchunck(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto a = pattern(side, side, 0.0), b = pattern(side, side, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(compute_flow(a, b, side, side));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_HornSchunck)->Arg(64)->Arg(128)->Arg(240)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
