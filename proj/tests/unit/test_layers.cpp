#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numeric>

#include "oracles.hpp"
#include "surgrec/gradcheck.hpp"
#include "surgrec/errors.hpp"
#include "surgrec/layers.hpp"
#include "surgrec/loss.hpp"
#include "surgrec/ops.hpp"
#include "surgrec/optim.hpp"
#include "surgrec/random.hpp"

using namespace surgrec;
using T64 = Tensor<double>;

namespace {

T64 random_tensor(Shape shape, Rng& rng, double scale = 1.0, bool grad = false) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = scale * rng.uniform(-1.0, 1.0);
  return T64(std::move(shape), std::move(v), grad);
}

std::vector<double> vec(const T64& t) { return {t.values().begin(), t.values().end()}; }

bool bit_equal(const T64& a, const T64& b) {
  if (a.shape() != b.shape()) return false;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    if (std::memcmp(&a.values()[i], &b.values()[i], sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace

TEST(Lstm, StepMatchesOracle) {
  Rng rng(31);
  const std::size_t in = 5, hidden = 4;
  for (int trial = 0; trial < 20; ++trial) {
    auto x = random_tensor({in}, rng);
    auto w = random_tensor({4 * hidden, in + hidden}, rng, 0.7);
    auto b = random_tensor({4 * hidden}, rng, 0.3);
    LstmState<double> s{random_tensor({hidden}, rng), random_tensor({hidden}, rng)};
    const int marker = trial % 2;
    Tape<double> tape(Tape<double>::Mode::kInference);
    const auto step = lstm_step(tape, x, s, w, b, marker);
    const auto ref = oracle::lstm_step(vec(x), {vec(s.h), vec(s.c)}, vec(w), vec(b), hidden, marker);
    EXPECT_LT(oracle::max_abs_diff(vec(step.state.h), ref.h), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(vec(step.state.c), ref.c), 1e-12);
    EXPECT_TRUE(bit_equal(step.y, step.state.h));
  }
}

TEST(Lstm, MarkerZeroResetIsBitExactOn100Draws) {
  Rng rng(32);
  const std::size_t in = 6, hidden = 5;
  auto w = random_tensor({4 * hidden, in + hidden}, rng, 0.8);
  auto b = random_tensor({4 * hidden}, rng, 0.5);
  for (int draw = 0; draw < 100; ++draw) {
    auto x = random_tensor({in}, rng, 2.0);
    LstmState<double> arbitrary{random_tensor({hidden}, rng, 3.0), random_tensor({hidden}, rng, 3.0)};
    Tape<double> tape(Tape<double>::Mode::kInference);
    const auto reset = lstm_step(tape, x, arbitrary, w, b, 0);
    const auto fresh = lstm_step(tape, x, LstmState<double>::zeros(hidden), w, b, 0);
    const auto cont = lstm_step(tape, x, LstmState<double>::zeros(hidden), w, b, 1);
    ASSERT_TRUE(bit_equal(reset.state.h, fresh.state.h)) << draw;
    ASSERT_TRUE(bit_equal(reset.state.c, fresh.state.c)) << draw;
    ASSERT_TRUE(bit_equal(reset.state.h, cont.state.h)) << draw;
    ASSERT_TRUE(bit_equal(reset.state.c, cont.state.c)) << draw;
  }
}

TEST(Lstm, ZeroStateZeroInputExample) {
  // Zero weights and bias: every gate is 0.5, candidate 0, so c' = h' = 0.
  const std::size_t hidden = 3;
  T64 x = T64::filled({2}, 0.0);
  T64 w = T64::filled({4 * hidden, 2 + hidden}, 0.0);
  T64 b = T64::filled({4 * hidden}, 0.0);
  Tape<double> tape;
  const auto s = lstm_step(tape, x, LstmState<double>::zeros(hidden), w, b, 0);
  for (double v : s.state.h.values()) EXPECT_EQ(v, 0.0);
  for (double v : s.state.c.values()) EXPECT_EQ(v, 0.0);
}

TEST(Lstm, GradientThroughThreeSteps) {
  Rng rng(33);
  const std::size_t in = 3, hidden = 2;
  auto w = random_tensor({4 * hidden, in + hidden}, rng, 0.8, true);
  auto b = random_tensor({4 * hidden}, rng, 0.5, true);
  std::vector<T64> xs;
  for (int t = 0; t < 3; ++t) xs.push_back(random_tensor({in}, rng, 1.0, true));
  auto f = [&](Tape<double>& tape) {
    auto s = LstmState<double>::zeros(hidden);
    T64 total;
    for (int t = 0; t < 3; ++t) {
      s = lstm_step(tape, xs[t], s, w, b, t == 0 ? 0 : 1).state;
      auto part = ops::sum(tape, ops::mul(tape, s.h, s.h));
      total = total.defined() ? ops::add(tape, total, part) : part;
    }
    return total;
  };
  std::vector<T64> leaves = {w, b, xs[0], xs[1], xs[2]};
  EXPECT_LT(finite_diff_check<double>(f, leaves, 1e-5), 1e-4);
}

TEST(Init, LstmForgetBlockAndZeroBiases) {
  const auto desc = lstm_descriptors("lstm", 4, 3);
  InitConfig cfg;
  cfg.forget_bias = 1.0;
  const auto p = init_params<double>(desc, 5, cfg);
  const auto& b = p.at("lstm.bias");
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(b.values()[i], (i >= 3 && i < 6) ? 1.0 : 0.0) << i;
}

TEST(Init, GaussianStddevAndIndependence) {
  std::vector<ParamDescriptor> a = {{"big.weight", Shape{200, 200}, ParamRole::kWeight, 200}};
  std::vector<ParamDescriptor> ab = {{"aaa.weight", Shape{3, 3}, ParamRole::kWeight, 3},
                                     {"big.weight", Shape{200, 200}, ParamRole::kWeight, 200}};
  InitConfig cfg;
  cfg.stddev = 0.01;
  const auto p1 = init_params<double>(a, 9, cfg);
  const auto p2 = init_params<double>(ab, 9, cfg);
  const auto v = p1.at("big.weight").values();
  double ss = 0.0, mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double x : v) ss += (x - mean) * (x - mean);
  EXPECT_NEAR(std::sqrt(ss / static_cast<double>(v.size())), 0.01, 0.0005);
  EXPECT_NEAR(mean, 0.0, 0.0005);
  const auto v2 = p2.at("big.weight").values();
  EXPECT_TRUE(std::equal(v.begin(), v.end(), v2.begin()));
}

TEST(Init, HeScalesWithFanIn) {
  std::vector<ParamDescriptor> d = {{"w.weight", Shape{100, 400}, ParamRole::kWeight, 50}};
  InitConfig cfg;
  cfg.scheme = InitScheme::kHe;
  const auto p = init_params<double>(d, 3, cfg);
  double ss = 0.0;
  for (double x : p.at("w.weight").values()) ss += x * x;
  EXPECT_NEAR(std::sqrt(ss / 40000.0), std::sqrt(2.0 / 50.0), 0.005);
}

TEST(ParameterSetTest, IteratesInNameOrder) {
  ParameterSet<double> p;
  p.add("zeta", T64({1}));
  p.add("alpha", T64({1}));
  p.add("mid", T64({2}));
  EXPECT_EQ(p.names(), (std::vector<std::string>{"alpha", "mid", "zeta"}));
  EXPECT_EQ(p.scalar_count(), 4u);
}

TEST(Schedule, StepPolicyExamples) {
  OptimizerState o;
  EXPECT_DOUBLE_EQ(lr_schedule(o, 0), 0.001);
  EXPECT_DOUBLE_EQ(lr_schedule(o, 19999), 0.001);
  EXPECT_NEAR(lr_schedule(o, 20000), 0.0001, 1e-18);
  EXPECT_NEAR(lr_schedule(o, 45000), 0.00001, 1e-18);
  o.step_period = 0;
  EXPECT_DOUBLE_EQ(lr_schedule(o, 1000000), 0.001);
}

TEST(Schedule, NonIncreasing) {
  OptimizerState o;
  double prev = lr_schedule(o, 0);
  for (std::uint64_t it = 0; it < 100000; it += 997) {
    const double lr = lr_schedule(o, it);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
}

TEST(Clip, ScalesToThresholdAndPreservesDirection) {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    GradientMap<double> g;
    g["a"] = {};
    g["b"] = {};
    for (int i = 0; i < 7; ++i) g["a"].push_back(rng.uniform(-10, 10));
    for (int i = 0; i < 3; ++i) g["b"].push_back(rng.uniform(-10, 10));
    const auto before = g;
    const double norm = global_norm(g);
    const double threshold = rng.uniform(1.0, 30.0);
    const double reported = clip_gradients(g, threshold);
    EXPECT_DOUBLE_EQ(reported, norm);
    const double after = global_norm(g);
    EXPECT_LE(after, std::max(norm, 0.0) + 1e-12);
    if (norm > threshold) {
      EXPECT_NEAR(after, threshold, 1e-9);
    } else {
      EXPECT_EQ(g, before);
    }
    // Same direction: g = k * before with k > 0.
    const double k = g["a"][0] / before.at("a")[0];
    EXPECT_GT(k, 0.0);
    for (const auto& [name, v] : g) {
      for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(v[i], k * before.at(name)[i], 1e-9);
    }
  }
}

TEST(Sgd, ZeroLearningRateIsFixedPoint) {
  ParameterSet<double> p;
  Rng rng(42);
  p.add("w", random_tensor({5}, rng, 1.0, true));
  const auto before = vec(p.at("w"));
  GradientMap<double> g;
  g["w"] = {1, 2, 3, 4, 5};
  OptimizerState o;
  o.base_lr = 0.0;
  sgd_step(p, g, o);
  EXPECT_EQ(vec(p.at("w")), before);
  EXPECT_EQ(o.iteration, 1u);
}

TEST(Sgd, CoupledWeightDecayUpdate) {
  ParameterSet<double> p;
  p.add("w", T64({2}, {1.0, -2.0}, true));
  GradientMap<double> g;
  g["w"] = {0.5, 0.25};
  OptimizerState o;
  o.base_lr = 0.1;
  o.weight_decay = 0.01;
  sgd_step(p, g, o);
  EXPECT_DOUBLE_EQ(p.at("w").values()[0], 1.0 - 0.1 * (0.5 + 0.01 * 1.0));
  EXPECT_DOUBLE_EQ(p.at("w").values()[1], -2.0 - 0.1 * (0.25 + 0.01 * -2.0));
}

TEST(Dense, GradCheck) {
  Rng rng(43);
  ParameterSet<double> p;
  for (const auto& d : dense_descriptors("fc", 6, 4)) p.add(d.name, random_tensor(d.shape, rng, 0.5, true));
  auto x = random_tensor({6}, rng, 1.0, true);
  auto f = [&](Tape<double>& t) {
    auto y = dense(t, x, p, "fc");
    return ops::sum(t, ops::mul(t, y, y));
  };
  EXPECT_LT(finite_diff_check<double>(f, {x, p.at("fc.weight"), p.at("fc.bias")}, 1e-5), 1e-4);
}

TEST(Lstm, ZeroParamsWithCellStateExample) {
  const std::size_t hidden = 1;
  T64 w = T64::filled({4 * hidden, 1 + hidden}, 0.0);
  T64 b = T64::filled({4 * hidden}, 0.0);
  LstmState<double> s{T64::filled({1}, 0.0), T64::filled({1}, 2.0)};
  Tape<double> tape(Tape<double>::Mode::kInference);
  const auto out = lstm_step(tape, T64::filled({1}, 0.3), s, w, b, 1);
  EXPECT_DOUBLE_EQ(out.state.c.values()[0], 1.0);
  EXPECT_NEAR(out.state.h.values()[0], 0.5 * std::tanh(1.0), 1e-15);
  EXPECT_NEAR(out.state.h.values()[0], 0.3808, 1e-4);
  EXPECT_THROW(lstm_step(tape, T64::filled({2}, 0.0), s, w, b, 1), DimensionError);
}

TEST(Lstm, EightStepUnrollGradients) {
  Rng rng(34);
  const std::size_t in = 3, hidden = 3;
  auto w = random_tensor({4 * hidden, in + hidden}, rng, 0.6, true);
  auto b = random_tensor({4 * hidden}, rng, 0.4, true);
  std::vector<T64> xs;
  for (int t = 0; t < 8; ++t) xs.push_back(random_tensor({in}, rng, 1.0, true));
  std::function<T64(Tape<double>&)> f = [&](Tape<double>& tape) {
    auto s = LstmState<double>::zeros(hidden);
    for (int t = 0; t < 8; ++t) s = lstm_step(tape, xs[t], s, w, b, t == 0 ? 0 : 1).state;
    return ops::sum(tape, ops::mul(tape, s.h, s.c));
  };
  std::vector<T64> leaves = {w, b};
  leaves.insert(leaves.end(), xs.begin(), xs.end());
  EXPECT_LT(finite_diff_check<double>(f, leaves, 1e-5), 1e-4);
}

TEST(Init, DeterministicAndNameKeyed) {
  std::vector<ParamDescriptor> d = {{"a.weight", Shape{50, 40}, ParamRole::kWeight, 40},
                                    {"b.weight", Shape{50, 40}, ParamRole::kWeight, 40},
                                    {"a.bias", Shape{50}, ParamRole::kBias, 40}};
  InitConfig cfg;
  const auto p1 = init_params<double>(d, 17, cfg);
  const auto p2 = init_params<double>(d, 17, cfg);
  EXPECT_TRUE(bit_equal(p1.at("a.weight"), p2.at("a.weight")));
  EXPECT_FALSE(bit_equal(p1.at("a.weight"), p1.at("b.weight")));
  for (double v : p1.at("a.bias").values()) EXPECT_EQ(v, 0.0);
  // 10^4 draws of N(0, 0.01): mean within 3 * sigma / 100.
  std::vector<ParamDescriptor> big = {{"m.weight", Shape{100, 100}, ParamRole::kWeight, 100}};
  double mean = 0.0;
  for (double v : init_params<double>(big, 18, cfg).at("m.weight").values()) mean += v;
  mean /= 1e4;
  EXPECT_LT(std::abs(mean), 3.0 * 0.01 / 100.0);
}

TEST(Sgd, ExampleUpdate) {
  ParameterSet<double> p;
  p.add("w", T64({1}, std::vector<double>{1.0}, true));
  GradientMap<double> g;
  g["w"] = {0.5};
  OptimizerState o;
  sgd_step(p, g, o);
  EXPECT_NEAR(p.at("w").values()[0], 0.999495, 1e-15);
  GradientMap<double> empty;
  EXPECT_THROW(sgd_step(p, empty, o), std::invalid_argument);
}

TEST(Sgd, ZeroGradientZeroDecayIsFixedPoint) {
  ParameterSet<double> p;
  p.add("w", T64({2}, std::vector<double>{0.25, -3.0}, true));
  GradientMap<double> g;
  g["w"] = {0.0, 0.0};
  OptimizerState o;
  o.weight_decay = 0.0;
  sgd_step(p, g, o);
  EXPECT_EQ(vec(p.at("w")), (std::vector<double>{0.25, -3.0}));
}

TEST(Sgd, HundredStepsOnQuadratic) {
  // f(w) = w^2 / 2, gradient w: w <- 0.9 w each step.
  ParameterSet<double> p;
  p.add("w", T64({1}, std::vector<double>{1.0}, true));
  OptimizerState o;
  o.base_lr = 0.1;
  o.weight_decay = 0.0;
  o.step_period = 0;
  for (int i = 0; i < 100; ++i) {
    Tape<double> tape;
    auto& w = p.at("w");
    w.drop_grad();
    tape.backward(ops::scale(tape, ops::sum(tape, ops::mul(tape, w, w)), 0.5));
    sgd_step(p, collect_gradients(p), o);
  }
  EXPECT_NEAR(p.at("w").values()[0], std::pow(0.9, 100), 1e-15);
  EXPECT_NEAR(p.at("w").values()[0], 2.656e-5, 1e-8);
}

TEST(Schedule, PaperExamples) {
  OptimizerState o;
  EXPECT_DOUBLE_EQ(lr_schedule(o, 25000), 0.0001);
  EXPECT_GT(lr_schedule(o, 10'000'000), 0.0);
}

TEST(Clip, Examples) {
  GradientMap<double> g;
  g["x"] = {30.0};
  clip_gradients(g, 15.0);
  EXPECT_EQ(g["x"][0], 15.0);
  GradientMap<double> small;
  small["x"] = {0.1, -0.2};
  const auto before = small;
  clip_gradients(small, 15.0);
  EXPECT_EQ(small, before);
  // Norm exactly 100, threshold 15.
  Rng rng(44);
  GradientMap<double> r;
  for (auto name : {"a", "b", "c"}) {
    for (int i = 0; i < 11; ++i) r[name].push_back(rng.uniform(-1.0, 1.0));
  }
  const double n0 = global_norm(r);
  for (auto& [name, v] : r) {
    for (auto& x : v) x *= 100.0 / n0;
  }
  const auto orig = r;
  clip_gradients(r, 15.0);
  EXPECT_NEAR(global_norm(r), 15.0, 1e-9);
  double dot = 0.0;
  for (const auto& [name, v] : r) {
    for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * orig.at(name)[i];
  }
  EXPECT_NEAR(dot / (global_norm(r) * global_norm(orig)), 1.0, 1e-12);
}

TEST(MultiTaskLoss, Examples) {
  Tape<double> tape;
  T64 g = T64::filled({14}, 0.0, true);
  T64 t = T64::filled({3}, 0.0, true);
  const auto l = multi_task_loss(tape, g, t, 3, 1);
  EXPECT_NEAR(l.total.item(), std::log(14.0) + std::log(3.0), 1e-12);
  EXPECT_NEAR(l.total.item(), 3.7377, 1e-4);
  Rng rng(45);
  auto gl = random_tensor({14}, rng, 1.0, true);
  auto tl = random_tensor({3}, rng, 1.0, true);
  Tape<double> t2;
  const auto only = multi_task_loss(t2, gl, tl, 5, 2, LossWeights{1.0, 0.0});
  const auto ce = ops::softmax_cross_entropy(t2, gl, 5);
  EXPECT_EQ(only.total.item(), ce.loss.item());
  EXPECT_THROW(multi_task_loss(t2, gl, tl, 14, 0), std::out_of_range);
  EXPECT_THROW(multi_task_loss(t2, gl, tl, 0, 3), std::out_of_range);
}

TEST(MultiTaskLoss, GradientIsSumOfHeadGradients) {
  Rng rng(46);
  auto x = random_tensor({6}, rng, 1.0, true);
  auto wg = random_tensor({14, 6}, rng, 0.5, true);
  auto wt = random_tensor({3, 6}, rng, 0.5, true);
  auto grads = [&](LossWeights w) {
    for (auto* leaf : {&x, &wg, &wt}) leaf->drop_grad();
    Tape<double> tape;
    auto gl = ops::matmul(tape, wg, ops::reshape(tape, x, Shape{6, 1}));
    auto tl = ops::matmul(tape, wt, ops::reshape(tape, x, Shape{6, 1}));
    tape.backward(multi_task_loss(tape, ops::reshape(tape, gl, Shape{14}), ops::reshape(tape, tl, Shape{3}), 4, 2, w)
                      .total);
    return vec(T64(x.shape(), std::vector<double>(x.grad().begin(), x.grad().end())));
  };
  const auto both = grads({1, 1}), g = grads({1, 0}), t = grads({0, 1});
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(both[i], g[i] + t[i], 1e-14);
  std::function<T64(Tape<double>&)> f = [&](Tape<double>& tape) {
    auto gl = ops::reshape(tape, ops::matmul(tape, wg, ops::reshape(tape, x, Shape{6, 1})), Shape{14});
    auto tl = ops::reshape(tape, ops::matmul(tape, wt, ops::reshape(tape, x, Shape{6, 1})), Shape{3});
    return multi_task_loss(tape, gl, tl, 4, 2).total;
  };
  EXPECT_LT(finite_diff_check<double>(f, {x, wg, wt}, 1e-5), 1e-4);
}

TEST(MultiTaskLoss, EqualWeightsSymmetricUnderHeadSwap) {
  Rng rng(47);
  auto a = random_tensor({3}, rng);
  auto b = random_tensor({3}, rng);
  Tape<double> tape;
  EXPECT_EQ(multi_task_loss(tape, a, b, 0, 2).total.item(), multi_task_loss(tape, b, a, 2, 0).total.item());
}
