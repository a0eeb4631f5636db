#include "surgrec/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "surgrec/random.hpp"

namespace surgrec {

namespace {

template <typename T>
GradCheckReport check_coordinates(const std::function<Tensor<T>(Tape<T>&)>& f,
                                  std::vector<Tensor<T>> leaves, double eps, std::size_t samples,
                                  std::uint64_t seed, bool skip_kinks) {
  std::vector<bool> saved_flags;
  for (auto& leaf : leaves) {
    saved_flags.push_back(leaf.requires_grad());
    leaf.set_requires_grad(true);
    leaf.drop_grad();
  }
  {
    Tape<T> tape;
    Tensor<T> loss = f(tape);
    tape.backward(loss);
  }

  auto evaluate = [&f]() {
    Tape<T> tape(Tape<T>::Mode::kInference);
    return static_cast<double>(f(tape).item());
  };
  const double centre = skip_kinks ? evaluate() : 0.0;

  GradCheckReport report;
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    auto& leaf = leaves[l];
    std::vector<T> analytic(leaf.numel(), T(0));
    if (leaf.has_grad()) std::copy(leaf.grad().begin(), leaf.grad().end(), analytic.begin());
    auto values = leaf.mutable_values();
    std::vector<std::size_t> coords(values.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (samples > 0 && samples < coords.size()) {
      Rng rng(derive_seed(seed, "gradcheck", l));
      rng.shuffle(coords);
      coords.resize(samples);
    }
    for (std::size_t i : coords) {
      const T original = values[i];
      values[i] = original + static_cast<T>(eps);
      const double up = evaluate();
      values[i] = original - static_cast<T>(eps);
      const double down = evaluate();
      values[i] = original;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = static_cast<double>(analytic[i]);
      const double error = std::abs(a - numeric);
      if (skip_kinks) {
        // Slope jump between the one-sided differences. A ReLU or pooling
        // switch inside [x - eps, x + eps] shows up here; a wrong gradient
        // on a smooth piece does not.
        const double jump = std::abs((up - centre) - (centre - down)) / eps;
        if (error <= jump && error > 1e-8) {
          ++report.nondifferentiable;
          continue;
        }
      }
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      report.max_rel_error = std::max(report.max_rel_error, error / denom);
      ++report.checked;
    }
  }
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    leaves[i].drop_grad();
    leaves[i].set_requires_grad(saved_flags[i]);
  }
  return report;
}

}  // namespace

template <typename T>
double finite_diff_check(const std::function<Tensor<T>(Tape<T>&)>& f,
                         std::vector<Tensor<T>> leaves, double eps) {
  return check_coordinates<T>(f, std::move(leaves), eps, 0, 0, false).max_rel_error;
}

template <typename T>
GradCheckReport finite_diff_check_sampled(const std::function<Tensor<T>(Tape<T>&)>& f,
                                          std::vector<Tensor<T>> leaves, double eps,
                                          std::size_t samples, std::uint64_t seed) {
  return check_coordinates<T>(f, std::move(leaves), eps, samples, seed, true);
}

template <typename T>
double finite_diff_check(const std::function<Tensor<T>(Tape<T>&, const Tensor<T>&)>& f,
                         Tensor<T> x, double eps) {
  std::function<Tensor<T>(Tape<T>&)> bound = [&f, x](Tape<T>& tape) { return f(tape, x); };
  return finite_diff_check<T>(bound, std::vector<Tensor<T>>{x}, eps);
}

template double finite_diff_check<float>(
    const std::function<Tensor<float>(Tape<float>&, const Tensor<float>&)>&, Tensor<float>, double);
template double finite_diff_check<double>(
    const std::function<Tensor<double>(Tape<double>&, const Tensor<double>&)>&, Tensor<double>,
    double);
template double finite_diff_check<float>(const std::function<Tensor<float>(Tape<float>&)>&,
                                         std::vector<Tensor<float>>, double);
template double finite_diff_check<double>(const std::function<Tensor<double>(Tape<double>&)>&,
                                          std::vector<Tensor<double>>, double);
template GradCheckReport finite_diff_check_sampled<float>(const std::function<Tensor<float>(Tape<float>&)>&,
                                                 std::vector<Tensor<float>>, double, std::size_t,
                                                 std::uint64_t);
template GradCheckReport finite_diff_check_sampled<double>(const std::function<Tensor<double>(Tape<double>&)>&,
                                                  std::vector<Tensor<double>>, double, std::size_t,
                                                  std::uint64_t);

}  // namespace surgrec
