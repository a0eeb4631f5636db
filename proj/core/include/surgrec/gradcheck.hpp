#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "surgrec/tape.hpp"
#include "surgrec/tensor.hpp"

namespace surgrec {

// Compares tape gradients against central differences
// (f(x + eps) - f(x - eps)) / (2 eps), coordinate by coordinate.
// Returns max |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
template <typename T>
double finite_diff_check(const std::function<Tensor<T>(Tape<T>&, const Tensor<T>&)>& f,
                         Tensor<T> x, double eps);

// Multi-leaf variant: `f` closes over `leaves` and must read them afresh on
// every call. Each leaf is perturbed in place and restored afterwards.
template <typename T>
double finite_diff_check(const std::function<Tensor<T>(Tape<T>&)>& f,
                         std::vector<Tensor<T>> leaves, double eps);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  // Coordinates skipped because a ReLU or max-pool switch fell inside the
  // perturbation interval.
  std::size_t nondifferentiable = 0;
};

// Checks `samples` seeded coordinates per leaf (every coordinate of smaller
// leaves). For networks too large to perturb exhaustively.
template <typename T>
GradCheckReport finite_diff_check_sampled(const std::function<Tensor<T>(Tape<T>&)>& f,
                                 std::vector<Tensor<T>> leaves, double eps, std::size_t samples,
                                 std::uint64_t seed);

extern template double finite_diff_check<float>(
    const std::function<Tensor<float>(Tape<float>&, const Tensor<float>&)>&, Tensor<float>, double);
extern template double finite_diff_check<double>(
    const std::function<Tensor<double>(Tape<double>&, const Tensor<double>&)>&, Tensor<double>,
    double);
extern template double finite_diff_check<float>(const std::function<Tensor<float>(Tape<float>&)>&,
                                                std::vector<Tensor<float>>, double);
extern template double finite_diff_check<double>(
    const std::function<Tensor<double>(Tape<double>&)>&, std::vector<Tensor<double>>, double);
extern template GradCheckReport finite_diff_check_sampled<float>(
    const std::function<Tensor<float>(Tape<float>&)>&, std::vector<Tensor<float>>, double, std::size_t,
    std::uint64_t);
extern template GradCheckReport finite_diff_check_sampled<double>(
    const std::function<Tensor<double>(Tape<double>&)>&, std::vector<Tensor<double>>, double,
    std::size_t, std::uint64_t);

}  // namespace surgrec
