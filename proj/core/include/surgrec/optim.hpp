#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "surgrec/layers.hpp"

namespace surgrec {

// Plain SGD with coupled L2 weight decay and a step learning-rate policy.
struct OptimizerState {
  std::uint64_t iteration = 0;
  double base_lr = 0.001;
  double weight_decay = 0.005;
  std::uint64_t step_period = 20000;  // 0 disables the step policy
  double step_factor = 0.1;
  double clip_threshold = 15.0;  // global L2 norm; applied by recurrent stages only
};

// base_lr * step_factor ^ floor(iter / step_period)
double lr_schedule(const OptimizerState& opt, std::uint64_t iter);

template <typename T>
using GradientMap = std::map<std::string, std::vector<T>, std::less<>>;

// Copies every parameter gradient; a parameter with no gradient is an error.
template <typename T>
GradientMap<T> collect_gradients(const ParameterSet<T>& params);

template <typename T>
double global_norm(const GradientMap<T>& grads);

// Rescales all gradients by threshold / norm when the global norm exceeds
// `threshold`. Returns the norm measured before clipping.
template <typename T>
double clip_gradients(GradientMap<T>& grads, double threshold);

// w <- w - lr * (g + weight_decay * w), then advances opt.iteration.
template <typename T>
void sgd_step(ParameterSet<T>& params, const GradientMap<T>& grads, OptimizerState& opt);

}  // namespace surgrec
