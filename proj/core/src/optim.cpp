#include "surgrec/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "surgrec/errors.hpp"

namespace surgrec {

double lr_schedule(const OptimizerState& opt, std::uint64_t iter) {
  if (opt.step_period == 0) return opt.base_lr;
  const auto steps = static_cast<double>(iter / opt.step_period);
  const double lr = opt.base_lr * std::pow(opt.step_factor, steps);
  // Long runs would otherwise underflow to a zero rate.
  return opt.base_lr > 0.0 ? std::max(lr, std::numeric_limits<double>::denorm_min()) : lr;
}

template <typename T>
GradientMap<T> collect_gradients(const ParameterSet<T>& params) {
  GradientMap<T> grads;
  for (const auto& [name, tensor] : params) {
    if (!tensor.has_grad()) throw std::invalid_argument("missing gradient for parameter '" + name + "'");
    grads.emplace(name, std::vector<T>(tensor.grad().begin(), tensor.grad().end()));
  }
  return grads;
}

template <typename T>
double global_norm(const GradientMap<T>& grads) {
  double sq = 0.0;
  for (const auto& [_, g] : grads) {
    for (T v : g) sq += static_cast<double>(v) * static_cast<double>(v);
  }
  return std::sqrt(sq);
}

template <typename T>
double clip_gradients(GradientMap<T>& grads, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("clip_gradients: threshold must be positive");
  const double norm = global_norm(grads);
  if (norm > threshold) {
    const double factor = threshold / norm;
    for (auto& [_, g] : grads) {
      for (T& v : g) v = static_cast<T>(static_cast<double>(v) * factor);
    }
  }
  return norm;
}

template <typename T>
void sgd_step(ParameterSet<T>& params, const GradientMap<T>& grads, OptimizerState& opt) {
  const T lr = static_cast<T>(lr_schedule(opt, opt.iteration));
  const T decay = static_cast<T>(opt.weight_decay);
  for (auto& [name, tensor] : params) {
    auto it = grads.find(name);
    if (it == grads.end()) throw std::invalid_argument("missing gradient for parameter '" + name + "'");
    const auto& g = it->second;
    auto w = tensor.mutable_values();
    if (g.size() != w.size()) {
      throw DimensionError("gradient for '" + name + "' has " + std::to_string(g.size()) +
                           " values, parameter has " + std::to_string(w.size()));
    }
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] - lr * (g[i] + decay * w[i]);
  }
  ++opt.iteration;
}

#define SURGREC_INSTANTIATE(T)                                                           \
  template GradientMap<T> collect_gradients<T>(const ParameterSet<T>&);                 \
  template double global_norm<T>(const GradientMap<T>&);                                \
  template double clip_gradients<T>(GradientMap<T>&, double);                           \
  template void sgd_step<T>(ParameterSet<T>&, const GradientMap<T>&, OptimizerState&);

SURGREC_INSTANTIATE(float)
SURGREC_INSTANTIATE(double)
#undef SURGREC_INSTANTIATE

}  // namespace surgrec
