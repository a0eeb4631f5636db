#include "surgrec/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "surgrec/errors.hpp"
#include "surgrec/ops.hpp"
#include "surgrec/random.hpp"

namespace surgrec {

template <typename T>
void ParameterSet<T>::add(std::string name, Tensor<T> tensor) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name '" + name + "'");
  map_.emplace(std::move(name), std::move(tensor));
}

template <typename T>
const Tensor<T>& ParameterSet<T>::at(std::string_view name) const {
  auto it = map_.find(name);
  if (it == map_.end()) throw std::out_of_range("no parameter named '" + std::string(name) + "'");
  return it->second;
}

template <typename T>
Tensor<T>& ParameterSet<T>::at(std::string_view name) {
  auto it = map_.find(name);
  if (it == map_.end()) throw std::out_of_range("no parameter named '" + std::string(name) + "'");
  return it->second;
}

template <typename T>
std::vector<std::string> ParameterSet<T>::names() const {
  std::vector<std::string> out;
  out.reserve(map_.size());
  for (const auto& [name, _] : map_) out.push_back(name);
  return out;
}

template <typename T>
std::size_t ParameterSet<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : map_) n += t.numel();
  return n;
}

template <typename T>
void ParameterSet<T>::zero_grad() {
  for (auto& [_, t] : map_) t.zero_grad();
}

template <typename T>
void ParameterSet<T>::drop_grad() {
  for (auto& [_, t] : map_) t.drop_grad();
}

template <typename T>
ParameterSet<T> init_params(std::span<const ParamDescriptor> descriptors, std::uint64_t seed,
                            const InitConfig& config) {
  ParameterSet<T> params;
  for (const auto& desc : descriptors) {
    Tensor<T> tensor(desc.shape, true);
    auto values = tensor.mutable_values();
    switch (desc.role) {
      case ParamRole::kWeight: {
        const double stddev = config.scheme == InitScheme::kHe
                                  ? std::sqrt(2.0 / static_cast<double>(desc.fan_in))
                                  : config.stddev;
        Rng rng(derive_seed(seed, desc.name));
        for (T& v : values) v = static_cast<T>(stddev * rng.normal());
        break;
      }
      case ParamRole::kBias:
        break;
      case ParamRole::kLstmBias: {
        const std::size_t hidden = values.size() / 4;
        for (std::size_t i = hidden; i < 2 * hidden; ++i) values[i] = static_cast<T>(config.forget_bias);
        break;
      }
    }
    params.add(desc.name, std::move(tensor));
  }
  return params;
}

template <typename T>
LstmState<T> LstmState<T>::zeros(std::size_t hidden) {
  return LstmState{Tensor<T>(Shape{hidden}), Tensor<T>(Shape{hidden})};
}

std::vector<ParamDescriptor> lstm_descriptors(const std::string& prefix, std::size_t input_size,
                                              std::size_t hidden) {
  return {
      {prefix + ".bias", Shape{4 * hidden}, ParamRole::kLstmBias, input_size + hidden},
      {prefix + ".weight", Shape{4 * hidden, input_size + hidden}, ParamRole::kWeight,
       input_size + hidden},
  };
}

std::vector<ParamDescriptor> dense_descriptors(const std::string& prefix, std::size_t input_size,
                                               std::size_t output_size) {
  return {
      {prefix + ".bias", Shape{output_size}, ParamRole::kBias, input_size},
      {prefix + ".weight", Shape{output_size, input_size}, ParamRole::kWeight, input_size},
  };
}

template <typename T>
LstmStep<T> lstm_step(Tape<T>& tape, const Tensor<T>& x, const LstmState<T>& state,
                      const Tensor<T>& weight, const Tensor<T>& bias, int marker) {
  if (marker != 0 && marker != 1) {
    throw std::invalid_argument("lstm_step: marker must be 0 or 1, got " + std::to_string(marker));
  }
  const std::size_t hidden = state.hidden();
  if (state.c.numel() != hidden || weight.rank() != 2 || weight.dim(0) != 4 * hidden ||
      weight.dim(1) != x.numel() + hidden || bias.numel() != 4 * hidden) {
    throw DimensionError("lstm_step: input " + shape_str(x.shape()) + ", state h " +
                         shape_str(state.h.shape()) + " c " + shape_str(state.c.shape()) +
                         ", weight " + shape_str(weight.shape()) + ", bias " +
                         shape_str(bias.shape()));
  }
  const LstmState<T> prior = marker == 0 ? LstmState<T>::zeros(hidden) : state;

  Tensor<T> joined = ops::concat(tape, x, prior.h);
  Tensor<T> pre = ops::linear(tape, joined, weight, bias);
  Tensor<T> input_gate = ops::sigmoid(tape, ops::slice(tape, pre, 0, hidden));
  Tensor<T> forget_gate = ops::sigmoid(tape, ops::slice(tape, pre, hidden, hidden));
  Tensor<T> output_gate = ops::sigmoid(tape, ops::slice(tape, pre, 2 * hidden, hidden));
  Tensor<T> candidate = ops::tanh(tape, ops::slice(tape, pre, 3 * hidden, hidden));

  Tensor<T> cell = ops::add(tape, ops::mul(tape, forget_gate, prior.c),
                            ops::mul(tape, input_gate, candidate));
  Tensor<T> h = ops::mul(tape, output_gate, ops::tanh(tape, cell));
  return LstmStep<T>{h, LstmState<T>{h, cell}};
}

template <typename T>
LstmStep<T> lstm_step(Tape<T>& tape, const Tensor<T>& x, const LstmState<T>& state,
                      const ParameterSet<T>& params, std::string_view prefix, int marker) {
  const std::string p(prefix);
  return lstm_step(tape, x, state, params.at(p + ".weight"), params.at(p + ".bias"), marker);
}

template <typename T>
Tensor<T> dense(Tape<T>& tape, const Tensor<T>& x, const ParameterSet<T>& params,
                std::string_view prefix) {
  const std::string p(prefix);
  return ops::linear(tape, x, params.at(p + ".weight"), params.at(p + ".bias"));
}

template class ParameterSet<float>;
template class ParameterSet<double>;

#define SURGREC_INSTANTIATE(T)                                                                   \
  template ParameterSet<T> init_params<T>(std::span<const ParamDescriptor>, std::uint64_t,      \
                                          const InitConfig&);                                   \
  template struct LstmState<T>;                                                                 \
  template LstmStep<T> lstm_step<T>(Tape<T>&, const Tensor<T>&, const LstmState<T>&,            \
                                    const Tensor<T>&, const Tensor<T>&, int);                   \
  template LstmStep<T> lstm_step<T>(Tape<T>&, const Tensor<T>&, const LstmState<T>&,            \
                                    const ParameterSet<T>&, std::string_view, int);             \
  template Tensor<T> dense<T>(Tape<T>&, const Tensor<T>&, const ParameterSet<T>&,               \
                              std::string_view);

SURGREC_INSTANTIATE(float)
SURGREC_INSTANTIATE(double)
#undef SURGREC_INSTANTIATE

}  // namespace surgrec
