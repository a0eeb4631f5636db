#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surgrec/tape.hpp"
#include "surgrec/tensor.hpp"

namespace surgrec {

enum class ParamRole { kWeight, kBias, kLstmBias };

struct ParamDescriptor {
  std::string name;
  Shape shape;
  ParamRole role = ParamRole::kWeight;
  std::size_t fan_in = 1;
};

enum class InitScheme {
  kGaussian,  // N(0, std)
  kHe,        // N(0, sqrt(2 / fan_in))
};

struct InitConfig {
  InitScheme scheme = InitScheme::kGaussian;
  double stddev = 0.01;
  double forget_bias = 1.0;
};

// Named parameter tensors, iterated in name order. Names are the stable keys
// used by checkpoints and stage-to-stage weight transfer.
template <typename T>
class ParameterSet {
 public:
  using Map = std::map<std::string, Tensor<T>, std::less<>>;

  void add(std::string name, Tensor<T> tensor);
  bool contains(std::string_view name) const { return map_.find(name) != map_.end(); }
  const Tensor<T>& at(std::string_view name) const;
  Tensor<T>& at(std::string_view name);

  std::vector<std::string> names() const;
  std::size_t size() const { return map_.size(); }
  std::size_t scalar_count() const;
  void zero_grad();
  void drop_grad();

  typename Map::const_iterator begin() const { return map_.begin(); }
  typename Map::const_iterator end() const { return map_.end(); }
  typename Map::iterator begin() { return map_.begin(); }
  typename Map::iterator end() { return map_.end(); }

 private:
  Map map_;
};

// Weights from `config`, biases zero, LSTM biases zero except the forget-gate
// block. Each tensor draws from its own stream seeded by (seed, name), so
// values do not depend on which other parameters exist.
template <typename T>
ParameterSet<T> init_params(std::span<const ParamDescriptor> descriptors, std::uint64_t seed,
                            const InitConfig& config);

template <typename T>
struct LstmState {
  Tensor<T> h;
  Tensor<T> c;

  static LstmState zeros(std::size_t hidden);
  std::size_t hidden() const { return h.numel(); }
};

template <typename T>
struct LstmStep {
  Tensor<T> y;
  LstmState<T> state;
};

// Descriptors for a single LSTM layer: `<prefix>.weight` [4H x (in + H)]
// and `<prefix>.bias` [4H], gate blocks ordered input, forget, output, cell.
std::vector<ParamDescriptor> lstm_descriptors(const std::string& prefix, std::size_t input_size,
                                              std::size_t hidden);

// One LSTM step. marker == 0 starts a new clip: the incoming state is
// discarded and the step runs from zeros.
template <typename T>
LstmStep<T> lstm_step(Tape<T>& tape, const Tensor<T>& x, const LstmState<T>& state,
                      const Tensor<T>& weight, const Tensor<T>& bias, int marker);

template <typename T>
LstmStep<T> lstm_step(Tape<T>& tape, const Tensor<T>& x, const LstmState<T>& state,
                      const ParameterSet<T>& params, std::string_view prefix, int marker);

// Fully connected layer stored as `<prefix>.weight` / `<prefix>.bias`.
template <typename T>
Tensor<T> dense(Tape<T>& tape, const Tensor<T>& x, const ParameterSet<T>& params,
                std::string_view prefix);

std::vector<ParamDescriptor> dense_descriptors(const std::string& prefix, std::size_t input_size,
                                               std::size_t output_size);

extern template class ParameterSet<float>;
extern template class ParameterSet<double>;

}  // namespace surgrec
