#pragma once

#include <cstddef>
#include <functional>
#include <unordered_set>
#include <vector>

#include "surgrec/tensor.hpp"

namespace surgrec {

// Ordered record of differentiable operations.
//
// Ops append an entry when recording is enabled and at least one input
// requires a gradient. Entries are appended as outputs are produced, so the
// tape is topologically ordered by construction. A tape is single-owner;
// distinct tapes share nothing and may run on separate threads.
template <typename T>
class Tape {
 public:
  enum class Mode { kRecord, kInference };

  explicit Tape(Mode mode = Mode::kRecord) : mode_(mode) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  bool recording() const { return mode_ == Mode::kRecord; }

  // True when `inputs` warrant recording an op.
  bool wants_grad(std::initializer_list<const Tensor<T>*> inputs) const;

  // `backward` reads output.grad() and accumulates into input grads.
  void record(Tensor<T> output, std::function<void()> backward);

  std::size_t size() const { return entries_.size(); }
  bool contains(const Tensor<T>& t) const { return produced_.count(t.identity()) > 0; }

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse. Entries whose
  // output received no gradient are skipped.
  void backward(Tensor<T> loss);

  void clear();

 private:
  struct Entry {
    Tensor<T> output;
    std::function<void()> backward;
  };

  Mode mode_;
  std::vector<Entry> entries_;
  std::unordered_set<const void*> produced_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace surgrec
