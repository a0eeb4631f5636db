#include "surgrec/tape.hpp"

#include "surgrec/errors.hpp"

namespace surgrec {

template <typename T>
bool Tape<T>::wants_grad(std::initializer_list<const Tensor<T>*> inputs) const {
  if (!recording()) return false;
  for (const Tensor<T>* t : inputs) {
    if (t && t->requires_grad()) return true;
  }
  return false;
}

template <typename T>
void Tape<T>::record(Tensor<T> output, std::function<void()> backward) {
  output.set_requires_grad(true);
  produced_.insert(output.identity());
  entries_.push_back(Entry{std::move(output), std::move(backward)});
}

template <typename T>
void Tape<T>::backward(Tensor<T> loss) {
  if (loss.numel() != 1) {
    throw DimensionError("backward needs a scalar loss, got shape " + shape_str(loss.shape()));
  }
  if (!contains(loss)) {
    throw std::invalid_argument("backward: loss tensor was not produced on this tape");
  }
  loss.mutable_grad()[0] += T(1);
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (!it->output.has_grad()) continue;
    it->backward();
  }
}

template <typename T>
void Tape<T>::clear() {
  entries_.clear();
  produced_.clear();
}

template class Tape<float>;
template class Tape<double>;

}  // namespace surgrec
