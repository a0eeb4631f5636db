#include "surgrec/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "surgrec/errors.hpp"

namespace surgrec {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

template <typename T>
Tensor<T>::Tensor() = default;

template <typename T>
Tensor<T>::Tensor(Shape shape, bool requires_grad) {
  auto impl = std::make_shared<Impl>();
  impl->data = std::make_shared<std::vector<T>>(shape_numel(shape), T(0));
  impl->shape = std::move(shape);
  impl->requires_grad = requires_grad;
  impl_ = std::move(impl);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("tensor shape " + shape_str(shape) + " holds " +
                         std::to_string(shape_numel(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  auto impl = std::make_shared<Impl>();
  impl->data = std::make_shared<std::vector<T>>(std::move(values));
  impl->shape = std::move(shape);
  impl->requires_grad = requires_grad;
  impl_ = std::move(impl);
}

template <typename T>
Tensor<T> Tensor<T>::filled(Shape shape, T value, bool requires_grad) {
  std::vector<T> values(shape_numel(shape), value);
  return Tensor(std::move(shape), std::move(values), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return Tensor(Shape{1}, std::vector<T>{value}, requires_grad);
}

template <typename T>
const Shape& Tensor<T>::shape() const {
  static const Shape kEmpty{};
  return impl_ ? impl_->shape : kEmpty;
}

template <typename T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + shape_str(s));
  }
  return s[axis];
}

template <typename T>
std::size_t Tensor<T>::numel() const {
  return impl_ ? impl_->data->size() : 0;
}

template <typename T>
std::span<const T> Tensor<T>::values() const {
  if (!impl_) return {};
  return {impl_->data->data(), impl_->data->size()};
}

template <typename T>
std::span<T> Tensor<T>::mutable_values() {
  if (!impl_) return {};
  return {impl_->data->data(), impl_->data->size()};
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) {
    throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  }
  return (*impl_->data)[0];
}

template <typename T>
bool Tensor<T>::requires_grad() const {
  return impl_ && impl_->requires_grad;
}

template <typename T>
void Tensor<T>::set_requires_grad(bool flag) {
  if (impl_) impl_->requires_grad = flag;
}

template <typename T>
bool Tensor<T>::has_grad() const {
  return impl_ && !impl_->grad.empty();
}

template <typename T>
std::span<const T> Tensor<T>::grad() const {
  if (!impl_) return {};
  return {impl_->grad.data(), impl_->grad.size()};
}

template <typename T>
std::span<T> Tensor<T>::mutable_grad() const {
  if (impl_->grad.empty()) impl_->grad.assign(numel(), T(0));
  return {impl_->grad.data(), impl_->grad.size()};
}

template <typename T>
void Tensor<T>::accumulate_grad(std::span<const T> delta) const {
  if (delta.size() != numel()) {
    throw DimensionError("gradient of size " + std::to_string(delta.size()) +
                         " does not match tensor " + shape_str(shape()));
  }
  auto& g = impl_->grad;
  if (g.empty()) {
    g.assign(delta.begin(), delta.end());
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += delta[i];
}

template <typename T>
void Tensor<T>::zero_grad() const {
  if (impl_ && !impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
}

template <typename T>
void Tensor<T>::drop_grad() const {
  if (impl_) {
    impl_->grad.clear();
    impl_->grad.shrink_to_fit();
  }
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  if (!impl_) return Tensor();
  return Tensor(impl_->shape, *impl_->data, false);
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const {
  if (shape_numel(shape) != numel()) {
    throw DimensionError("cannot reshape " + shape_str(this->shape()) + " to " + shape_str(shape));
  }
  auto impl = std::make_shared<Impl>();
  impl->shape = std::move(shape);
  impl->data = impl_->data;
  return Tensor(std::move(impl));
}

template <typename T>
void Tensor<T>::check_finite(const char* context) const {
  for (T v : values()) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite value produced by ") + context + " (shape " +
                         shape_str(shape()) + ")");
    }
  }
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace surgrec
