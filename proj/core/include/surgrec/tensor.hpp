#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace surgrec {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major array with an optional gradient accumulator.
//
// A Tensor is a shared handle: copies refer to the same storage, which is
// what lets the tape hold references to intermediate values. Use clone() for
// a deep copy.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor();
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, std::vector<T> values, bool requires_grad = false);

  static Tensor filled(Shape shape, T value, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const T> values() const;
  std::span<T> mutable_values();
  T operator[](std::size_t flat_index) const { return values()[flat_index]; }
  T item() const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);

  // Gradient buffer is allocated on first accumulation. Gradient mutators are
  // const: they act on the shared storage, not on the handle.
  bool has_grad() const;
  std::span<const T> grad() const;
  std::span<T> mutable_grad() const;
  void accumulate_grad(std::span<const T> delta) const;
  void zero_grad() const;
  void drop_grad() const;

  Tensor clone() const;
  Tensor detach() const { return clone(); }

  // Same storage, new shape of equal element count.
  Tensor reshaped(Shape shape) const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }
  const void* identity() const { return impl_.get(); }

  // Throws NumericError naming `context` if any value is NaN/Inf.
  void check_finite(const char* context) const;

 private:
  struct Impl {
    Shape shape;
    std::shared_ptr<std::vector<T>> data;
    std::vector<T> grad;
    bool requires_grad = false;
  };
  explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<Impl> impl_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace surgrec
