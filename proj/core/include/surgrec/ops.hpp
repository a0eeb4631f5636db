#pragma once

// Differentiable tensor operations. Each op computes its forward value
// eagerly, rejects non-finite results, and (when the tape is recording and an
// input requires a gradient) appends its backward rule to the tape.

#include <cstddef>
#include <vector>

#include "surgrec/tape.hpp"
#include "surgrec/tensor.hpp"

namespace surgrec::ops {

template <typename T>
Tensor<T> add(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> mul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(Tape<T>& tape, const Tensor<T>& a, T factor);

// Scalar [1] holding the sum of all elements.
template <typename T>
Tensor<T> sum(Tape<T>& tape, const Tensor<T>& a);

// [m x k] * [k x n] -> [m x n]
template <typename T>
Tensor<T> matmul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

// weight [out x in] * x [in] + bias [out] -> [out]
template <typename T>
Tensor<T> linear(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>& bias);

template <typename T>
Tensor<T> relu(Tape<T>& tape, const Tensor<T>& a);

template <typename T>
Tensor<T> sigmoid(Tape<T>& tape, const Tensor<T>& a);

template <typename T>
Tensor<T> tanh(Tape<T>& tape, const Tensor<T>& a);

// Cross-correlation (no kernel flip).
// input [C_in x H x W], kernels [C_out x C_in x kh x kw], bias [C_out]
// -> [C_out x H' x W'] with H' = (H + 2*pad - kh) / stride + 1.
template <typename T>
Tensor<T> conv2d(Tape<T>& tape, const Tensor<T>& input, const Tensor<T>& kernels,
                 const Tensor<T>& bias, std::size_t stride, std::size_t pad);

// Square window, no padding. Ties resolve to the first maximum in row-major
// order, which is also where the gradient is routed.
template <typename T>
Tensor<T> max_pool2d(Tape<T>& tape, const Tensor<T>& input, std::size_t window,
                     std::size_t stride);

// Stacks along the leading axis; trailing extents must agree.
template <typename T>
Tensor<T> concat(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

// [C1 x H x W] ++ [C2 x H x W] -> [(C1 + C2) x H x W]
template <typename T>
Tensor<T> concat_channels(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

// Contiguous range [offset, offset + length) of a rank-1 tensor.
template <typename T>
Tensor<T> slice(Tape<T>& tape, const Tensor<T>& a, std::size_t offset, std::size_t length);

template <typename T>
Tensor<T> reshape(Tape<T>& tape, const Tensor<T>& a, Shape shape);

template <typename T>
struct SoftmaxCrossEntropy {
  Tensor<T> loss;   // scalar [1]
  Tensor<T> probs;  // [C], not differentiable
};

template <typename T>
SoftmaxCrossEntropy<T> softmax_cross_entropy(Tape<T>& tape, const Tensor<T>& logits,
                                             std::size_t target);

// Max-subtracted softmax, evaluated in double.
template <typename T>
std::vector<double> softmax(std::span<const T> logits);

}  // namespace surgrec::ops
