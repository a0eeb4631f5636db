#pragma once

// Dense CPU kernels shared by the differentiable ops. Row-major throughout.

#include <cstddef>
#include <vector>

namespace surgrec::kernels {

// C[m x n] (+)= A[m x k] * B[k x n]
template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate);

// C[m x n] (+)= A^T * B, with A stored [k x m] and B stored [k x n]
template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate);

// C[m x n] (+)= A * B^T, with A stored [m x k] and B stored [n x k]
template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate);

struct ConvGeometry {
  std::size_t channels, height, width;
  std::size_t kernel_h, kernel_w;
  std::size_t stride, pad;
  std::size_t out_h, out_w;

  std::size_t patch_size() const { return channels * kernel_h * kernel_w; }
  std::size_t out_pixels() const { return out_h * out_w; }
};

// Unrolls input [C x H x W] into columns [C*kh*kw x out_h*out_w]; padding reads as zero.
template <typename T>
void im2col(const ConvGeometry& g, const T* input, T* columns);

// Adjoint of im2col: scatters-adds columns back into input-shaped `grad`.
template <typename T>
void col2im(const ConvGeometry& g, const T* columns, T* grad);

template <typename T>
T dot(const T* a, const T* b, std::size_t n);

}  // namespace surgrec::kernels
