#include "kernels.hpp"

#include <algorithm>

namespace surgrec::kernels {

template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    T* c_row = c + i * n;
    const T* a_row = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T scale = a_row[p];
      const T* b_row = b + p * n;
#pragma omp simd
      for (std::size_t j = 0; j < n; ++j) c_row[j] += scale * b_row[j];
    }
  }
}

template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    T* c_row = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T scale = a[p * m + i];
      const T* b_row = b + p * n;
#pragma omp simd
      for (std::size_t j = 0; j < n; ++j) c_row[j] += scale * b_row[j];
    }
  }
}

template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate) {
  // Transposing B once keeps the inner loop unit-stride.
  std::vector<T> bt(k * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
  }
  gemm_nn(m, n, k, a, bt.data(), c, accumulate);
}

template <typename T>
void im2col(const ConvGeometry& g, const T* input, T* columns) {
  const std::size_t out_pixels = g.out_pixels();
  for (std::size_t ch = 0; ch < g.channels; ++ch) {
    const T* plane = input + ch * g.height * g.width;
    for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
        T* col = columns + ((ch * g.kernel_h + ky) * g.kernel_w + kx) * out_pixels;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                    static_cast<std::ptrdiff_t>(g.pad);
          T* col_row = col + oy * g.out_w;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) {
            std::fill(col_row, col_row + g.out_w, T(0));
            continue;
          }
          const T* in_row = plane + static_cast<std::size_t>(iy) * g.width;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                      static_cast<std::ptrdiff_t>(g.pad);
            col_row[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width))
                              ? T(0)
                              : in_row[static_cast<std::size_t>(ix)];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const ConvGeometry& g, const T* columns, T* grad) {
  const std::size_t out_pixels = g.out_pixels();
  for (std::size_t ch = 0; ch < g.channels; ++ch) {
    T* plane = grad + ch * g.height * g.width;
    for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
        const T* col = columns + ((ch * g.kernel_h + ky) * g.kernel_w + kx) * out_pixels;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                    static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
          T* row = plane + static_cast<std::size_t>(iy) * g.width;
          const T* col_row = col + oy * g.out_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                      static_cast<std::ptrdiff_t>(g.pad);
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.width)) {
              row[static_cast<std::size_t>(ix)] += col_row[ox];
            }
          }
        }
      }
    }
  }
}

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  T sum = T(0);
#pragma omp simd reduction(+ : sum)
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

#define SURGREC_INSTANTIATE(T)                                                              \
  template void gemm_nn<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*,  \
                           bool);                                                           \
  template void gemm_tn<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*,  \
                           bool);                                                           \
  template void gemm_nt<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*,  \
                           bool);                                                           \
  template void im2col<T>(const ConvGeometry&, const T*, T*);                               \
  template void col2im<T>(const ConvGeometry&, const T*, T*);                               \
  template T dot<T>(const T*, const T*, std::size_t);

SURGREC_INSTANTIATE(float)
SURGREC_INSTANTIATE(double)
#undef SURGREC_INSTANTIATE

}  // namespace surgrec::kernels
