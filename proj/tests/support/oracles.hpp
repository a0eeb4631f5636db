#pragma once

// Reference implementations written as plain loops over std::vector<double>.
// They share no code with the library kernels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace oracle {

// a [m x k], b [k x n]
inline std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b, std::size_t m,
                                  std::size_t k, std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] = s;
    }
  }
  return c;
}

struct ConvShape {
  std::size_t cin, h, w, cout, kh, kw, stride, pad;
  std::size_t oh() const { return (h + 2 * pad - kh) / stride + 1; }
  std::size_t ow() const { return (w + 2 * pad - kw) / stride + 1; }
};

inline std::vector<double> conv2d(const std::vector<double>& x, const std::vector<double>& k,
                                  const std::vector<double>& bias, const ConvShape& s) {
  std::vector<double> y(s.cout * s.oh() * s.ow());
  for (std::size_t o = 0; o < s.cout; ++o) {
    for (std::size_t i = 0; i < s.oh(); ++i) {
      for (std::size_t j = 0; j < s.ow(); ++j) {
        double acc = bias[o];
        for (std::size_t c = 0; c < s.cin; ++c) {
          for (std::size_t a = 0; a < s.kh; ++a) {
            for (std::size_t b = 0; b < s.kw; ++b) {
              const long yy = static_cast<long>(i * s.stride + a) - static_cast<long>(s.pad);
              const long xx = static_cast<long>(j * s.stride + b) - static_cast<long>(s.pad);
              if (yy < 0 || xx < 0 || yy >= static_cast<long>(s.h) || xx >= static_cast<long>(s.w)) continue;
              acc += x[(c * s.h + yy) * s.w + xx] * k[((o * s.cin + c) * s.kh + a) * s.kw + b];
            }
          }
        }
        y[(o * s.oh() + i) * s.ow() + j] = acc;
      }
    }
  }
  return y;
}

inline std::vector<double> max_pool(const std::vector<double>& x, std::size_t c, std::size_t h, std::size_t w,
                                    std::size_t win, std::size_t stride) {
  const std::size_t oh = (h - win) / stride + 1, ow = (w - win) / stride + 1;
  std::vector<double> y(c * oh * ow);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < win; ++a) {
          for (std::size_t b = 0; b < win; ++b) {
            m = std::max(m, x[(ch * h + i * stride + a) * w + j * stride + b]);
          }
        }
        y[(ch * oh + i) * ow + j] = m;
      }
    }
  }
  return y;
}

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

struct LstmState {
  std::vector<double> h, c;
};

// weight [4H x (in + H)], gate blocks i, f, o, g.
inline LstmState lstm_step(const std::vector<double>& x, const LstmState& s, const std::vector<double>& weight,
                           const std::vector<double>& bias, std::size_t hidden, int marker) {
  const std::size_t in = x.size();
  std::vector<double> h = marker == 0 ? std::vector<double>(hidden, 0.0) : s.h;
  std::vector<double> c = marker == 0 ? std::vector<double>(hidden, 0.0) : s.c;
  std::vector<double> z(4 * hidden);
  for (std::size_t r = 0; r < 4 * hidden; ++r) {
    double acc = bias[r];
    for (std::size_t j = 0; j < in; ++j) acc += weight[r * (in + hidden) + j] * x[j];
    for (std::size_t j = 0; j < hidden; ++j) acc += weight[r * (in + hidden) + in + j] * h[j];
    z[r] = acc;
  }
  LstmState out{std::vector<double>(hidden), std::vector<double>(hidden)};
  for (std::size_t j = 0; j < hidden; ++j) {
    const double ig = sigmoid(z[j]);
    const double fg = sigmoid(z[hidden + j]);
    const double og = sigmoid(z[2 * hidden + j]);
    const double g = std::tanh(z[3 * hidden + j]);
    out.c[j] = fg * c[j] + ig * g;
    out.h[j] = og * std::tanh(out.c[j]);
  }
  return out;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Integer displacement per pixel minimising the SSD of a (2r+1)^2 patch,
// searched over [-range, range]^2 with wrap-around indexing.
struct BlockMatch {
  std::vector<int> u, v;
};

inline BlockMatch block_match(const std::vector<double>& a, const std::vector<double>& b, std::size_t h,
                              std::size_t w, int range, int r) {
  BlockMatch out{std::vector<int>(h * w), std::vector<int>(h * w)};
  auto at = [&](const std::vector<double>& img, long y, long x) {
    const long hh = static_cast<long>(h), ww = static_cast<long>(w);
    return img[static_cast<std::size_t>(((y % hh + hh) % hh) * ww + ((x % ww + ww) % ww))];
  };
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (int dy = -range; dy <= range; ++dy) {
        for (int dx = -range; dx <= range; ++dx) {
          double ssd = 0.0;
          for (int py = -r; py <= r; ++py) {
            for (int px = -r; px <= r; ++px) {
              const long yy = static_cast<long>(y) + py, xx = static_cast<long>(x) + px;
              const double d = at(a, yy, xx) - at(b, yy + dy, xx + dx);
              ssd += d * d;
            }
          }
          if (ssd < best) {
            best = ssd;
            out.u[y * w + x] = dx;
            out.v[y * w + x] = dy;
          }
        }
      }
    }
  }
  return out;
}

template <typename V>
double median(V values) {
  std::nth_element(values.begin(), values.begin() + values.size() / 2, values.end());
  return static_cast<double>(values[values.size() / 2]);
}

}  // namespace oracle
