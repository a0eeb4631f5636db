#include "surgrec/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "kernels.hpp"
#include "surgrec/errors.hpp"

namespace surgrec::ops {
namespace {

template <typename T>
void require_same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

template <typename T>
void require_rank(const char* op, const Tensor<T>& a, std::size_t rank, const char* what) {
  if (a.rank() != rank) {
    throw DimensionError(std::string(op) + ": " + what + " must have rank " +
                         std::to_string(rank) + ", got " + shape_str(a.shape()));
  }
}

// Accumulates `delta` into `target` when it participates in differentiation.
template <typename T>
void push_grad(const Tensor<T>& target, std::span<const T> delta) {
  if (target.requires_grad()) target.accumulate_grad(delta);
}

}  // namespace

template <typename T>
Tensor<T> add(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("add", a, b);
  Tensor<T> out(a.shape());
  auto o = out.mutable_values();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] + bv[i];
  out.check_finite("add");
  if (tape.wants_grad({&a, &b})) {
    tape.record(out, [a, b, out]() mutable {
      push_grad(a, out.grad());
      push_grad(b, out.grad());
    });
  }
  return out;
}

template <typename T>
Tensor<T> mul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("mul", a, b);
  Tensor<T> out(a.shape());
  auto o = out.mutable_values();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] * bv[i];
  out.check_finite("mul");
  if (tape.wants_grad({&a, &b})) {
    tape.record(out, [a, b, out]() mutable {
      auto g = out.grad();
      if (a.requires_grad()) {
        std::vector<T> da(g.size());
        auto bv = b.values();
        for (std::size_t i = 0; i < g.size(); ++i) da[i] = g[i] * bv[i];
        a.accumulate_grad(da);
      }
      if (b.requires_grad()) {
        std::vector<T> db(g.size());
        auto av = a.values();
        for (std::size_t i = 0; i < g.size(); ++i) db[i] = g[i] * av[i];
        b.accumulate_grad(db);
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> scale(Tape<T>& tape, const Tensor<T>& a, T factor) {
  Tensor<T> out(a.shape());
  auto o = out.mutable_values();
  auto av = a.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] * factor;
  out.check_finite("scale");
  if (tape.wants_grad({&a})) {
    tape.record(out, [a, out, factor]() mutable {
      auto g = out.grad();
      std::vector<T> da(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) da[i] = g[i] * factor;
      a.accumulate_grad(da);
    });
  }
  return out;
}

template <typename T>
Tensor<T> sum(Tape<T>& tape, const Tensor<T>& a) {
  T total = T(0);
  for (T v : a.values()) total += v;
  Tensor<T> out = Tensor<T>::scalar(total);
  out.check_finite("sum");
  if (tape.wants_grad({&a})) {
    tape.record(out, [a, out]() mutable {
      std::vector<T> da(a.numel(), out.grad()[0]);
      a.accumulate_grad(da);
    });
  }
  return out;
}

template <typename T>
Tensor<T> matmul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  require_rank("matmul", a, 2, "left operand");
  require_rank("matmul", b, 2, "right operand");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner extents differ, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  Tensor<T> out(Shape{m, n});
  kernels::gemm_nn(m, n, k, a.values().data(), b.values().data(), out.mutable_values().data(),
                   false);
  out.check_finite("matmul");
  if (tape.wants_grad({&a, &b})) {
    tape.record(out, [a, b, out, m, n, k]() mutable {
      const T* g = out.grad().data();
      if (a.requires_grad()) {
        std::vector<T> da(m * k);
        kernels::gemm_nt(m, k, n, g, b.values().data(), da.data(), false);
        a.accumulate_grad(da);
      }
      if (b.requires_grad()) {
        std::vector<T> db(k * n);
        kernels::gemm_tn(k, n, m, a.values().data(), g, db.data(), false);
        b.accumulate_grad(db);
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> linear(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>& bias) {
  require_rank("linear", x, 1, "input");
  require_rank("linear", weight, 2, "weight");
  require_rank("linear", bias, 1, "bias");
  const std::size_t out_dim = weight.dim(0), in_dim = weight.dim(1);
  if (x.dim(0) != in_dim || bias.dim(0) != out_dim) {
    throw DimensionError("linear: weight " + shape_str(weight.shape()) + ", input " +
                         shape_str(x.shape()) + ", bias " + shape_str(bias.shape()));
  }
  Tensor<T> out(Shape{out_dim});
  auto o = out.mutable_values();
  const T* w = weight.values().data();
  const T* xv = x.values().data();
  auto bv = bias.values();
  for (std::size_t r = 0; r < out_dim; ++r) o[r] = kernels::dot(w + r * in_dim, xv, in_dim) + bv[r];
  out.check_finite("linear");
  if (tape.wants_grad({&x, &weight, &bias})) {
    tape.record(out, [x, weight, bias, out, out_dim, in_dim]() mutable {
      auto g = out.grad();
      if (x.requires_grad()) {
        std::vector<T> dx(in_dim, T(0));
        kernels::gemm_tn(1, in_dim, out_dim, g.data(), weight.values().data(), dx.data(), false);
        x.accumulate_grad(dx);
      }
      if (weight.requires_grad()) {
        std::vector<T> dw(out_dim * in_dim);
        kernels::gemm_nn(out_dim, in_dim, 1, g.data(), x.values().data(), dw.data(), false);
        weight.accumulate_grad(dw);
      }
      push_grad(bias, g);
    });
  }
  return out;
}

template <typename T>
Tensor<T> relu(Tape<T>& tape, const Tensor<T>& a) {
  Tensor<T> out(a.shape());
  auto o = out.mutable_values();
  auto av = a.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] > T(0) ? av[i] : T(0);
  out.check_finite("relu");
  if (tape.wants_grad({&a})) {
    tape.record(out, [a, out]() mutable {
      auto g = out.grad();
      auto av = a.values();
      std::vector<T> da(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) da[i] = av[i] > T(0) ? g[i] : T(0);
      a.accumulate_grad(da);
    });
  }
  return out;
}

template <typename T>
Tensor<T> sigmoid(Tape<T>& tape, const Tensor<T>& a) {
  Tensor<T> out(a.shape());
  auto o = out.mutable_values();
  auto av = a.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const T x = av[i];
    if (x >= T(0)) {
      o[i] = T(1) / (T(1) + std::exp(-x));
    } else {
      const T e = std::exp(x);
      o[i] = e / (T(1) + e);
    }
  }
  out.check_finite("sigmoid");
  if (tape.wants_grad({&a})) {
    tape.record(out, [a, out]() mutable {
      auto g = out.grad();
      auto y = out.values();
      std::vector<T> da(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) da[i] = g[i] * y[i] * (T(1) - y[i]);
      a.accumulate_grad(da);
    });
  }
  return out;
}

template <typename T>
Tensor<T> tanh(Tape<T>& tape, const Tensor<T>& a) {
  Tensor<T> out(a.shape());
  auto o = out.mutable_values();
  auto av = a.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::tanh(av[i]);
  out.check_finite("tanh");
  if (tape.wants_grad({&a})) {
    tape.record(out, [a, out]() mutable {
      auto g = out.grad();
      auto y = out.values();
      std::vector<T> da(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) da[i] = g[i] * (T(1) - y[i] * y[i]);
      a.accumulate_grad(da);
    });
  }
  return out;
}

template <typename T>
Tensor<T> conv2d(Tape<T>& tape, const Tensor<T>& input, const Tensor<T>& filters,
                 const Tensor<T>& bias, std::size_t stride, std::size_t pad) {
  require_rank("conv2d", input, 3, "input");
  require_rank("conv2d", filters, 4, "filters");
  require_rank("conv2d", bias, 1, "bias");
  if (stride == 0) throw std::invalid_argument("conv2d: stride must be positive");
  const std::size_t c_in = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::size_t c_out = filters.dim(0), kh = filters.dim(2), kw = filters.dim(3);
  if (filters.dim(1) != c_in) {
    throw DimensionError("conv2d: filters " + shape_str(filters.shape()) +
                         " do not match input " + shape_str(input.shape()));
  }
  if (bias.dim(0) != c_out) {
    throw DimensionError("conv2d: bias " + shape_str(bias.shape()) + " for " +
                         std::to_string(c_out) + " output channels");
  }
  if (h + 2 * pad < kh || w + 2 * pad < kw) {
    throw DimensionError("conv2d: kernel " + shape_str(filters.shape()) +
                         " larger than padded input " + shape_str(input.shape()) + " (pad " +
                         std::to_string(pad) + ")");
  }
  kernels::ConvGeometry geom{c_in, h, w, kh, kw, stride, pad,
                             (h + 2 * pad - kh) / stride + 1, (w + 2 * pad - kw) / stride + 1};
  const std::size_t patch = geom.patch_size();
  const std::size_t pixels = geom.out_pixels();

  auto columns = std::make_shared<std::vector<T>>(patch * pixels);
  kernels::im2col(geom, input.values().data(), columns->data());

  Tensor<T> out(Shape{c_out, geom.out_h, geom.out_w});
  T* o = out.mutable_values().data();
  auto bv = bias.values();
  for (std::size_t oc = 0; oc < c_out; ++oc) std::fill(o + oc * pixels, o + (oc + 1) * pixels, bv[oc]);
  kernels::gemm_nn(c_out, pixels, patch, filters.values().data(), columns->data(), o, true);
  out.check_finite("conv2d");

  if (tape.wants_grad({&input, &filters, &bias})) {
    tape.record(out, [input, filters, bias, out, geom, columns, c_out]() mutable {
      const std::size_t patch = geom.patch_size();
      const std::size_t pixels = geom.out_pixels();
      const T* g = out.grad().data();
      if (bias.requires_grad()) {
        std::vector<T> db(c_out, T(0));
        for (std::size_t oc = 0; oc < c_out; ++oc) {
          T acc = T(0);
          for (std::size_t p = 0; p < pixels; ++p) acc += g[oc * pixels + p];
          db[oc] = acc;
        }
        bias.accumulate_grad(db);
      }
      if (filters.requires_grad()) {
        std::vector<T> dk(c_out * patch);
        kernels::gemm_nt(c_out, patch, pixels, g, columns->data(), dk.data(), false);
        filters.accumulate_grad(dk);
      }
      if (input.requires_grad()) {
        std::vector<T> dcol(patch * pixels);
        kernels::gemm_tn(patch, pixels, c_out, filters.values().data(), g, dcol.data(), false);
        std::vector<T> dx(input.numel(), T(0));
        kernels::col2im(geom, dcol.data(), dx.data());
        input.accumulate_grad(dx);
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> max_pool2d(Tape<T>& tape, const Tensor<T>& input, std::size_t window,
                     std::size_t stride) {
  require_rank("max_pool2d", input, 3, "input");
  if (stride == 0 || window == 0) throw std::invalid_argument("max_pool2d: window and stride must be positive");
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (window > h || window > w) {
    throw DimensionError("max_pool2d: window " + std::to_string(window) + " larger than input " +
                         shape_str(input.shape()));
  }
  const std::size_t oh = (h - window) / stride + 1, ow = (w - window) / stride + 1;
  Tensor<T> out(Shape{c, oh, ow});
  auto o = out.mutable_values();
  auto in = input.values();
  auto argmax = std::make_shared<std::vector<std::size_t>>(c * oh * ow);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = ch * h * w + (oy * stride) * w + ox * stride;
        for (std::size_t ky = 0; ky < window; ++ky) {
          for (std::size_t kx = 0; kx < window; ++kx) {
            const std::size_t idx = ch * h * w + (oy * stride + ky) * w + (ox * stride + kx);
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t oidx = (ch * oh + oy) * ow + ox;
        o[oidx] = in[best];
        (*argmax)[oidx] = best;
      }
    }
  }
  out.check_finite("max_pool2d");
  if (tape.wants_grad({&input})) {
    tape.record(out, [input, out, argmax]() mutable {
      auto g = out.grad();
      std::vector<T> dx(input.numel(), T(0));
      for (std::size_t i = 0; i < g.size(); ++i) dx[(*argmax)[i]] += g[i];
      input.accumulate_grad(dx);
    });
  }
  return out;
}

template <typename T>
Tensor<T> concat(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() == 0 || a.rank() != b.rank() ||
      !std::equal(a.shape().begin() + 1, a.shape().end(), b.shape().begin() + 1)) {
    throw DimensionError("concat: trailing extents differ, " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
  Shape shape = a.shape();
  shape[0] += b.dim(0);
  std::vector<T> values;
  values.reserve(a.numel() + b.numel());
  values.insert(values.end(), a.values().begin(), a.values().end());
  values.insert(values.end(), b.values().begin(), b.values().end());
  Tensor<T> out(std::move(shape), std::move(values));
  if (tape.wants_grad({&a, &b})) {
    tape.record(out, [a, b, out]() mutable {
      auto g = out.grad();
      push_grad(a, g.subspan(0, a.numel()));
      push_grad(b, g.subspan(a.numel(), b.numel()));
    });
  }
  return out;
}

template <typename T>
Tensor<T> concat_channels(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  require_rank("concat_channels", a, 3, "first operand");
  require_rank("concat_channels", b, 3, "second operand");
  if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
    throw DimensionError("concat_channels: spatial extents differ, " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  }
  return concat(tape, a, b);
}

template <typename T>
Tensor<T> slice(Tape<T>& tape, const Tensor<T>& a, std::size_t offset, std::size_t length) {
  require_rank("slice", a, 1, "input");
  if (offset + length > a.numel()) {
    throw DimensionError("slice: range [" + std::to_string(offset) + ", " +
                         std::to_string(offset + length) + ") outside " + shape_str(a.shape()));
  }
  auto av = a.values();
  Tensor<T> out(Shape{length}, std::vector<T>(av.begin() + offset, av.begin() + offset + length));
  if (tape.wants_grad({&a})) {
    tape.record(out, [a, out, offset]() mutable {
      auto g = out.grad();
      std::vector<T> da(a.numel(), T(0));
      std::copy(g.begin(), g.end(), da.begin() + offset);
      a.accumulate_grad(da);
    });
  }
  return out;
}

template <typename T>
Tensor<T> reshape(Tape<T>& tape, const Tensor<T>& a, Shape shape) {
  Tensor<T> out = a.reshaped(std::move(shape));
  if (tape.wants_grad({&a})) {
    tape.record(out, [a, out]() mutable { a.accumulate_grad(out.grad()); });
  }
  return out;
}

template <typename T>
SoftmaxCrossEntropy<T> softmax_cross_entropy(Tape<T>& tape, const Tensor<T>& logits,
                                             std::size_t target) {
  require_rank("softmax_cross_entropy", logits, 1, "logits");
  const std::size_t classes = logits.numel();
  if (target >= classes) {
    throw std::out_of_range("softmax_cross_entropy: target " + std::to_string(target) +
                            " outside [0, " + std::to_string(classes) + ")");
  }
  logits.check_finite("softmax_cross_entropy input");
  auto z = logits.values();
  const T peak = *std::max_element(z.begin(), z.end());
  T denom = T(0);
  std::vector<T> probs(classes);
  for (std::size_t i = 0; i < classes; ++i) {
    probs[i] = std::exp(z[i] - peak);
    denom += probs[i];
  }
  for (T& p : probs) p /= denom;
  const T loss_value = std::log(denom) - (z[target] - peak);

  SoftmaxCrossEntropy<T> result{Tensor<T>::scalar(loss_value), Tensor<T>(Shape{classes}, probs)};
  result.loss.check_finite("softmax_cross_entropy");
  if (tape.wants_grad({&logits})) {
    Tensor<T> loss = result.loss;
    Tensor<T> p = result.probs;
    tape.record(loss, [logits, loss, p, target]() mutable {
      const T g = loss.grad()[0];
      auto pv = p.values();
      std::vector<T> dz(pv.size());
      for (std::size_t i = 0; i < pv.size(); ++i) dz[i] = g * (pv[i] - (i == target ? T(1) : T(0)));
      logits.accumulate_grad(dz);
    });
  }
  return result;
}

template <typename T>
std::vector<double> softmax(std::span<const T> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double peak = static_cast<double>(*std::max_element(logits.begin(), logits.end()));
  double denom = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(static_cast<double>(logits[i]) - peak);
    denom += out[i];
  }
  for (double& p : out) p /= denom;
  return out;
}

#define SURGREC_INSTANTIATE(T)                                                                   \
  template Tensor<T> add<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                     \
  template Tensor<T> mul<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                     \
  template Tensor<T> scale<T>(Tape<T>&, const Tensor<T>&, T);                                  \
  template Tensor<T> sum<T>(Tape<T>&, const Tensor<T>&);                                       \
  template Tensor<T> matmul<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                  \
  template Tensor<T> linear<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&); \
  template Tensor<T> relu<T>(Tape<T>&, const Tensor<T>&);                                      \
  template Tensor<T> sigmoid<T>(Tape<T>&, const Tensor<T>&);                                   \
  template Tensor<T> tanh<T>(Tape<T>&, const Tensor<T>&);                                      \
  template Tensor<T> conv2d<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
                               std::size_t, std::size_t);                                      \
  template Tensor<T> max_pool2d<T>(Tape<T>&, const Tensor<T>&, std::size_t, std::size_t);      \
  template Tensor<T> concat<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                  \
  template Tensor<T> concat_channels<T>(Tape<T>&, const Tensor<T>&, const Tensor<T>&);         \
  template Tensor<T> slice<T>(Tape<T>&, const Tensor<T>&, std::size_t, std::size_t);           \
  template Tensor<T> reshape<T>(Tape<T>&, const Tensor<T>&, Shape);                            \
  template SoftmaxCrossEntropy<T> softmax_cross_entropy<T>(Tape<T>&, const Tensor<T>&,         \
                                                           std::size_t);                       \
  template std::vector<double> softmax<T>(std::span<const T>);

SURGREC_INSTANTIATE(float)
SURGREC_INSTANTIATE(double)
#undef SURGREC_INSTANTIATE

}  // namespace surgrec::ops
