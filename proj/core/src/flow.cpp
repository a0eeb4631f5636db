#include "surgrec/flow.hpp"

#include <algorithm>
#include <cmath>

#include "surgrec/errors.hpp"

namespace surgrec {

namespace {

struct Plane {
  std::size_t h = 0, w = 0;
  std::vector<double> v;

  Plane() = default;
  Plane(std::size_t h_, std::size_t w_, double fill = 0.0) : h(h_), w(w_), v(h_ * w_, fill) {}
  double& at(std::size_t y, std::size_t x) { return v[y * w + x]; }
  double at(std::size_t y, std::size_t x) const { return v[y * w + x]; }
  // replicate border
  double clamped(long y, long x) const {
    y = std::clamp(y, 0L, static_cast<long>(h) - 1);
    x = std::clamp(x, 0L, static_cast<long>(w) - 1);
    return v[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
  }
  double bilinear(double y, double x) const {
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    const auto y0 = static_cast<std::size_t>(y);
    const auto x0 = static_cast<std::size_t>(x);
    const std::size_t y1 = std::min(y0 + 1, h - 1);
    const std::size_t x1 = std::min(x0 + 1, w - 1);
    const double wy = y - static_cast<double>(y0);
    const double wx = x - static_cast<double>(x0);
    const double top = at(y0, x0) * (1.0 - wx) + at(y0, x1) * wx;
    const double bottom = at(y1, x0) * (1.0 - wx) + at(y1, x1) * wx;
    return top * (1.0 - wy) + bottom * wy;
  }
};

Plane blur(const Plane& in, double sigma) {
  if (sigma <= 0.0) return in;
  const auto radius = static_cast<long>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (long i = -radius; i <= radius; ++i) {
    k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += k[static_cast<std::size_t>(i + radius)];
  }
  for (double& x : k) x /= total;

  Plane tmp(in.h, in.w), out(in.h, in.w);
  for (std::size_t y = 0; y < in.h; ++y) {
    for (std::size_t x = 0; x < in.w; ++x) {
      double s = 0.0;
      for (long i = -radius; i <= radius; ++i) {
        s += k[static_cast<std::size_t>(i + radius)] * in.clamped(static_cast<long>(y), static_cast<long>(x) + i);
      }
      tmp.at(y, x) = s;
    }
  }
  for (std::size_t y = 0; y < in.h; ++y) {
    for (std::size_t x = 0; x < in.w; ++x) {
      double s = 0.0;
      for (long i = -radius; i <= radius; ++i) {
        s += k[static_cast<std::size_t>(i + radius)] * tmp.clamped(static_cast<long>(y) + i, static_cast<long>(x));
      }
      out.at(y, x) = s;
    }
  }
  return out;
}

// half-pixel centres, same convention as image resize
Plane resample(const Plane& in, std::size_t h, std::size_t w) {
  Plane out(h, w);
  const double sy = static_cast<double>(in.h) / static_cast<double>(h);
  const double sx = static_cast<double>(in.w) / static_cast<double>(w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      out.at(y, x) = in.bilinear((static_cast<double>(y) + 0.5) * sy - 0.5,
                                 (static_cast<double>(x) + 0.5) * sx - 0.5);
    }
  }
  return out;
}

Plane warp(const Plane& in, const Plane& u, const Plane& v) {
  Plane out(in.h, in.w);
  for (std::size_t y = 0; y < in.h; ++y) {
    for (std::size_t x = 0; x < in.w; ++x) {
      out.at(y, x) = in.bilinear(static_cast<double>(y) + v.at(y, x), static_cast<double>(x) + u.at(y, x));
    }
  }
  return out;
}

// Horn-Schunck neighbourhood average: 1/6 edge neighbours, 1/12 corners.
void hs_average(const Plane& p, Plane& out) {
  const std::size_t h = p.h, w = p.w;
  auto border = [&](std::size_t y, std::size_t x) {
    const auto yi = static_cast<long>(y), xi = static_cast<long>(x);
    const double edge = p.clamped(yi - 1, xi) + p.clamped(yi + 1, xi) + p.clamped(yi, xi - 1) +
                        p.clamped(yi, xi + 1);
    const double corner = p.clamped(yi - 1, xi - 1) + p.clamped(yi - 1, xi + 1) +
                          p.clamped(yi + 1, xi - 1) + p.clamped(yi + 1, xi + 1);
    out.at(y, x) = edge / 6.0 + corner / 12.0;
  };
  for (std::size_t x = 0; x < w; ++x) {
    border(0, x);
    if (h > 1) border(h - 1, x);
  }
  for (std::size_t y = 1; y + 1 < h; ++y) {
    border(y, 0);
    if (w > 1) border(y, w - 1);
    const double* up = &p.v[(y - 1) * w];
    const double* mid = &p.v[y * w];
    const double* down = &p.v[(y + 1) * w];
    double* o = &out.v[y * w];
    for (std::size_t x = 1; x + 1 < w; ++x) {
      const double edge = up[x] + down[x] + mid[x - 1] + mid[x + 1];
      const double corner = up[x - 1] + up[x + 1] + down[x - 1] + down[x + 1];
      o[x] = edge / 6.0 + corner / 12.0;
    }
  }
}

void refine(const Plane& a, const Plane& b, Plane& u, Plane& v, const FlowParams& params) {
  const double alpha2 = params.alpha * params.alpha;
  for (std::size_t k = 0; k < params.warps; ++k) {
    const Plane bw = warp(b, u, v);
    Plane ix(a.h, a.w), iy(a.h, a.w), it(a.h, a.w);
    for (std::size_t y = 0; y < a.h; ++y) {
      const auto yi = static_cast<long>(y);
      for (std::size_t x = 0; x < a.w; ++x) {
        const auto xi = static_cast<long>(x);
        ix.at(y, x) = 0.25 * (a.clamped(yi, xi + 1) - a.clamped(yi, xi - 1) + bw.clamped(yi, xi + 1) -
                              bw.clamped(yi, xi - 1));
        iy.at(y, x) = 0.25 * (a.clamped(yi + 1, xi) - a.clamped(yi - 1, xi) + bw.clamped(yi + 1, xi) -
                              bw.clamped(yi - 1, xi));
        it.at(y, x) = bw.at(y, x) - a.at(y, x);
      }
    }
    const Plane u0 = u, v0 = v;
    Plane ub(u.h, u.w), vb(v.h, v.w), inv(u.h, u.w);
    for (std::size_t i = 0; i < inv.v.size(); ++i) {
      inv.v[i] = 1.0 / (alpha2 + ix.v[i] * ix.v[i] + iy.v[i] * iy.v[i]);
    }
    for (std::size_t iter = 0; iter < params.iterations; ++iter) {
      hs_average(u, ub);
      hs_average(v, vb);
      for (std::size_t i = 0; i < u.v.size(); ++i) {
        const double gx = ix.v[i], gy = iy.v[i];
        const double r = gx * (ub.v[i] - u0.v[i]) + gy * (vb.v[i] - v0.v[i]) + it.v[i];
        const double q = r * inv.v[i];
        u.v[i] = ub.v[i] - gx * q;
        v.v[i] = vb.v[i] - gy * q;
      }
    }
  }
}

}  // namespace

FlowField compute_flow(const std::vector<double>& gray_t, const std::vector<double>& gray_t1,
                       std::size_t height, std::size_t width, const FlowParams& params) {
  if (gray_t.size() != height * width || gray_t1.size() != height * width) {
    throw DimensionError("compute_flow: plane size does not match " + std::to_string(height) + "x" +
                         std::to_string(width));
  }
  if (height == 0 || width == 0) return FlowField(height, width);

  std::vector<Plane> pa, pb;
  Plane a(height, width), b(height, width);
  a.v = gray_t;
  b.v = gray_t1;
  pa.push_back(blur(a, params.presmooth_sigma));
  pb.push_back(blur(b, params.presmooth_sigma));
  const std::size_t levels = std::max<std::size_t>(params.levels, 1);
  while (pa.size() < levels && std::min(pa.back().h, pa.back().w) >= 16) {
    const std::size_t h = (pa.back().h + 1) / 2, w = (pa.back().w + 1) / 2;
    pa.push_back(resample(blur(pa.back(), 1.0), h, w));
    pb.push_back(resample(blur(pb.back(), 1.0), h, w));
  }

  Plane u(pa.back().h, pa.back().w), v(pa.back().h, pa.back().w);
  for (std::size_t l = pa.size(); l-- > 0;) {
    const Plane& la = pa[l];
    if (u.h != la.h || u.w != la.w) {
      const double sy = static_cast<double>(la.h) / static_cast<double>(u.h);
      const double sx = static_cast<double>(la.w) / static_cast<double>(u.w);
      u = resample(u, la.h, la.w);
      v = resample(v, la.h, la.w);
      for (double& x : u.v) x *= sx;
      for (double& x : v.v) x *= sy;
    }
    refine(la, pb[l], u, v, params);
  }

  FlowField flow(height, width);
  flow.u = std::move(u.v);
  flow.v = std::move(v.v);
  for (std::size_t i = 0; i < flow.u.size(); ++i) {
    if (!std::isfinite(flow.u[i]) || !std::isfinite(flow.v[i])) {
      throw NumericError("compute_flow produced a non-finite displacement");
    }
  }
  return flow;
}

FlowField compute_flow(const Image& frame_t, const Image& frame_t1, const FlowParams& params) {
  if (frame_t.height != frame_t1.height || frame_t.width != frame_t1.width) {
    throw DimensionError("compute_flow: frames are " + std::to_string(frame_t.height) + "x" +
                         std::to_string(frame_t.width) + " and " + std::to_string(frame_t1.height) +
                         "x" + std::to_string(frame_t1.width));
  }
  return compute_flow(grayscale(frame_t), grayscale(frame_t1), frame_t.height, frame_t.width, params);
}

Image encode_flow_rgb(const FlowField& flow, double clip_mag) {
  if (!(clip_mag > 0.0)) throw std::invalid_argument("encode_flow_rgb: clip_mag must be positive");
  Image out(flow.height, flow.width, 3);
  for (std::size_t i = 0; i < flow.u.size(); ++i) {
    const double su = std::clamp(flow.u[i] / clip_mag, -1.0, 1.0);
    const double sv = std::clamp(flow.v[i] / clip_mag, -1.0, 1.0);
    const double m = std::clamp(std::hypot(flow.u[i], flow.v[i]) / clip_mag, 0.0, 1.0);
    out.pixels[3 * i] = static_cast<std::uint8_t>(128 + std::lround(127.0 * su));
    out.pixels[3 * i + 1] = static_cast<std::uint8_t>(128 + std::lround(127.0 * sv));
    out.pixels[3 * i + 2] = static_cast<std::uint8_t>(std::lround(255.0 * m));
  }
  return out;
}

FlowField decode_flow_rgb(const Image& image, double clip_mag) {
  if (image.channels < 2) throw DimensionError("decode_flow_rgb: need at least 2 channels");
  FlowField flow(image.height, image.width);
  for (std::size_t i = 0; i < flow.u.size(); ++i) {
    flow.u[i] = (image.pixels[i * image.channels] - 128.0) / 127.0 * clip_mag;
    flow.v[i] = (image.pixels[i * image.channels + 1] - 128.0) / 127.0 * clip_mag;
  }
  return flow;
}

}  // namespace surgrec
