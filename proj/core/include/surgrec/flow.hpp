#pragma once

#include <cstddef>
#include <vector>

#include "surgrec/image.hpp"

namespace surgrec {

// Dense displacement from frame t to frame t+1 in pixels. u points right
// (+x), v points down (+y).
struct FlowField {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> u;
  std::vector<double> v;

  FlowField() = default;
  FlowField(std::size_t h, std::size_t w) : height(h), width(w), u(h * w, 0.0), v(h * w, 0.0) {}
};

// Horn-Schunck run coarse to fine with warping at every level.
struct FlowParams {
  double alpha = 15.0;
  std::size_t iterations = 100;  // Jacobi sweeps per warp
  std::size_t levels = 3;        // pyramid levels, 1 = single scale
  std::size_t warps = 2;         // linearisations per level
  double presmooth_sigma = 1.0;  // 0 disables

  bool operator==(const FlowParams&) const = default;
};

FlowField compute_flow(const Image& frame_t, const Image& frame_t1, const FlowParams& params = {});

// Same solver on luma planes (row-major, values in [0, 255]).
FlowField compute_flow(const std::vector<double>& gray_t, const std::vector<double>& gray_t1,
                       std::size_t height, std::size_t width, const FlowParams& params = {});

// channel 0: 128 + round(127 * clamp(u / clip_mag, -1, 1)), channel 1 the same for v,
// channel 2: round(255 * clamp(|(u, v)| / clip_mag, 0, 1)).
Image encode_flow_rgb(const FlowField& flow, double clip_mag);

// Inverse of the signed channels; magnitude is ignored.
FlowField decode_flow_rgb(const Image& image, double clip_mag);

}  // namespace surgrec
