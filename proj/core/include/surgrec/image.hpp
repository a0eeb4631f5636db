#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "surgrec/tensor.hpp"

namespace surgrec {

// 8-bit interleaved image, row-major H x W x C.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 3;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(std::size_t h, std::size_t w, std::size_t c, std::uint8_t fill = 0)
      : height(h), width(w), channels(c), pixels(h * w * c, fill) {}

  std::uint8_t& at(std::size_t y, std::size_t x, std::size_t c) {
    return pixels[(y * width + x) * channels + c];
  }
  std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels[(y * width + x) * channels + c];
  }
  bool operator==(const Image&) const = default;
};

// 8-bit gray, RGB or RGBA PNG in; alpha is dropped, gray expands to 3 channels.
Image read_png(const std::filesystem::path& path);
void write_png(const Image& image, const std::filesystem::path& path);

// Bilinear with half-pixel centres and clamped borders.
Image resize(const Image& image, std::size_t height, std::size_t width);

// Luma in [0, 255].
std::vector<double> grayscale(const Image& image);

// Crop offset and mirror decision shared by both members of a frame pair.
struct AugmentDraw {
  std::size_t y0 = 0;
  std::size_t x0 = 0;
  bool mirror = false;
};

AugmentDraw draw_augment(std::size_t height, std::size_t width, std::size_t crop_height,
                         std::size_t crop_width, std::uint64_t seed, bool allow_mirror = true);
AugmentDraw center_crop(std::size_t height, std::size_t width, std::size_t crop_height,
                        std::size_t crop_width);

// Mirroring a flow-RGB image also negates horizontal displacement, which the
// encoding stores in channel 0 around the neutral value 128.
Image apply_augment(const Image& image, const AugmentDraw& draw, std::size_t crop_height,
                    std::size_t crop_width, bool is_flow);

std::pair<Image, Image> augment(const Image& rgb, const Image& flow_rgb, std::size_t crop_height,
                                std::size_t crop_width, std::uint64_t seed);

// [C x H x W] with (v - 128) / 64, so the neutral flow value maps to 0.
template <typename T>
Tensor<T> image_to_tensor(const Image& image);

}  // namespace surgrec
