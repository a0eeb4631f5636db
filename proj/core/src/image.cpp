#include "surgrec/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "surgrec/errors.hpp"
#include "surgrec/random.hpp"

namespace surgrec {

Image read_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw IoError("cannot read PNG '" + path.string() + "': " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  Image image(png.height, png.width, 3);
  if (!png_image_finish_read(&png, nullptr, image.pixels.data(), 0, nullptr)) {
    std::string message = png.message;
    png_image_free(&png);
    throw IoError("cannot decode PNG '" + path.string() + "': " + message);
  }
  return image;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  if (image.channels != 1 && image.channels != 3) {
    throw IoError("write_png: unsupported channel count " + std::to_string(image.channels));
  }
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.pixels.data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path.string() + "': " + png.message);
  }
}

Image resize(const Image& image, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw std::invalid_argument("resize: zero target extent");
  if (height == image.height && width == image.width) return image;
  Image out(height, width, image.channels);
  const double sy = static_cast<double>(image.height) / static_cast<double>(height);
  const double sx = static_cast<double>(image.width) / static_cast<double>(width);
  const auto max_y = static_cast<double>(image.height - 1);
  const auto max_x = static_cast<double>(image.width - 1);

  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, max_x);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < image.channels; ++c) {
        const double top = image.at(y0, x0, c) * (1.0 - wx) + image.at(y0, x1, c) * wx;
        const double bottom = image.at(y1, x0, c) * (1.0 - wx) + image.at(y1, x1, c) * wx;
        const double v = top * (1.0 - wy) + bottom * wy;
        out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

std::vector<double> grayscale(const Image& image) {
  std::vector<double> gray(image.height * image.width);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const std::uint8_t* p = &image.pixels[i * image.channels];
    gray[i] = image.channels >= 3 ? 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2] : p[0];
  }
  return gray;
}

namespace {

void check_crop(std::size_t height, std::size_t width, std::size_t crop_height,
                std::size_t crop_width) {
  if (crop_height == 0 || crop_width == 0 || crop_height > height || crop_width > width) {
    throw DimensionError("crop " + std::to_string(crop_height) + "x" + std::to_string(crop_width) +
                         " does not fit image " + std::to_string(height) + "x" +
                         std::to_string(width));
  }
}

}  // namespace

AugmentDraw draw_augment(std::size_t height, std::size_t width, std::size_t crop_height,
                         std::size_t crop_width, std::uint64_t seed, bool allow_mirror) {
  check_crop(height, width, crop_height, crop_width);
  Rng rng(seed);
  AugmentDraw draw;
  draw.y0 = rng.uniform_index(height - crop_height + 1);
  draw.x0 = rng.uniform_index(width - crop_width + 1);
  draw.mirror = rng.coin() && allow_mirror;
  return draw;
}

AugmentDraw center_crop(std::size_t height, std::size_t width, std::size_t crop_height,
                        std::size_t crop_width) {
  check_crop(height, width, crop_height, crop_width);
  return AugmentDraw{(height - crop_height) / 2, (width - crop_width) / 2, false};
}

Image apply_augment(const Image& image, const AugmentDraw& draw, std::size_t crop_height,
                    std::size_t crop_width, bool is_flow) {
  check_crop(image.height, image.width, crop_height, crop_width);
  if (draw.y0 + crop_height > image.height || draw.x0 + crop_width > image.width) {
    throw DimensionError("crop offset outside image");
  }
  Image out(crop_height, crop_width, image.channels);
  for (std::size_t y = 0; y < crop_height; ++y) {
    for (std::size_t x = 0; x < crop_width; ++x) {
      const std::size_t sx = draw.x0 + (draw.mirror ? crop_width - 1 - x : x);
      for (std::size_t c = 0; c < image.channels; ++c) {
        std::uint8_t v = image.at(draw.y0 + y, sx, c);
        if (draw.mirror && is_flow && c == 0) v = static_cast<std::uint8_t>(std::min(256 - v, 255));
        out.at(y, x, c) = v;
      }
    }
  }
  return out;
}

std::pair<Image, Image> augment(const Image& rgb, const Image& flow_rgb, std::size_t crop_height,
                                std::size_t crop_width, std::uint64_t seed) {
  if (rgb.height != flow_rgb.height || rgb.width != flow_rgb.width) {
    throw DimensionError("augment: rgb and flow frames differ in size");
  }
  const auto draw = draw_augment(rgb.height, rgb.width, crop_height, crop_width, seed);
  return {apply_augment(rgb, draw, crop_height, crop_width, false),
          apply_augment(flow_rgb, draw, crop_height, crop_width, true)};
}

template <typename T>
Tensor<T> image_to_tensor(const Image& image) {
  const std::size_t plane = image.height * image.width;
  std::vector<T> values(plane * image.channels);
  for (std::size_t c = 0; c < image.channels; ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      values[c * plane + i] = (static_cast<T>(image.pixels[i * image.channels + c]) - T(128)) / T(64);
    }
  }
  return Tensor<T>(Shape{image.channels, image.height, image.width}, std::move(values));
}

template Tensor<float> image_to_tensor<float>(const Image&);
template Tensor<double> image_to_tensor<double>(const Image&);

}  // namespace surgrec
