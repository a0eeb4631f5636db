#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "surgrec/errors.hpp"
#include "surgrec/image.hpp"
#include "surgrec/random.hpp"

using namespace surgrec;
namespace fs = std::filesystem;

namespace {

Image random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  Image img(h, w, 3);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.uniform_index(256));
  return img;
}

}  // namespace

TEST(Resize, OwnSizeIsIdentity) {
  const auto img = random_image(13, 17, 1);
  EXPECT_EQ(resize(img, 13, 17), img);
}

TEST(Resize, ConstantStaysConstant) {
  Image img(10, 12, 3, 77);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{3, 5}, {10, 12}, {31, 7}, {64, 64}}) {
    for (auto p : resize(img, h, w).pixels) ASSERT_EQ(p, 77);
  }
}

TEST(Resize, HalvedRampStaysLinear) {
  // v(x) = 2x + 10 on 64 columns; half-pixel centres put output column j at
  // input 2j + 0.5, so the analytic value is 4j + 11.
  Image ramp(8, 64, 3);
  for (std::size_t y = 0; y < 8; ++y) {
    for (std::size_t x = 0; x < 64; ++x) {
      for (std::size_t c = 0; c < 3; ++c) ramp.at(y, x, c) = static_cast<std::uint8_t>(2 * x + 10);
    }
  }
  const auto half = resize(ramp, 4, 32);
  for (std::size_t y = 0; y < 4; ++y) {
    for (std::size_t j = 0; j < 32; ++j) EXPECT_LE(std::abs(half.at(y, j, 0) - (4.0 * j + 11.0)), 1.0) << j;
  }
}

TEST(Augment, FullSizeCropWithoutMirrorIsIdentity) {
  const auto rgb = random_image(9, 11, 2);
  const auto flow = random_image(9, 11, 3);
  const auto draw = center_crop(9, 11, 9, 11);
  EXPECT_EQ(apply_augment(rgb, draw, 9, 11, false), rgb);
  EXPECT_EQ(apply_augment(flow, draw, 9, 11, true), flow);
  const auto no_mirror = draw_augment(9, 11, 9, 11, 5, false);
  EXPECT_FALSE(no_mirror.mirror);
  EXPECT_EQ(apply_augment(rgb, no_mirror, 9, 11, false), rgb);
}

TEST(Augment, PairSharesCropAndMirror) {
  // Identical content in both members: outputs must agree pixel for pixel
  // in the channels the flow treatment leaves alone.
  const auto img = random_image(20, 24, 4);
  int mirrored = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto [a, b] = augment(img, img, 12, 14, seed);
    const auto draw = draw_augment(20, 24, 12, 14, seed);
    mirrored += draw.mirror;
    ASSERT_EQ(a.height, 12u);
    ASSERT_EQ(b.width, 14u);
    for (std::size_t y = 0; y < 12; ++y) {
      for (std::size_t x = 0; x < 14; ++x) {
        ASSERT_EQ(a.at(y, x, 1), b.at(y, x, 1));
        ASSERT_EQ(a.at(y, x, 2), b.at(y, x, 2));
        const std::size_t sx = draw.mirror ? draw.x0 + 13 - x : draw.x0 + x;
        ASSERT_EQ(a.at(y, x, 0), img.at(draw.y0 + y, sx, 0));
        const int expect_flow = draw.mirror ? std::clamp(256 - img.at(draw.y0 + y, sx, 0), 0, 255)
                                            : img.at(draw.y0 + y, sx, 0);
        ASSERT_EQ(b.at(y, x, 0), expect_flow);
      }
    }
  }
  EXPECT_GT(mirrored, 5);
  EXPECT_LT(mirrored, 35);
}

TEST(Augment, CropLargerThanImageThrows) {
  EXPECT_THROW(draw_augment(10, 10, 11, 5, 1), std::invalid_argument);
}

TEST(Png, RoundTrip) {
  const auto dir = fs::temp_directory_path() / "surgrec_png_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto img = random_image(7, 9, 6);
  write_png(img, dir / "a.png");
  EXPECT_EQ(read_png(dir / "a.png"), img);
  EXPECT_THROW(read_png(dir / "missing.png"), IoError);
}

TEST(ImageTensor, Normalisation) {
  Image img(1, 2, 3);
  img.pixels = {128, 0, 255, 192, 64, 128};
  const auto t = image_to_tensor<double>(img);
  EXPECT_EQ(t.shape(), (Shape{3, 1, 2}));
  const std::vector<double> expect = {0.0, 1.0, -2.0, -1.0, 127.0 / 64.0, 0.0};
  EXPECT_EQ(std::vector<double>(t.values().begin(), t.values().end()), expect);
}
