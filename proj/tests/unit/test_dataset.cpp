#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "surgrec/dataset.hpp"
#include "surgrec/errors.hpp"
#include "textures.hpp"

using namespace surgrec;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("surgrec_ds_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 120 source frames at 30 fps of a texture drifting one pixel per frame.
void write_raw_video(const fs::path& trial, const std::string& transcript) {
  fs::create_directories(trial / "frames");
  const std::size_t h = 24, w = 32;
  const auto base = testing_support::texture(h, w, 3);
  for (std::size_t f = 0; f < 120; ++f) {
    const auto moved = testing_support::translate(base, h, w, static_cast<int>(f), 0);
    Image img(h, w, 3);
    for (std::size_t i = 0; i < h * w; ++i) {
      const auto v = static_cast<std::uint8_t>(std::clamp(moved[i], 0.0, 255.0));
      img.pixels[3 * i] = v;
      img.pixels[3 * i + 1] = static_cast<std::uint8_t>(255 - v);
      img.pixels[3 * i + 2] = 100;
    }
    write_png(img, trial / "frames" / frame_filename(f));
  }
  std::ofstream(trial / "transcript.txt") << transcript;
}

PreprocessConfig small_config() {
  PreprocessConfig c;
  c.extract_height = 24;
  c.extract_width = 32;
  return c;
}

std::map<std::string, std::string> archive_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

}  // namespace

TEST(Preprocess, TinyRawTreeProducesPairedSegments) {
  const auto raw = scratch("raw");
  // 30..90 is 2 s -> 16 samples; G7 skipped; 100..110 gives 3 samples, dropped.
  write_raw_video(raw / "Suturing" / "trial_a", "30 90 G3\n92 98 G7\n100 110 G5\n");
  write_raw_video(raw / "Knot_Tying" / "trial_b", "0 64 G12\n");
  const auto out = scratch("out");
  const auto report = preprocess_dataset(raw, out, small_config());
  EXPECT_EQ(report.videos, 2u);
  EXPECT_EQ(report.segments, 2u);
  EXPECT_EQ(report.dropped_g7, 1u);
  EXPECT_EQ(report.dropped_short, 1u);

  const auto ids = list_segments(out);
  ASSERT_EQ(ids.size(), 2u);
  for (const auto& id : ids) {
    EXPECT_TRUE(fs::exists(processed_dir(out) / id / "labels.json"));
    EXPECT_TRUE(fs::exists(processed_dir(out) / id / "rgb" / "frame_000000.png"));
    EXPECT_TRUE(fs::exists(processed_dir(out) / id / "flow" / "frame_000000.png"));
    const auto seg = read_segment(out, id);
    EXPECT_NO_THROW(seg.validate());
    EXPECT_EQ(seg.rgb.size(), seg.flow.size());
    EXPECT_GE(seg.length(), 8u);
  }
  const auto sut = read_segment(out, ids[1]);
  EXPECT_EQ(sut.task, 0u);
  EXPECT_EQ(sut.gesture, 2u);
  EXPECT_EQ(sut.length(), 16u);
  EXPECT_DOUBLE_EQ(sut.start_time, 1.0);
  EXPECT_DOUBLE_EQ(sut.end_time, 3.0);
  // Content drifts right by about 3.75 px between 8 fps samples: red channel above neutral.
  double mean_r = 0.0;
  for (auto p = sut.flow[3].pixels.begin(); p < sut.flow[3].pixels.end(); p += 3) mean_r += *p;
  EXPECT_GT(mean_r / (24.0 * 32.0), 160.0);
  const auto knot = read_segment(out, ids[0]);
  EXPECT_EQ(knot.task, 2u);
  EXPECT_EQ(knot.gesture, 10u);
}

TEST(Preprocess, ParallelAndSerialArchivesAreIdentical) {
  const auto raw = scratch("raw2");
  write_raw_video(raw / "Suturing" / "t1", "0 40 G1\n40 100 G2\n");
  write_raw_video(raw / "Needle_Passing" / "t2", "10 70 G4\n");
  const auto a = scratch("serial"), b = scratch("parallel");
  preprocess_dataset(raw, a, small_config(), 1);
  preprocess_dataset(raw, b, small_config(), 3);
  EXPECT_EQ(archive_bytes(a), archive_bytes(b));
}

TEST(Preprocess, MissingFramesIsAnError) {
  const auto raw = scratch("raw3");
  fs::create_directories(raw / "Suturing" / "t1" / "frames");
  std::ofstream(raw / "Suturing" / "t1" / "transcript.txt") << "0 10 G1\n";
  EXPECT_THROW(preprocess_dataset(raw, scratch("out3"), small_config()), IoError);
}

TEST(Segments, WriteReadRoundTripAndResize) {
  VideoSegment seg;
  seg.id = "x_001";
  seg.gesture = 5;
  seg.task = 1;
  seg.source = "synthetic";
  seg.start_time = 0.5;
  seg.end_time = 1.5;
  for (int k = 0; k < 3; ++k) {
    seg.rgb.emplace_back(6, 8, 3, static_cast<std::uint8_t>(10 * k));
    seg.flow.emplace_back(6, 8, 3, 128);
  }
  const auto root = scratch("seg");
  write_segment(seg, root);
  const auto back = read_segment(root, "x_001");
  EXPECT_EQ(back.rgb, seg.rgb);
  EXPECT_EQ(back.flow, seg.flow);
  EXPECT_EQ(back.gesture, 5u);
  EXPECT_EQ(back.source, "synthetic");
  const auto small = resized(seg, 3, 4);
  EXPECT_EQ(small.rgb.size(), small.flow.size());
  EXPECT_EQ(small.rgb[0].height, 3u);
  EXPECT_EQ(small.flow[2].width, 4u);
  EXPECT_THROW(read_segment(root, "nope"), IoError);

  auto broken = seg;
  broken.flow.pop_back();
  EXPECT_THROW(broken.validate(), std::exception);
  broken = seg;
  broken.gesture = 14;
  EXPECT_THROW(broken.validate(), std::exception);
}

TEST(FlowFrames, OnePerFrameWithSuccessorRule) {
  std::vector<Image> frames;
  const auto base = testing_support::texture(16, 16, 2);
  for (int k = 0; k < 3; ++k) {
    const auto moved = testing_support::translate(base, 16, 16, k, 0);
    Image img(16, 16, 3);
    for (std::size_t i = 0; i < 256; ++i) {
      img.pixels[3 * i] = img.pixels[3 * i + 1] = img.pixels[3 * i + 2] = static_cast<std::uint8_t>(moved[i]);
    }
    frames.push_back(img);
  }
  const auto out = flow_frames(frames, nullptr, FlowParams{}, 8.0);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[2], out[1]);
  const auto single = flow_frames({frames[0]}, nullptr, FlowParams{}, 8.0);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].at(0, 0, 0), 128);
  EXPECT_EQ(single[0].at(0, 0, 2), 0);
}
