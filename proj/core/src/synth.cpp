#include "surgrec/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "surgrec/errors.hpp"
#include "surgrec/parallel.hpp"
#include "surgrec/random.hpp"
#include "surgrec/transcript.hpp"

namespace surgrec {

namespace {

constexpr std::array<std::string_view, kGestureClasses> kPrograms = {
    "right",           "down",       "down-right",           "up-right",
    "left",            "up",         "down-left",            "up-left",
    "circle-cw",       "circle-ccw", "oscillate-horizontal", "oscillate-vertical",
    "fast-right",      "fast-down",
};

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("synth." + what); };
  if (tasks < 1 || tasks > kTaskClasses) fail("tasks must be in [1, 3]");
  if (gestures < 1 || gestures > kGestureClasses) fail("gestures must be in [1, 14]");
  if (segments < 1) fail("segments must be at least 1");
  if (height < 16 || width < 16) fail("height and width must be at least 16");
  if (min_length < 1 || max_length < min_length) fail("length range must satisfy 1 <= min_length <= max_length");
  if (!(speed > 0.0)) fail("speed must be positive");
  if (!(sprite_radius > 0.0)) fail("sprite_radius must be positive");
  if (noise < 0.0) fail("noise must be nonnegative");
  if (!(clip_mag > 0.0)) fail("clip_mag must be positive");
}

std::string_view motion_program_name(std::size_t gesture) {
  if (gesture >= kPrograms.size()) throw std::out_of_range("no motion program for gesture " + std::to_string(gesture));
  return kPrograms[gesture];
}

Offset motion_offset(std::size_t gesture, std::size_t k, double speed) {
  const double t = static_cast<double>(k);
  const double d = speed * t / std::numbers::sqrt2;
  const double radius = 6.0;
  const double w = speed / radius;
  const double amp = 1.5 * speed * 8.0 / (2.0 * std::numbers::pi);
  const double osc = amp * std::sin(2.0 * std::numbers::pi * t / 8.0);
  switch (gesture) {
    case 0: return {speed * t, 0.0};
    case 1: return {0.0, speed * t};
    case 2: return {d, d};
    case 3: return {d, -d};
    case 4: return {-speed * t, 0.0};
    case 5: return {0.0, -speed * t};
    case 6: return {-d, d};
    case 7: return {-d, -d};
    case 8: return {radius * (std::cos(w * t) - 1.0), radius * std::sin(w * t)};
    case 9: return {radius * (std::cos(w * t) - 1.0), -radius * std::sin(w * t)};
    case 10: return {osc, 0.0};
    case 11: return {0.0, osc};
    case 12: return {2.0 * speed * t, 0.0};
    case 13: return {0.0, 2.0 * speed * t};
    default: break;
  }
  throw std::out_of_range("no motion program for gesture " + std::to_string(gesture));
}

namespace {

struct Background {
  std::size_t task = 0;
  double phase_x = 0.0, phase_y = 0.0, gain = 1.0;

  std::array<double, 3> at(double x, double y) const {
    constexpr double kTau = 2.0 * std::numbers::pi;
    double s = 0.0;
    std::array<double, 3> base{};
    switch (task) {
      case 0:  // plaid
        s = 0.6 * std::sin(kTau * (y + phase_y) / 8.0) + 0.4 * std::sin(kTau * (x + phase_x) / 13.0);
        base = {170.0, 85.0, 70.0};
        break;
      case 1: {  // checkerboard
        const auto cx = static_cast<long>(std::floor((x + phase_x) / 8.0));
        const auto cy = static_cast<long>(std::floor((y + phase_y) / 8.0));
        s = ((cx + cy) % 2 == 0) ? 0.8 : -0.8;
        base = {75.0, 160.0, 85.0};
        break;
      }
      default:  // blobs
        s = std::sin(kTau * (x + phase_x) / 11.0) * std::sin(kTau * (y + phase_y) / 11.0);
        base = {75.0, 95.0, 170.0};
        break;
    }
    return {gain * base[0] + 45.0 * s, gain * base[1] + 45.0 * s, gain * base[2] + 45.0 * s};
  }
};

}  // namespace

std::vector<Image> synth_render(const SynthConfig& config, std::size_t index, std::size_t task,
                                std::size_t gesture, std::size_t length) {
  Rng rng(derive_seed(config.seed, "synth-layout", index));
  Background bg{task, rng.uniform(0.0, 16.0), rng.uniform(0.0, 16.0), rng.uniform(0.9, 1.1)};

  double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  for (std::size_t k = 0; k <= length; ++k) {
    const auto o = motion_offset(gesture, k, config.speed);
    min_x = std::min(min_x, o.x);
    max_x = std::max(max_x, o.x);
    min_y = std::min(min_y, o.y);
    max_y = std::max(max_y, o.y);
  }
  const double margin = config.sprite_radius + 1.0;
  auto place = [&](double lo, double hi) { return lo <= hi ? rng.uniform(lo, hi) : 0.5 * (lo + hi); };
  const double x0 = place(margin - min_x, static_cast<double>(config.width) - 1.0 - margin - max_x);
  const double y0 = place(margin - min_y, static_cast<double>(config.height) - 1.0 - margin - max_y);

  const double r = config.sprite_radius;
  std::vector<Image> frames;
  frames.reserve(length + 1);
  for (std::size_t k = 0; k <= length; ++k) {
    const auto o = motion_offset(gesture, k, config.speed);
    const double sx = x0 + o.x, sy = y0 + o.y;
    Rng noise(derive_seed(config.seed, "synth-noise", index, k));
    Image im(config.height, config.width, 3);
    for (std::size_t y = 0; y < config.height; ++y) {
      for (std::size_t x = 0; x < config.width; ++x) {
        auto px = bg.at(static_cast<double>(x), static_cast<double>(y));
        const double dx = static_cast<double>(x) - sx, dy = static_cast<double>(y) - sy;
        const double alpha = std::clamp(r + 0.5 - std::hypot(dx, dy), 0.0, 1.0);
        if (alpha > 0.0) {
          const auto cx = static_cast<long>(std::floor((dx + r) / 3.0));
          const auto cy = static_cast<long>(std::floor((dy + r) / 3.0));
          const double sprite = ((cx + cy) % 2 == 0) ? 235.0 : 35.0;
          for (double& c : px) c = (1.0 - alpha) * c + alpha * sprite;
        }
        for (std::size_t c = 0; c < 3; ++c) {
          const double v = px[c] + config.noise * noise.normal();
          im.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
      }
    }
    frames.push_back(std::move(im));
  }
  return frames;
}

std::vector<VideoSegment> synth_generate(const SynthConfig& config, std::size_t threads) {
  config.validate();
  std::vector<VideoSegment> out(config.segments);
  parallel_for(config.segments, threads, [&](std::size_t i) {
    const std::size_t combo = i % (config.tasks * config.gestures);
    VideoSegment seg;
    char id[32];
    std::snprintf(id, sizeof(id), "syn_%05zu", i);
    seg.id = id;
    seg.task = combo / config.gestures;
    seg.gesture = combo % config.gestures;
    seg.source = "synthetic";
    Rng rng(derive_seed(config.seed, "synth-length", i));
    const std::size_t length =
        config.min_length + rng.uniform_index(config.max_length - config.min_length + 1);
    auto frames = synth_render(config, i, seg.task, seg.gesture, length);
    for (std::size_t k = 0; k < length; ++k) {
      seg.flow.push_back(encode_flow_rgb(compute_flow(frames[k], frames[k + 1], config.flow), config.clip_mag));
    }
    frames.pop_back();
    seg.rgb = std::move(frames);
    seg.end_time = static_cast<double>(length) / 8.0;  // nominal 8 fps
    out[i] = std::move(seg);
  });
  return out;
}

}  // namespace surgrec
