#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "surgrec/dataset.hpp"
#include "surgrec/flow.hpp"

namespace surgrec {

// Task is carried by the background texture, gesture by the sprite's motion.
struct SynthConfig {
  std::size_t tasks = 3;     // <= 3
  std::size_t gestures = 4;  // <= 14
  std::size_t segments = 160;
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t min_length = 10;
  std::size_t max_length = 20;
  double speed = 2.0;         // pixels per frame
  double sprite_radius = 6.0;
  double noise = 3.0;         // per-pixel Gaussian, intensity units
  double clip_mag = 4.0;
  FlowParams flow;
  std::uint64_t seed = 1;

  void validate() const;
};

// Motion program names, indexed by gesture class. The first four differ from
// one another even after a horizontal mirror.
std::string_view motion_program_name(std::size_t gesture);

// Sprite centre (x, y) at frame k relative to its start position.
struct Offset {
  double x = 0.0, y = 0.0;
};
Offset motion_offset(std::size_t gesture, std::size_t k, double speed);

// Segment i gets labels from i % (tasks * gestures), so every combination
// appears once N >= tasks * gestures. Ids are "syn_NNNNN".
std::vector<VideoSegment> synth_generate(const SynthConfig& config, std::size_t threads = 1);

// Rendering only, no flow: `length + 1` frames of segment `index`.
std::vector<Image> synth_render(const SynthConfig& config, std::size_t index, std::size_t task,
                                std::size_t gesture, std::size_t length);

}  // namespace surgrec
