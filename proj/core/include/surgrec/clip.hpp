#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "surgrec/tensor.hpp"

namespace surgrec {

// One time step of network input. Single-modality networks read only their
// own member; the other may be left undefined.
template <typename T>
struct FramePair {
  Tensor<T> rgb;   // [3 x H x W]
  Tensor<T> flow;  // [3 x H x W], flow-RGB encoded
};

// Fixed-length window of frame pairs. markers[0] == 0 resets the recurrent
// state; the remaining markers are 1.
template <typename T>
struct ClipSequence {
  std::vector<FramePair<T>> frames;
  std::vector<int> markers;
  std::size_t gesture = 0;
  std::size_t task = 0;
  std::string segment_id;
  std::size_t start = 0;

  std::size_t length() const { return frames.size(); }
};

// Markers for a fresh clip of `length` steps: {0, 1, 1, ...}.
inline std::vector<int> clip_markers(std::size_t length) {
  std::vector<int> markers(length, 1);
  if (length > 0) markers[0] = 0;
  return markers;
}

}  // namespace surgrec
