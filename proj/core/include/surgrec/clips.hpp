#pragma once

#include <cstddef>
#include <vector>

#include "surgrec/clip.hpp"
#include "surgrec/dataset.hpp"
#include "surgrec/image.hpp"

namespace surgrec {

// Starts 0, stride, 2*stride, ... with start + L <= n, plus a tail clip at
// n - L when the strided ones miss the last frame.
std::vector<std::size_t> clip_starts(std::size_t n, std::size_t length, std::size_t stride);

// Crop geometry applied to every frame of a clip.
struct CropSpec {
  std::size_t height = 56;
  std::size_t width = 56;
};

// Frames [start, start + length) of `segment`, both modalities cropped and
// mirrored by the same draw.
template <typename T>
ClipSequence<T> make_clip(const VideoSegment& segment, std::size_t start, std::size_t length,
                          const AugmentDraw& draw, const CropSpec& crop);

// Centre-cropped clips at clip_starts(). Throws when the segment is shorter
// than `length`.
template <typename T>
std::vector<ClipSequence<T>> extract_clips(const VideoSegment& segment, std::size_t length,
                                           std::size_t stride, const CropSpec& crop);

}  // namespace surgrec
