#include "surgrec/clips.hpp"

#include <stdexcept>

#include "surgrec/errors.hpp"

namespace surgrec {

std::vector<std::size_t> clip_starts(std::size_t n, std::size_t length, std::size_t stride) {
  if (length == 0 || stride == 0) throw std::invalid_argument("clip_starts: length and stride must be positive");
  if (n < length) {
    throw DimensionError("segment of " + std::to_string(n) + " frames is shorter than clip length " +
                         std::to_string(length));
  }
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + length <= n; s += stride) starts.push_back(s);
  if (starts.back() != n - length) starts.push_back(n - length);
  return starts;
}

template <typename T>
ClipSequence<T> make_clip(const VideoSegment& segment, std::size_t start, std::size_t length,
                          const AugmentDraw& draw, const CropSpec& crop) {
  if (start + length > segment.length()) {
    throw DimensionError("clip [" + std::to_string(start) + ", " + std::to_string(start + length) +
                         ") exceeds segment '" + segment.id + "' of " +
                         std::to_string(segment.length()) + " frames");
  }
  ClipSequence<T> clip;
  clip.frames.reserve(length);
  for (std::size_t t = start; t < start + length; ++t) {
    clip.frames.push_back(
        {image_to_tensor<T>(apply_augment(segment.rgb[t], draw, crop.height, crop.width, false)),
         image_to_tensor<T>(apply_augment(segment.flow[t], draw, crop.height, crop.width, true))});
  }
  clip.markers = clip_markers(length);
  clip.gesture = segment.gesture;
  clip.task = segment.task;
  clip.segment_id = segment.id;
  clip.start = start;
  return clip;
}

template <typename T>
std::vector<ClipSequence<T>> extract_clips(const VideoSegment& segment, std::size_t length,
                                           std::size_t stride, const CropSpec& crop) {
  if (segment.rgb.empty()) throw DimensionError("segment '" + segment.id + "' has no frames");
  const auto draw = center_crop(segment.rgb[0].height, segment.rgb[0].width, crop.height, crop.width);
  std::vector<ClipSequence<T>> clips;
  for (std::size_t s : clip_starts(segment.length(), length, stride)) {
    clips.push_back(make_clip<T>(segment, s, length, draw, crop));
  }
  return clips;
}

#define SURGREC_INSTANTIATE(T)                                                                    \
  template ClipSequence<T> make_clip<T>(const VideoSegment&, std::size_t, std::size_t,           \
                                        const AugmentDraw&, const CropSpec&);                    \
  template std::vector<ClipSequence<T>> extract_clips<T>(const VideoSegment&, std::size_t,       \
                                                         std::size_t, const CropSpec&);

SURGREC_INSTANTIATE(float)
SURGREC_INSTANTIATE(double)
#undef SURGREC_INSTANTIATE

}  // namespace surgrec
