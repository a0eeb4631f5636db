#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "surgrec/clips.hpp"
#include "surgrec/dataset.hpp"
#include "surgrec/network.hpp"

namespace surgrec {

struct ClipPrediction {
  std::size_t start = 0;
  std::vector<FramePrediction> frames;
  FramePrediction mean;  // filled by aggregate_clips
};

struct SegmentPrediction {
  std::string segment_id;
  std::vector<ClipPrediction> clips;  // ordered by start
  FramePrediction segment;            // mean of clip means
  std::size_t gesture = 0;
  std::size_t task = 0;
};

// First index of the maximum.
std::size_t argmax(const std::vector<double>& values);

// Element-wise mean, summed in the given order.
FramePrediction mean_prediction(const std::vector<FramePrediction>& predictions);

// Frame means per clip, then the mean over clips. Clips are put in a
// canonical order first, so the result does not depend on the order given.
SegmentPrediction aggregate_clips(std::vector<ClipPrediction> clips, std::string segment_id = {});

template <typename T>
SegmentPrediction predict_segment(const Network<T>& network, const VideoSegment& segment,
                                  std::size_t length, std::size_t stride, const CropSpec& crop);

// One prediction per segment, in input order.
template <typename T>
std::vector<SegmentPrediction> predict_segments(const Network<T>& network,
                                                const std::vector<VideoSegment>& segments,
                                                std::size_t length, std::size_t stride,
                                                const CropSpec& crop, std::size_t threads = 1);

}  // namespace surgrec
