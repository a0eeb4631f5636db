#include "surgrec/inference.hpp"

#include <algorithm>
#include <stdexcept>

#include "surgrec/errors.hpp"
#include "surgrec/parallel.hpp"

namespace surgrec {

std::size_t argmax(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

namespace {

void accumulate(std::vector<double>& sum, const std::vector<double>& v) {
  if (sum.empty()) sum.assign(v.size(), 0.0);
  if (sum.size() != v.size()) throw DimensionError("prediction vectors differ in length");
  for (std::size_t i = 0; i < v.size(); ++i) sum[i] += v[i];
}

}  // namespace

FramePrediction mean_prediction(const std::vector<FramePrediction>& predictions) {
  if (predictions.empty()) throw std::invalid_argument("mean of zero predictions");
  FramePrediction out;
  for (const auto& p : predictions) {
    accumulate(out.gesture, p.gesture);
    accumulate(out.task, p.task);
  }
  const auto n = static_cast<double>(predictions.size());
  for (double& x : out.gesture) x /= n;
  for (double& x : out.task) x /= n;
  return out;
}

SegmentPrediction aggregate_clips(std::vector<ClipPrediction> clips, std::string segment_id) {
  if (clips.empty()) throw std::invalid_argument("segment '" + segment_id + "' has no clips");
  for (auto& c : clips) c.mean = mean_prediction(c.frames);
  std::sort(clips.begin(), clips.end(), [](const ClipPrediction& a, const ClipPrediction& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.mean.gesture != b.mean.gesture) return a.mean.gesture < b.mean.gesture;
    return a.mean.task < b.mean.task;
  });
  std::vector<FramePrediction> means;
  means.reserve(clips.size());
  for (const auto& c : clips) means.push_back(c.mean);

  SegmentPrediction out;
  out.segment_id = std::move(segment_id);
  out.segment = mean_prediction(means);
  out.gesture = argmax(out.segment.gesture);
  out.task = argmax(out.segment.task);
  out.clips = std::move(clips);
  return out;
}

template <typename T>
SegmentPrediction predict_segment(const Network<T>& network, const VideoSegment& segment,
                                  std::size_t length, std::size_t stride, const CropSpec& crop) {
  std::vector<ClipPrediction> clips;
  for (const auto& clip : extract_clips<T>(segment, length, stride, crop)) {
    clips.push_back({clip.start, forward_sequence(network, clip), {}});
  }
  return aggregate_clips(std::move(clips), segment.id);
}

template <typename T>
std::vector<SegmentPrediction> predict_segments(const Network<T>& network,
                                                const std::vector<VideoSegment>& segments,
                                                std::size_t length, std::size_t stride,
                                                const CropSpec& crop, std::size_t threads) {
  std::vector<SegmentPrediction> out(segments.size());
  parallel_for(segments.size(), threads, [&](std::size_t i) {
    out[i] = predict_segment(network, segments[i], length, stride, crop);
  });
  return out;
}

#define SURGREC_INSTANTIATE(T)                                                                     \
  template SegmentPrediction predict_segment<T>(const Network<T>&, const VideoSegment&,           \
                                                std::size_t, std::size_t, const CropSpec&);       \
  template std::vector<SegmentPrediction> predict_segments<T>(                                    \
      const Network<T>&, const std::vector<VideoSegment>&, std::size_t, std::size_t,              \
      const CropSpec&, std::size_t);

SURGREC_INSTANTIATE(float)
SURGREC_INSTANTIATE(double)
#undef SURGREC_INSTANTIATE

}  // namespace surgrec
