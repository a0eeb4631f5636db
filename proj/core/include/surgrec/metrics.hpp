#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "surgrec/inference.hpp"

namespace surgrec {

// Segment-level scores paired with ground truth.
struct EvalRecord {
  std::string segment_id;
  std::size_t gesture_truth = 0;
  std::size_t task_truth = 0;
  std::vector<double> gesture_scores;
  std::vector<double> task_scores;
};

struct MetricsReport {
  std::size_t segments = 0;
  double joint_accuracy = 0.0;  // both heads correct
  double gesture_accuracy = 0.0;
  double task_accuracy = 0.0;
  // Per-class AP; nullopt for classes absent from the ground truth.
  std::vector<std::optional<double>> gesture_ap;
  std::vector<std::optional<double>> task_ap;
  double gesture_map = 0.0;
  double task_map = 0.0;
  // confusion[truth][predicted]
  std::vector<std::vector<std::size_t>> gesture_confusion;
  std::vector<std::vector<std::size_t>> task_confusion;
  std::string split;
  std::string config_hash;
  std::uint64_t seed = 0;
};

// Non-interpolated AP: mean over positives of precision at each positive's
// rank. Ranks sort by descending score, ties by input position. nullopt
// when there are no positives.
std::optional<double> average_precision(const std::vector<double>& scores,
                                        const std::vector<bool>& positives);

MetricsReport compute_metrics(const std::vector<EvalRecord>& records, std::size_t gesture_classes,
                              std::size_t task_classes);

// Joins segment predictions with labels. Gesture scores come from
// `gesture_source`, task scores from `task_source`; pass the same vector for
// a single network.
std::vector<EvalRecord> make_records(const std::vector<VideoSegment>& segments,
                                     const std::vector<SegmentPrediction>& gesture_source,
                                     const std::vector<SegmentPrediction>& task_source);

// Stable field order, fixed float formatting; identical reports serialize to
// identical bytes.
std::string metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const std::string& text);

template <typename T>
MetricsReport evaluate(const Network<T>& network, const std::vector<VideoSegment>& test_segments,
                       std::size_t length, std::size_t stride, const CropSpec& crop,
                       std::size_t threads = 1);

}  // namespace surgrec
