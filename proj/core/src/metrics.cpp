#include "surgrec/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "surgrec/errors.hpp"

namespace surgrec {

std::optional<double> average_precision(const std::vector<double>& scores,
                                        const std::vector<bool>& positives) {
  if (scores.size() != positives.size()) throw DimensionError("average_precision: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (positives[order[rank]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

namespace {

struct HeadStats {
  double accuracy = 0.0;
  std::vector<std::optional<double>> ap;
  double map = 0.0;
  std::vector<std::vector<std::size_t>> confusion;
};

HeadStats head_stats(const std::vector<EvalRecord>& records, std::size_t classes, bool gesture) {
  HeadStats s;
  s.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  std::size_t correct = 0;
  for (const auto& r : records) {
    const auto& scores = gesture ? r.gesture_scores : r.task_scores;
    const std::size_t truth = gesture ? r.gesture_truth : r.task_truth;
    if (scores.size() != classes || truth >= classes) {
      throw DimensionError("record '" + r.segment_id + "' does not match " + std::to_string(classes) +
                           " classes");
    }
    const std::size_t pred = argmax(scores);
    s.confusion[truth][pred] += 1;
    if (pred == truth) ++correct;
  }
  s.accuracy = static_cast<double>(correct) / static_cast<double>(records.size());
  double total = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<double> scores;
    std::vector<bool> positives;
    for (const auto& r : records) {
      scores.push_back((gesture ? r.gesture_scores : r.task_scores)[c]);
      positives.push_back((gesture ? r.gesture_truth : r.task_truth) == c);
    }
    s.ap.push_back(average_precision(scores, positives));
    if (s.ap.back()) {
      total += *s.ap.back();
      ++present;
    }
  }
  s.map = present > 0 ? total / static_cast<double>(present) : 0.0;
  return s;
}

}  // namespace

MetricsReport compute_metrics(const std::vector<EvalRecord>& records, std::size_t gesture_classes,
                              std::size_t task_classes) {
  if (records.empty()) throw std::invalid_argument("evaluate: empty test set");
  const auto g = head_stats(records, gesture_classes, true);
  const auto t = head_stats(records, task_classes, false);
  std::size_t both = 0;
  for (const auto& r : records) {
    if (argmax(r.gesture_scores) == r.gesture_truth && argmax(r.task_scores) == r.task_truth) ++both;
  }
  MetricsReport m;
  m.segments = records.size();
  m.joint_accuracy = static_cast<double>(both) / static_cast<double>(records.size());
  m.gesture_accuracy = g.accuracy;
  m.task_accuracy = t.accuracy;
  m.gesture_ap = g.ap;
  m.task_ap = t.ap;
  m.gesture_map = g.map;
  m.task_map = t.map;
  m.gesture_confusion = g.confusion;
  m.task_confusion = t.confusion;
  return m;
}

std::vector<EvalRecord> make_records(const std::vector<VideoSegment>& segments,
                                     const std::vector<SegmentPrediction>& gesture_source,
                                     const std::vector<SegmentPrediction>& task_source) {
  if (gesture_source.size() != segments.size() || task_source.size() != segments.size()) {
    throw DimensionError("make_records: prediction count does not match segment count");
  }
  std::vector<EvalRecord> out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (gesture_source[i].segment_id != segments[i].id || task_source[i].segment_id != segments[i].id) {
      throw DimensionError("make_records: prediction order does not match segment '" + segments[i].id + "'");
    }
    out.push_back({segments[i].id, segments[i].gesture, segments[i].task,
                   gesture_source[i].segment.gesture, task_source[i].segment.task});
  }
  return out;
}

namespace {

nlohmann::ordered_json ap_json(const std::vector<std::optional<double>>& ap) {
  auto j = nlohmann::ordered_json::array();
  for (const auto& v : ap) {
    if (v) {
      j.push_back(*v);
    } else {
      j.push_back(nullptr);
    }
  }
  return j;
}

std::vector<std::optional<double>> ap_from(const nlohmann::json& j) {
  std::vector<std::optional<double>> out;
  for (const auto& v : j) {
    if (v.is_null()) {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(v.get<double>());
    }
  }
  return out;
}

}  // namespace

std::string metrics_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["split"] = r.split;
  j["seed"] = r.seed;
  j["config_hash"] = r.config_hash;
  j["segments"] = r.segments;
  j["joint_accuracy"] = r.joint_accuracy;
  j["gesture_accuracy"] = r.gesture_accuracy;
  j["task_accuracy"] = r.task_accuracy;
  j["gesture_map"] = r.gesture_map;
  j["task_map"] = r.task_map;
  j["gesture_ap"] = ap_json(r.gesture_ap);
  j["task_ap"] = ap_json(r.task_ap);
  j["gesture_confusion"] = r.gesture_confusion;
  j["task_confusion"] = r.task_confusion;
  return j.dump(2) + "\n";
}

MetricsReport metrics_from_json(const std::string& text) {
  MetricsReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    j.at("split").get_to(r.split);
    j.at("seed").get_to(r.seed);
    j.at("config_hash").get_to(r.config_hash);
    j.at("segments").get_to(r.segments);
    j.at("joint_accuracy").get_to(r.joint_accuracy);
    j.at("gesture_accuracy").get_to(r.gesture_accuracy);
    j.at("task_accuracy").get_to(r.task_accuracy);
    j.at("gesture_map").get_to(r.gesture_map);
    j.at("task_map").get_to(r.task_map);
    r.gesture_ap = ap_from(j.at("gesture_ap"));
    r.task_ap = ap_from(j.at("task_ap"));
    j.at("gesture_confusion").get_to(r.gesture_confusion);
    j.at("task_confusion").get_to(r.task_confusion);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("metrics report: ") + e.what());
  }
  return r;
}

template <typename T>
MetricsReport evaluate(const Network<T>& network, const std::vector<VideoSegment>& test_segments,
                       std::size_t length, std::size_t stride, const CropSpec& crop,
                       std::size_t threads) {
  if (test_segments.empty()) throw std::invalid_argument("evaluate: empty test set");
  const auto preds = predict_segments(network, test_segments, length, stride, crop, threads);
  return compute_metrics(make_records(test_segments, preds, preds), network.spec().gesture_classes,
                         network.spec().task_classes);
}

template MetricsReport evaluate<float>(const Network<float>&, const std::vector<VideoSegment>&,
                                       std::size_t, std::size_t, const CropSpec&, std::size_t);
template MetricsReport evaluate<double>(const Network<double>&, const std::vector<VideoSegment>&,
                                        std::size_t, std::size_t, const CropSpec&, std::size_t);

}  // namespace surgrec
