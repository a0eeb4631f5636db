#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace surgrec {

inline constexpr std::size_t kGestureClasses = 14;
inline constexpr std::size_t kTaskClasses = 3;

// One annotated gesture. Frame range is half-open, [start_frame, end_frame).
struct TranscriptEntry {
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;
  std::string gesture;  // raw symbol, G1..G15
  double start_time = 0.0;
  double end_time = 0.0;

  bool operator==(const TranscriptEntry&) const = default;
};

// Lines of "start_frame end_frame gesture_id". Blank lines are skipped.
// Output is sorted by start frame; overlapping entries are an error.
std::vector<TranscriptEntry> parse_transcript(std::string_view text, double source_fps);

std::string format_transcript(const std::vector<TranscriptEntry>& entries);

// G1..G6 -> 0..5, G8..G15 -> 6..13. G7 has no class and returns nullopt;
// anything else throws ParseError.
std::optional<std::size_t> gesture_class(std::string_view symbol);
std::string gesture_symbol(std::size_t gesture_class);

// Suturing, Needle_Passing, Knot_Tying -> 0, 1, 2 (case and '_' insensitive).
std::size_t task_class(std::string_view name);
std::string_view task_name(std::size_t task_class);

// Source frame indices sampled at start + k / extraction_fps while < end,
// each mapped to the nearest source frame. Always at least one frame.
std::vector<std::size_t> sample_frames(double start_time, double end_time, double extraction_fps,
                                       double source_fps, std::size_t video_frames);

}  // namespace surgrec
