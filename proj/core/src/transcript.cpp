#include "surgrec/transcript.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "surgrec/errors.hpp"

namespace surgrec {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<std::size_t> parse_index(std::string_view text) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<std::size_t> gesture_number(std::string_view symbol) {
  if (symbol.size() < 2 || symbol[0] != 'G') return std::nullopt;
  auto n = parse_index(symbol.substr(1));
  if (!n || *n < 1 || *n > 15) return std::nullopt;
  return n;
}

}  // namespace

std::vector<TranscriptEntry> parse_transcript(std::string_view text, double source_fps) {
  if (!(source_fps > 0.0)) throw std::invalid_argument("parse_transcript: source_fps must be positive");
  std::vector<TranscriptEntry> entries;
  std::vector<std::size_t> lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    const auto where = "transcript line " + std::to_string(line_no);
    if (fields.size() != 3) {
      throw ParseError(where + ": expected 'start_frame end_frame gesture_id', got '" +
                       std::string(line) + "'");
    }
    auto start = parse_index(fields[0]);
    auto end = parse_index(fields[1]);
    if (!start || !end) throw ParseError(where + ": frame numbers must be nonnegative integers");
    if (*end <= *start) throw ParseError(where + ": end frame must exceed start frame");
    if (!gesture_number(fields[2])) {
      throw ParseError(where + ": unknown gesture '" + std::string(fields[2]) + "' (expected G1..G15)");
    }
    entries.push_back({*start, *end, std::string(fields[2]), static_cast<double>(*start) / source_fps,
                       static_cast<double>(*end) / source_fps});
    lines.push_back(line_no);
  }

  std::vector<std::size_t> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return entries[a].start_frame < entries[b].start_frame;
  });
  std::vector<TranscriptEntry> sorted;
  sorted.reserve(entries.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& e = entries[order[k]];
    if (k > 0 && e.start_frame < sorted.back().end_frame) {
      throw ParseError("transcript line " + std::to_string(lines[order[k]]) + " overlaps line " +
                       std::to_string(lines[order[k - 1]]));
    }
    sorted.push_back(e);
  }
  return sorted;
}

std::string format_transcript(const std::vector<TranscriptEntry>& entries) {
  std::ostringstream out;
  for (const auto& e : entries) out << e.start_frame << ' ' << e.end_frame << ' ' << e.gesture << '\n';
  return out.str();
}

std::optional<std::size_t> gesture_class(std::string_view symbol) {
  auto n = gesture_number(symbol);
  if (!n) throw ParseError("unknown gesture '" + std::string(symbol) + "' (expected G1..G15)");
  if (*n == 7) return std::nullopt;
  return *n < 7 ? *n - 1 : *n - 2;
}

std::string gesture_symbol(std::size_t gesture_class) {
  if (gesture_class >= kGestureClasses) {
    throw std::out_of_range("gesture class " + std::to_string(gesture_class) + " out of range");
  }
  return "G" + std::to_string(gesture_class < 6 ? gesture_class + 1 : gesture_class + 2);
}

namespace {
constexpr std::string_view kTaskNames[kTaskClasses] = {"Suturing", "Needle_Passing", "Knot_Tying"};

std::string fold(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c != '_' && c != '-' && c != ' ') out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}
}  // namespace

std::size_t task_class(std::string_view name) {
  const std::string key = fold(name);
  for (std::size_t i = 0; i < kTaskClasses; ++i) {
    if (fold(kTaskNames[i]) == key) return i;
  }
  throw ParseError("unknown task '" + std::string(name) + "' (expected Suturing, Needle_Passing or Knot_Tying)");
}

std::string_view task_name(std::size_t task_class) {
  if (task_class >= kTaskClasses) throw std::out_of_range("task class out of range");
  return kTaskNames[task_class];
}

std::vector<std::size_t> sample_frames(double start_time, double end_time, double extraction_fps,
                                       double source_fps, std::size_t video_frames) {
  if (!(extraction_fps > 0.0) || !(source_fps > 0.0)) {
    throw std::invalid_argument("sample_frames: fps must be positive");
  }
  if (start_time < 0.0 || end_time <= start_time) {
    throw std::out_of_range("sample_frames: invalid range [" + std::to_string(start_time) + ", " +
                            std::to_string(end_time) + ")");
  }
  const double video_end = static_cast<double>(video_frames) / source_fps;
  if (video_frames == 0 || end_time > video_end + 1e-9) {
    throw std::out_of_range("sample_frames: range ends at " + std::to_string(end_time) +
                            " s but the video has " + std::to_string(video_frames) + " frames (" +
                            std::to_string(video_end) + " s)");
  }
  const double span = (end_time - start_time) * extraction_fps;
  const auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span - 1e-9)));
  std::vector<std::size_t> frames;
  frames.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double pos = start_time * source_fps + static_cast<double>(k) * source_fps / extraction_fps;
    // Half-frame ties round up; the slack absorbs representation error.
    const auto nearest = static_cast<std::size_t>(std::floor(pos + 0.5 + 1e-9));
    frames.push_back(std::min(nearest, video_frames - 1));
  }
  return frames;
}

}  // namespace surgrec
