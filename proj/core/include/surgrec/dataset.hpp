#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "surgrec/flow.hpp"
#include "surgrec/image.hpp"

namespace surgrec {

// One gesture clip with paired RGB and flow-RGB frames of equal count.
struct VideoSegment {
  std::string id;
  std::size_t gesture = 0;  // 0..13
  std::size_t task = 0;     // 0..2
  std::string source;
  double start_time = 0.0;
  double end_time = 0.0;
  std::vector<Image> rgb;
  std::vector<Image> flow;

  std::size_t length() const { return rgb.size(); }
  // Throws if the pairing or labels are inconsistent.
  void validate() const;
};

// Processed archive layout:
//   <root>/processed/<id>/rgb/frame_NNNNNN.png
//   <root>/processed/<id>/flow/frame_NNNNNN.png
//   <root>/processed/<id>/labels.json
std::filesystem::path processed_dir(const std::filesystem::path& root);
std::string frame_filename(std::size_t index);

void write_segment(const VideoSegment& segment, const std::filesystem::path& root);
VideoSegment read_segment(const std::filesystem::path& root, const std::string& id);

// Segment ids in the archive, sorted.
std::vector<std::string> list_segments(const std::filesystem::path& root);

// Ids in `ids` order; loading runs on `threads` workers.
std::vector<VideoSegment> load_segments(const std::filesystem::path& root,
                                        const std::vector<std::string>& ids, std::size_t threads = 1);
void write_archive(const std::vector<VideoSegment>& segments, const std::filesystem::path& root,
                   std::size_t threads = 1);

// Resizes every frame of both modalities.
VideoSegment resized(const VideoSegment& segment, std::size_t height, std::size_t width);

// Flow-RGB frames for a frame sequence: frame k pairs with flow (k -> k+1).
// The last frame reuses `next_frame` when given, else repeats the previous
// flow; a single frame without a successor gets zero flow.
std::vector<Image> flow_frames(const std::vector<Image>& frames, const Image* next_frame,
                               const FlowParams& params, double clip_mag);

struct PreprocessConfig {
  double source_fps = 30.0;
  double extraction_fps = 8.0;
  std::size_t extract_height = 480;
  std::size_t extract_width = 640;
  std::size_t min_length = 8;  // shorter segments are dropped
  double clip_mag = 8.0;
  FlowParams flow;
};

struct PreprocessReport {
  std::size_t videos = 0;
  std::size_t segments = 0;
  std::size_t dropped_short = 0;
  std::size_t dropped_g7 = 0;
};

// Raw layout: <raw>/<task>/<trial>/frames/*.png and <raw>/<task>/<trial>/transcript.txt.
// Frame files sorted by name define indices 0..n-1, which transcript frame
// numbers refer to. Writes a processed archive under `out_root`.
PreprocessReport preprocess_dataset(const std::filesystem::path& raw_root,
                                    const std::filesystem::path& out_root,
                                    const PreprocessConfig& config, std::size_t threads = 1,
                                    const std::function<void(const std::string&)>& log = {});

}  // namespace surgrec
