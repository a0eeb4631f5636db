#include "surgrec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "json.hpp"
#include "surgrec/errors.hpp"
#include "surgrec/parallel.hpp"
#include "surgrec/transcript.hpp"

namespace fs = std::filesystem;

namespace surgrec {

void VideoSegment::validate() const {
  if (rgb.empty()) throw DimensionError("segment '" + id + "' has no frames");
  if (rgb.size() != flow.size()) {
    throw DimensionError("segment '" + id + "' pairs " + std::to_string(rgb.size()) + " rgb with " +
                         std::to_string(flow.size()) + " flow frames");
  }
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    if (rgb[i].height != flow[i].height || rgb[i].width != flow[i].width ||
        rgb[i].height != rgb[0].height || rgb[i].width != rgb[0].width) {
      throw DimensionError("segment '" + id + "' frame " + std::to_string(i) + " size mismatch");
    }
  }
  if (gesture >= kGestureClasses || task >= kTaskClasses) {
    throw DimensionError("segment '" + id + "' label out of range");
  }
}

fs::path processed_dir(const fs::path& root) { return root / "processed"; }

std::string frame_filename(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06zu.png", index);
  return buf;
}

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<fs::path> sorted_entries(const fs::path& dir, bool want_dirs) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (want_dirs ? e.is_directory() : (e.is_regular_file() && e.path().extension() == ".png")) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void write_segment(const VideoSegment& segment, const fs::path& root) {
  segment.validate();
  const fs::path dir = processed_dir(root) / segment.id;
  fs::create_directories(dir / "rgb");
  fs::create_directories(dir / "flow");
  for (std::size_t i = 0; i < segment.length(); ++i) {
    write_png(segment.rgb[i], dir / "rgb" / frame_filename(i));
    write_png(segment.flow[i], dir / "flow" / frame_filename(i));
  }
  nlohmann::ordered_json labels = {
      {"id", segment.id},
      {"gesture", segment.gesture},
      {"gesture_symbol", gesture_symbol(segment.gesture)},
      {"task", segment.task},
      {"task_name", task_name(segment.task)},
      {"source", segment.source},
      {"start_time", segment.start_time},
      {"end_time", segment.end_time},
      {"frames", segment.length()},
  };
  std::ofstream out(dir / "labels.json", std::ios::binary);
  out << labels.dump(2) << '\n';
  if (!out) throw IoError("cannot write '" + (dir / "labels.json").string() + "'");
}

VideoSegment read_segment(const fs::path& root, const std::string& id) {
  const fs::path dir = processed_dir(root) / id;
  const fs::path labels_path = dir / "labels.json";
  if (!fs::exists(labels_path)) throw IoError("segment '" + id + "': missing " + labels_path.string());
  VideoSegment seg;
  std::size_t frames = 0;
  try {
    const auto labels = nlohmann::json::parse(read_text(labels_path));
    seg.id = labels.at("id").get<std::string>();
    seg.gesture = labels.at("gesture").get<std::size_t>();
    seg.task = labels.at("task").get<std::size_t>();
    seg.source = labels.value("source", "");
    seg.start_time = labels.value("start_time", 0.0);
    seg.end_time = labels.value("end_time", 0.0);
    frames = labels.at("frames").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(labels_path.string() + ": " + e.what());
  }
  if (seg.id != id) throw ParseError(labels_path.string() + ": id '" + seg.id + "' does not match directory");
  for (std::size_t i = 0; i < frames; ++i) {
    seg.rgb.push_back(read_png(dir / "rgb" / frame_filename(i)));
    seg.flow.push_back(read_png(dir / "flow" / frame_filename(i)));
  }
  seg.validate();
  return seg;
}

std::vector<std::string> list_segments(const fs::path& root) {
  const fs::path dir = processed_dir(root);
  if (!fs::is_directory(dir)) throw IoError("no processed archive at '" + dir.string() + "'");
  std::vector<std::string> ids;
  for (const auto& p : sorted_entries(dir, true)) {
    if (fs::exists(p / "labels.json")) ids.push_back(p.filename().string());
  }
  return ids;
}

std::vector<VideoSegment> load_segments(const fs::path& root, const std::vector<std::string>& ids,
                                        std::size_t threads) {
  std::vector<VideoSegment> out(ids.size());
  parallel_for(ids.size(), threads, [&](std::size_t i) { out[i] = read_segment(root, ids[i]); });
  return out;
}

void write_archive(const std::vector<VideoSegment>& segments, const fs::path& root, std::size_t threads) {
  fs::create_directories(processed_dir(root));
  parallel_for(segments.size(), threads, [&](std::size_t i) { write_segment(segments[i], root); });
}

VideoSegment resized(const VideoSegment& segment, std::size_t height, std::size_t width) {
  VideoSegment out = segment;
  for (auto& im : out.rgb) im = resize(im, height, width);
  for (auto& im : out.flow) im = resize(im, height, width);
  return out;
}

std::vector<Image> flow_frames(const std::vector<Image>& frames, const Image* next_frame,
                               const FlowParams& params, double clip_mag) {
  std::vector<Image> out;
  out.reserve(frames.size());
  for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
    out.push_back(encode_flow_rgb(compute_flow(frames[k], frames[k + 1], params), clip_mag));
  }
  if (!frames.empty()) {
    if (next_frame != nullptr) {
      out.push_back(encode_flow_rgb(compute_flow(frames.back(), *next_frame, params), clip_mag));
    } else if (!out.empty()) {
      out.push_back(out.back());
    } else {
      out.push_back(encode_flow_rgb(FlowField(frames[0].height, frames[0].width), clip_mag));
    }
  }
  return out;
}

namespace {

struct VideoJob {
  fs::path trial_dir;
  std::string task_dir;
  std::size_t task = 0;
};

PreprocessReport preprocess_video(const VideoJob& job, const fs::path& out_root,
                                  const PreprocessConfig& config,
                                  const std::function<void(const std::string&)>& log) {
  PreprocessReport report;
  report.videos = 1;
  const std::string trial = job.trial_dir.filename().string();
  const auto frame_files = sorted_entries(job.trial_dir / "frames", false);
  if (frame_files.empty()) throw IoError("no frames under '" + (job.trial_dir / "frames").string() + "'");
  const auto entries = parse_transcript(read_text(job.trial_dir / "transcript.txt"), config.source_fps);

  std::map<std::size_t, Image> cache;
  auto frame = [&](std::size_t index) -> const Image& {
    auto it = cache.find(index);
    if (it == cache.end()) {
      it = cache.emplace(index, resize(read_png(frame_files[index]), config.extract_height,
                                       config.extract_width)).first;
    }
    return it->second;
  };

  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    const auto gesture = gesture_class(e.gesture);
    if (!gesture) {
      ++report.dropped_g7;
      continue;
    }
    const auto indices = sample_frames(e.start_time, e.end_time, config.extraction_fps,
                                       config.source_fps, frame_files.size());
    if (indices.size() < config.min_length) {
      ++report.dropped_short;
      continue;
    }
    VideoSegment seg;
    char id[256];
    std::snprintf(id, sizeof(id), "%s_%s_%03zu", job.task_dir.c_str(), trial.c_str(), k);
    seg.id = id;
    seg.gesture = *gesture;
    seg.task = job.task;
    seg.source = job.task_dir + "/" + trial;
    seg.start_time = e.start_time;
    seg.end_time = e.end_time;
    for (std::size_t i : indices) seg.rgb.push_back(frame(i));
    const double next_pos = e.start_time * config.source_fps +
                            static_cast<double>(indices.size()) * config.source_fps / config.extraction_fps;
    const auto next = static_cast<std::size_t>(std::floor(next_pos + 0.5 + 1e-9));
    const Image* next_frame = next < frame_files.size() ? &frame(next) : nullptr;
    seg.flow = flow_frames(seg.rgb, next_frame, config.flow, config.clip_mag);
    write_segment(seg, out_root);
    ++report.segments;
  }
  if (log) {
    log(job.task_dir + "/" + trial + ": " + std::to_string(report.segments) + " segments, " +
        std::to_string(report.dropped_short) + " dropped as shorter than " +
        std::to_string(config.min_length) + " frames, " + std::to_string(report.dropped_g7) +
        " G7 entries skipped");
  }
  return report;
}

}  // namespace

PreprocessReport preprocess_dataset(const fs::path& raw_root, const fs::path& out_root,
                                    const PreprocessConfig& config, std::size_t threads,
                                    const std::function<void(const std::string&)>& log) {
  if (!fs::is_directory(raw_root)) throw IoError("raw dataset root '" + raw_root.string() + "' not found");
  std::vector<VideoJob> jobs;
  for (const auto& task_dir : sorted_entries(raw_root, true)) {
    const std::string name = task_dir.filename().string();
    if (name == "processed") continue;
    const std::size_t task = task_class(name);
    for (const auto& trial : sorted_entries(task_dir, true)) {
      if (fs::exists(trial / "transcript.txt")) jobs.push_back({trial, name, task});
    }
  }
  fs::create_directories(processed_dir(out_root));
  std::vector<PreprocessReport> reports(jobs.size());
  std::mutex log_mu;
  auto locked_log = [&](const std::string& line) {
    std::lock_guard lock(log_mu);
    if (log) log(line);
  };
  parallel_for(jobs.size(), threads,
               [&](std::size_t i) { reports[i] = preprocess_video(jobs[i], out_root, config, locked_log); });
  PreprocessReport total;
  for (const auto& r : reports) {
    total.videos += r.videos;
    total.segments += r.segments;
    total.dropped_short += r.dropped_short;
    total.dropped_g7 += r.dropped_g7;
  }
  return total;
}

}  // namespace surgrec
