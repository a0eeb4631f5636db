#include "surgrec/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "surgrec/errors.hpp"
#include "surgrec/inference.hpp"
#include "surgrec/network.hpp"
#include "surgrec/random.hpp"
#include "surgrec/transcript.hpp"

namespace surgrec {

namespace fs = std::filesystem;

fs::path RunPaths::checkpoint(Stage stage) const {
  return out / "checkpoints" / (std::string(to_string(stage)) + ".ckpt");
}

fs::path RunPaths::loss_trace(Stage stage) const {
  return out / "logs" / (std::string(to_string(stage)) + "_loss.csv");
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunLock::RunLock(fs::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  // O_EXCL semantics through the C stdio "x" mode.
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (f == nullptr) {
    throw IoError("output directory is locked by another run (remove '" + path_.string() +
                  "' if no run is active)");
  }
  std::fclose(f);
}

RunLock::~RunLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

fs::path splits_path(const RunConfig& config) { return fs::path(config.data_root) / "splits.json"; }

std::vector<Split> resolve_splits(const RunConfig& config, const std::vector<std::string>& ids) {
  const fs::path path = splits_path(config);
  if (fs::exists(path)) return load_splits(path);
  return make_splits(ids, config.splits.count, config.splits.train, config.splits.seed);
}

DataSplit load_data_split(const RunConfig& config, std::size_t index) {
  const auto ids = list_segments(config.data_root);
  if (ids.empty()) {
    throw IoError("no segments under '" + processed_dir(config.data_root).string() +
                  "' (run synth or preprocess first)");
  }
  const auto splits = resolve_splits(config, ids);
  if (index >= splits.size()) {
    throw ConfigError("config field 'splits.index': split " + std::to_string(index) + " requested, " +
                      std::to_string(splits.size()) + " available");
  }
  DataSplit d;
  d.index = index;
  d.split = splits[index];
  auto load = [&](const std::vector<std::string>& which) {
    auto segs = load_segments(config.data_root, which, config.threads);
    for (auto& s : segs) {
      if (s.rgb.front().height != config.input.resize_height || s.rgb.front().width != config.input.resize_width) {
        s = resized(s, config.input.resize_height, config.input.resize_width);
      }
    }
    return segs;
  };
  d.train = load(d.split.train);
  d.test = load(d.split.test);
  return d;
}

namespace {

std::uint64_t stage_number(Stage s) { return static_cast<std::uint64_t>(s); }

}  // namespace

std::uint64_t stage_init_seed(const RunConfig& config, Stage stage) {
  return derive_seed(config.seed, "init", stage_number(stage));
}

std::uint64_t stage_train_seed(const RunConfig& config, Stage stage) {
  return derive_seed(config.seed, "train", stage_number(stage));
}

LossWeights stage_weights(Stage stage, bool single_task) {
  if (!single_task || stage == Stage::kJoint) return {1.0, 1.0};
  return modality_of(stage) == Modality::kRgb ? LossWeights{0.0, 1.0} : LossWeights{1.0, 0.0};
}

std::vector<Stage> prerequisites(Stage stage) {
  switch (stage) {
    case Stage::kFrameRgb:
    case Stage::kFrameFlow: return {};
    case Stage::kLstmRgb: return {Stage::kFrameRgb};
    case Stage::kLstmFlow: return {Stage::kFrameFlow};
    case Stage::kJoint:
      return {Stage::kFrameRgb, Stage::kFrameFlow, Stage::kLstmRgb, Stage::kLstmFlow};
  }
  return {};
}

std::vector<Stage> initializers(Stage stage) {
  if (stage == Stage::kJoint) return {Stage::kLstmRgb, Stage::kLstmFlow};
  return prerequisites(stage);
}

NetworkCheckpoint load_stage_checkpoint(const RunConfig& config, Stage stage, const RunPaths& paths) {
  const fs::path path = paths.checkpoint(stage);
  if (!fs::exists(path)) {
    throw IoError("missing " + std::string(to_string(stage)) + " checkpoint: expected '" + path.string() + "'");
  }
  auto ckpt = load_checkpoint(path);
  if (ckpt.stage != stage) {
    throw CheckpointError("'" + path.string() + "' holds a " + std::string(to_string(ckpt.stage)) +
                          " checkpoint, expected " + std::string(to_string(stage)));
  }
  if (!(ckpt.architecture == config.architecture)) {
    throw CheckpointError("'" + path.string() + "' was trained with a different architecture than the config");
  }
  return ckpt;
}

namespace {

TrainConfig train_config(const RunConfig& config, Stage stage, const LossWeights& weights) {
  TrainConfig t;
  t.max_iterations = config.max_iterations(stage);
  t.batch = config.training.batch;
  t.clip_length = config.training.clip_length;
  t.crop = {config.input.crop_height, config.input.crop_width};
  t.mirror = config.input.mirror;
  t.weights = weights;
  t.seed = stage_train_seed(config, stage);
  t.checkpoint_interval = config.training.checkpoint_interval;
  return t;
}

template <typename T>
Network<T> build_stage(const RunConfig& config, Stage stage, const RunPaths& paths) {
  const auto& spec = config.architecture;
  const auto seed = stage_init_seed(config, stage);
  switch (form_of(stage)) {
    case NetworkForm::kFrame: return build_frame_cnn<T>(spec, modality_of(stage), seed);
    case NetworkForm::kModalityLstm: {
      const auto m = modality_of(stage);
      return build_modality_lstm<T>(spec, m, load_stage_checkpoint(config, frame_stage(m), paths), seed);
    }
    case NetworkForm::kJoint:
      return build_joint_model<T>(spec, load_stage_checkpoint(config, Stage::kLstmRgb, paths),
                                  load_stage_checkpoint(config, Stage::kLstmFlow, paths), seed);
  }
  throw std::logic_error("unreachable");
}

template <typename T>
StageOutcome run_stage_typed(const RunConfig& config, Stage stage, const std::vector<VideoSegment>& train,
                             const RunPaths& paths, const StageOptions& options) {
  auto net = build_stage<T>(config, stage, paths);
  OptimizerState opt = config.optimizer;
  opt.iteration = 0;
  auto tc = train_config(config, stage, options.weights);
  if (tc.checkpoint_interval > 0) {
    tc.checkpoint_dir = paths.out / "checkpoints";
    fs::create_directories(tc.checkpoint_dir);
  }
  const std::string name(to_string(stage));
  auto on_step = [&](const LossRecord& r) {
    if (options.log && options.log_every > 0 &&
        ((r.iteration + 1) % options.log_every == 0 || r.iteration + 1 == tc.max_iterations)) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%s iter %llu/%llu lr %.3g loss %.4f (gesture %.4f task %.4f)",
                    name.c_str(), static_cast<unsigned long long>(r.iteration + 1),
                    static_cast<unsigned long long>(tc.max_iterations), r.lr, r.total, r.gesture, r.task);
      options.log(buf);
    }
  };
  StageOutcome out;
  out.trace = train_stage(net, train, tc, opt, on_step);
  out.checkpoint = make_checkpoint(net, opt);
  fs::create_directories(paths.checkpoint(stage).parent_path());
  fs::create_directories(paths.loss_trace(stage).parent_path());
  save_checkpoint(out.checkpoint, paths.checkpoint(stage));
  write_loss_trace(out.trace, paths.loss_trace(stage));
  return out;
}

template <typename T>
std::vector<SegmentPrediction> predict_typed(const RunConfig& config, const NetworkCheckpoint& ckpt,
                                             const std::vector<VideoSegment>& segs) {
  const auto net = network_from_checkpoint<T>(ckpt);
  return predict_segments(net, segs, config.training.clip_length, config.training.clip_stride,
                          CropSpec{config.input.crop_height, config.input.crop_width}, config.threads);
}

std::vector<SegmentPrediction> predict(const RunConfig& config, const NetworkCheckpoint& ckpt,
                                       const std::vector<VideoSegment>& segs) {
  return ckpt.precision == Precision::kF64 ? predict_typed<double>(config, ckpt, segs)
                                           : predict_typed<float>(config, ckpt, segs);
}

MetricsReport finish(MetricsReport m, const RunConfig& config, const DataSplit& data) {
  m.split = std::to_string(data.index);
  m.config_hash = config_hash(config);
  m.seed = config.seed;
  return m;
}

}  // namespace

StageOutcome run_stage(const RunConfig& config, Stage stage, const std::vector<VideoSegment>& train,
                       const RunPaths& paths, const StageOptions& options) {
  return config.training.precision == Precision::kF64
             ? run_stage_typed<double>(config, stage, train, paths, options)
             : run_stage_typed<float>(config, stage, train, paths, options);
}

MetricsReport evaluate_checkpoint(const RunConfig& config, const NetworkCheckpoint& checkpoint,
                                  const DataSplit& data) {
  if (data.test.empty()) throw std::invalid_argument("evaluate: empty test set");
  const auto preds = predict(config, checkpoint, data.test);
  return finish(compute_metrics(make_records(data.test, preds, preds), config.architecture.gesture_classes,
                                config.architecture.task_classes),
                config, data);
}

MetricsReport evaluate_baseline(const RunConfig& config, const NetworkCheckpoint& rgb_lstm,
                                const NetworkCheckpoint& flow_lstm, const DataSplit& data) {
  if (data.test.empty()) throw std::invalid_argument("evaluate: empty test set");
  const auto task_preds = predict(config, rgb_lstm, data.test);
  const auto gesture_preds = predict(config, flow_lstm, data.test);
  return finish(compute_metrics(make_records(data.test, gesture_preds, task_preds),
                                config.architecture.gesture_classes, config.architecture.task_classes),
                config, data);
}

PipelineResult run_pipeline(const RunConfig& config, const DataSplit& data, const RunPaths& paths,
                            const PipelineOptions& options) {
  for (Stage s : {Stage::kFrameRgb, Stage::kFrameFlow, Stage::kLstmRgb, Stage::kLstmFlow, Stage::kJoint}) {
    if (options.log) options.log("stage " + std::string(to_string(s)));
    StageOptions so;
    so.weights = stage_weights(s, options.single_task_modalities);
    so.log = options.log;
    run_stage(config, s, data.train, paths, so);
  }
  PipelineResult r;
  r.joint = evaluate_checkpoint(config, load_stage_checkpoint(config, Stage::kJoint, paths), data);
  write_text_file(paths.metrics(), metrics_to_json(r.joint));
  if (options.evaluate_baseline) {
    r.baseline = evaluate_baseline(config, load_stage_checkpoint(config, Stage::kLstmRgb, paths),
                                   load_stage_checkpoint(config, Stage::kLstmFlow, paths), data);
    write_text_file(paths.baseline_metrics(), metrics_to_json(*r.baseline));
  }
  return r;
}

namespace {

double mean_over(const std::vector<ComparisonRow>& rows, std::size_t split, bool joint) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.split != split) continue;
    s += joint ? r.joint.joint_accuracy : r.baseline.joint_accuracy;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("comparison: no runs for split " + std::to_string(split));
  return s / static_cast<double>(n);
}

}  // namespace

double ComparisonReport::baseline_mean(std::size_t split) const { return mean_over(runs, split, false); }
double ComparisonReport::joint_mean(std::size_t split) const { return mean_over(runs, split, true); }

double ComparisonReport::baseline_overall() const {
  double s = 0.0;
  for (auto k : splits) s += baseline_mean(k);
  return splits.empty() ? 0.0 : s / static_cast<double>(splits.size());
}

double ComparisonReport::joint_overall() const {
  double s = 0.0;
  for (auto k : splits) s += joint_mean(k);
  return splits.empty() ? 0.0 : s / static_cast<double>(splits.size());
}

std::string comparison_csv(const ComparisonReport& report) {
  std::ostringstream out;
  out << "split,baseline,joint,difference\n";
  char buf[128];
  for (auto k : report.splits) {
    const double b = 100.0 * report.baseline_mean(k);
    const double j = 100.0 * report.joint_mean(k);
    std::snprintf(buf, sizeof(buf), "%zu,%.2f,%.2f,%.2f\n", k + 1, b, j, j - b);
    out << buf;
  }
  const double b = 100.0 * report.baseline_overall();
  const double j = 100.0 * report.joint_overall();
  std::snprintf(buf, sizeof(buf), "mean,%.2f,%.2f,%.2f\n", b, j, j - b);
  out << buf;
  return out.str();
}

std::string comparison_json(const ComparisonReport& report) {
  using OJson = nlohmann::ordered_json;
  OJson runs = OJson::array();
  for (const auto& r : report.runs) {
    char hash[17];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(r.split_hash));
    runs.push_back(OJson{{"split", r.split},
                         {"seed", r.seed},
                         {"split_hash", hash},
                         {"baseline", OJson::parse(metrics_to_json(r.baseline))},
                         {"joint", OJson::parse(metrics_to_json(r.joint))}});
  }
  OJson j;
  j["runs"] = runs;
  j["baseline_mean"] = report.baseline_overall();
  j["joint_mean"] = report.joint_overall();
  return j.dump(2) + "\n";
}

ComparisonReport run_baseline_comparison(const RunConfig& config, const std::vector<std::size_t>& splits,
                                         const std::vector<std::uint64_t>& seeds, const fs::path& out,
                                         const LogFn& log) {
  if (splits.empty()) throw std::invalid_argument("compare: at least one split is required");
  if (seeds.empty()) throw std::invalid_argument("compare: at least one seed is required");
  ComparisonReport report;
  report.splits = splits;
  for (auto k : splits) {
    const DataSplit data = load_data_split(config, k);
    const auto hash = split_hash(data.split);
    for (auto seed : seeds) {
      RunConfig c = config;
      c.seed = seed;
      c.splits.index = k;
      RunPaths paths{out / ("split" + std::to_string(k)) / ("seed" + std::to_string(seed))};
      write_text_file(paths.config(), config_to_json(c));
      if (log) log("compare split " + std::to_string(k) + " seed " + std::to_string(seed));
      PipelineOptions po;
      po.single_task_modalities = true;
      po.evaluate_baseline = true;
      po.log = log;
      auto result = run_pipeline(c, data, paths, po);
      // Both arms read the same split object; re-hash what each consumed.
      if (split_hash(data.split) != hash) throw std::logic_error("compare: split changed between arms");
      ComparisonRow row;
      row.split = k;
      row.seed = seed;
      row.split_hash = hash;
      row.baseline = *result.baseline;
      row.joint = result.joint;
      report.runs.push_back(std::move(row));
      if (log) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "split %zu seed %llu: baseline %.4f joint %.4f", k,
                      static_cast<unsigned long long>(seed), report.runs.back().baseline.joint_accuracy,
                      report.runs.back().joint.joint_accuracy);
        log(buf);
      }
    }
  }
  write_text_file(out / "comparison.csv", comparison_csv(report));
  write_text_file(out / "comparison.json", comparison_json(report));
  return report;
}

}  // namespace surgrec
