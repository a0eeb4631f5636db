#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "surgrec/config.hpp"
#include "surgrec/errors.hpp"
#include "surgrec/flow.hpp"
#include "surgrec/image.hpp"
#include "surgrec/pipeline.hpp"
#include "surgrec/splits.hpp"
#include "surgrec/synth.hpp"

namespace surgrec::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_file;
  std::string profile;
  std::vector<std::string> sets;
  std::string data_root;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> split;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_file, "JSON run config (profile defaults fill missing fields)");
  app->add_option("--profile", c.profile, "Start from a built-in profile: paper or desk");
  app->add_option("--set", c.sets, "Override a config field, e.g. --set optimizer.base_lr=0.01")
      ->type_name("KEY=VALUE");
  app->add_option("--data-root", c.data_root, "Dataset root (env SURGREC_DATA_ROOT)");
  app->add_option("--out", c.out, "Run output directory");
  app->add_option("--seed", c.seed, "Run seed");
  app->add_option("--threads", c.threads, "Worker threads (env SURGREC_THREADS)");
  app->add_option("--split", c.split, "Split index used for training and evaluation");
}

std::string getenv_str(const char* name) {
  const char* v = std::getenv(name);
  return v != nullptr ? std::string(v) : std::string();
}

RunConfig effective_config(const Common& c) {
  RunConfig cfg;
  if (!c.config_file.empty()) {
    std::string text;
    try {
      text = read_text_file(c.config_file);
    } catch (const IoError&) {
      throw ConfigError("cannot read config file '" + c.config_file + "'");
    }
    cfg = config_from_json(text);
    if (!c.profile.empty() && c.profile != cfg.profile) {
      throw ConfigError("--profile " + c.profile + " conflicts with profile '" + cfg.profile + "' in " +
                        c.config_file);
    }
  } else if (!c.profile.empty()) {
    cfg = RunConfig::for_profile(c.profile);
  } else {
    throw UsageError("no config given: pass --config FILE or --profile paper|desk");
  }
  std::vector<std::string> sets;
  if (auto v = getenv_str("SURGREC_DATA_ROOT"); !v.empty()) sets.push_back("data_root=\"" + v + "\"");
  if (auto v = getenv_str("SURGREC_THREADS"); !v.empty()) sets.push_back("threads=" + v);
  if (!c.data_root.empty()) sets.push_back("data_root=\"" + c.data_root + "\"");
  if (!c.out.empty()) sets.push_back("out_dir=\"" + c.out + "\"");
  if (c.seed) sets.push_back("seed=" + std::to_string(*c.seed));
  if (c.threads) sets.push_back("threads=" + std::to_string(*c.threads));
  if (c.split) sets.push_back("splits.index=" + std::to_string(*c.split));
  sets.insert(sets.end(), c.sets.begin(), c.sets.end());
  cfg = apply_overrides(cfg, sets);
  if (cfg.threads == 0) throw ConfigError("config field 'threads': must be positive");
  return cfg;
}

// The frozen config beside a run's outputs. A directory keeps one config.
void freeze_config(const RunConfig& cfg, const fs::path& path) {
  if (fs::exists(path)) {
    const auto existing = config_from_json(read_text_file(path));
    if (config_hash(existing) != config_hash(cfg)) {
      throw ConfigError("'" + path.string() + "' holds a different config (hash " + config_hash(existing) +
                        ", this run " + config_hash(cfg) + "); use another --out");
    }
  }
  write_text_file(path, config_to_json(cfg));
}

LogFn logger(std::ostream& err) {
  return [&err](const std::string& line) { err << line << '\n' << std::flush; };
}

Modality modality_option(const std::string& text) {
  try {
    return parse_modality(text);
  } catch (const std::exception&) {
    throw UsageError("--modality must be rgb or flow, got '" + text + "'");
  }
}

std::vector<std::size_t> parse_index_list(const std::string& text, const char* flag) {
  std::vector<std::size_t> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + " expects a comma-separated list of integers, got '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + " is empty");
  return out;
}

struct Commands {
  Common common;
  // synth
  // preprocess
  std::string raw;
  // flow
  std::string flow_a, flow_b, flow_output;
  std::optional<double> flow_clip_mag;
  // splits
  std::optional<std::size_t> total, train_count, n_splits;
  std::optional<std::uint64_t> split_seed;
  std::string splits_output;
  // train-*
  std::string modality = "rgb";
  bool single_task = false;
  bool with_prerequisites = false;
  // eval
  std::string eval_stage = "joint";
  std::string checkpoint;
  std::string report;
  bool baseline = false;
  // compare
  std::string compare_splits;
  std::string compare_seeds = "1,2,3";
};

struct App {
  CLI::App app{"Two-stream multi-task recurrent classifier for surgical gestures and tasks", "surgrec"};
  Commands cmd;
  CLI::App* synth = nullptr;
  CLI::App* preprocess = nullptr;
  CLI::App* flow = nullptr;
  CLI::App* splits = nullptr;
  CLI::App* train_frame = nullptr;
  CLI::App* train_lstm = nullptr;
  CLI::App* train_joint = nullptr;
  CLI::App* eval = nullptr;
  CLI::App* compare = nullptr;

  App() {
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Print help for every subcommand");

    synth = app.add_subcommand("synth", "Generate the synthetic appearance/motion dataset into <data_root>/processed");
    add_common(synth, cmd.common);

    preprocess = app.add_subcommand("preprocess", "Cut raw task videos into gesture segments with flow frames");
    add_common(preprocess, cmd.common);
    preprocess->add_option("--raw", cmd.raw, "Raw root: <task>/<trial>/frames/*.png and transcript.txt")
        ->required();

    flow = app.add_subcommand("flow", "Horn-Schunck flow between two PNG frames, written as flow-RGB");
    flow->add_option("--a", cmd.flow_a, "First frame (PNG)")->required();
    flow->add_option("--b", cmd.flow_b, "Second frame (PNG)")->required();
    flow->add_option("--output", cmd.flow_output, "Output flow-RGB PNG")->required();
    flow->add_option("--clip-mag", cmd.flow_clip_mag, "Flow magnitude mapped to full scale");
    add_common(flow, cmd.common);

    splits = app.add_subcommand("splits", "Write random train/test partitions as JSON");
    splits->add_option("--total", cmd.total, "Number of ids (default: segments under the data root)");
    splits->add_option("--train", cmd.train_count, "Training ids per split");
    splits->add_option("--n", cmd.n_splits, "Number of splits");
    splits->add_option("--split-seed", cmd.split_seed, "Seed for the partitions");
    splits->add_option("--output", cmd.splits_output, "Output file (default <data_root>/splits.json)");
    add_common(splits, cmd.common);

    train_frame = app.add_subcommand("train-frame", "Train a per-frame CNN for one modality");
    add_common(train_frame, cmd.common);
    train_frame->add_option("--modality", cmd.modality, "rgb or flow")->required();
    train_frame->add_flag("--single-task", cmd.single_task,
                          "Train only the task head (rgb) or the gesture head (flow)");

    train_lstm = app.add_subcommand("train-lstm", "Train a per-modality recurrent network from its frame CNN");
    add_common(train_lstm, cmd.common);
    train_lstm->add_option("--modality", cmd.modality, "rgb or flow")->required();
    train_lstm->add_flag("--single-task", cmd.single_task,
                         "Train only the task head (rgb) or the gesture head (flow)");
    train_lstm->add_flag("--with-prerequisites", cmd.with_prerequisites, "Train the frame CNN first");

    train_joint = app.add_subcommand("train-joint", "Train the joint two-stream network from both recurrent networks");
    add_common(train_joint, cmd.common);
    train_joint->add_flag("--with-prerequisites", cmd.with_prerequisites,
                          "Train frame and recurrent stages first");

    eval = app.add_subcommand("eval", "Clip-averaged evaluation on the test split; writes a metrics report");
    add_common(eval, cmd.common);
    eval->add_option("--stage", cmd.eval_stage, "Stage to evaluate: joint, lstm-rgb, lstm-flow, frame-rgb, frame-flow");
    eval->add_option("--checkpoint", cmd.checkpoint, "Checkpoint file (default <out>/checkpoints/<stage>.ckpt)");
    eval->add_option("--report", cmd.report, "Report path (default <out>/metrics.json for joint)");
    eval->add_flag("--baseline", cmd.baseline,
                   "Evaluate the separate pipelines instead: task from lstm-rgb, gesture from lstm-flow");

    compare = app.add_subcommand("compare", "Joint model vs separate single-modality pipelines over splits and seeds");
    add_common(compare, cmd.common);
    compare->add_option("--splits", cmd.compare_splits, "Comma-separated split indices (default: all)");
    compare->add_option("--seeds", cmd.compare_seeds, "Comma-separated seeds")->capture_default_str();
  }
};

int do_synth(const Commands& c, std::ostream& out, std::ostream& err) {
  const auto cfg = effective_config(c.common);
  RunLock lock(fs::path(cfg.data_root) / ".lock");
  const auto log = logger(err);
  log("synth: " + std::to_string(cfg.synth.segments) + " segments into " + processed_dir(cfg.data_root).string());
  const auto segs = synth_generate(cfg.synth, cfg.threads);
  if (fs::exists(processed_dir(cfg.data_root))) fs::remove_all(processed_dir(cfg.data_root));
  write_archive(segs, cfg.data_root, cfg.threads);
  write_text_file(fs::path(cfg.data_root) / "synth_config.json", config_to_json(cfg));
  out << "wrote " << segs.size() << " segments to " << processed_dir(cfg.data_root).string() << '\n';
  return 0;
}

int do_preprocess(const Commands& c, std::ostream& out, std::ostream& err) {
  const auto cfg = effective_config(c.common);
  RunLock lock(fs::path(cfg.data_root) / ".lock");
  const auto report = preprocess_dataset(c.raw, cfg.data_root, cfg.preprocess, cfg.threads, logger(err));
  out << "videos " << report.videos << ", segments " << report.segments << ", dropped short "
      << report.dropped_short << ", dropped G7 " << report.dropped_g7 << '\n';
  return 0;
}

int do_flow(const Commands& c, std::ostream& out) {
  FlowParams params;
  double clip_mag = PreprocessConfig{}.clip_mag;
  if (!c.common.config_file.empty() || !c.common.profile.empty()) {
    const auto cfg = effective_config(c.common);
    params = cfg.preprocess.flow;
    clip_mag = cfg.preprocess.clip_mag;
  }
  if (c.flow_clip_mag) clip_mag = *c.flow_clip_mag;
  if (!(clip_mag > 0.0)) throw ConfigError("--clip-mag must be positive");
  const auto a = read_png(c.flow_a);
  const auto b = read_png(c.flow_b);
  const auto f = compute_flow(a, b, params);
  write_png(encode_flow_rgb(f, clip_mag), c.flow_output);
  out << "wrote " << c.flow_output << '\n';
  return 0;
}

int do_splits(const Commands& c, std::ostream& out) {
  SplitConfig sc;
  std::string data_root = "data";
  const bool have_config = !c.common.config_file.empty() || !c.common.profile.empty();
  if (have_config) {
    const auto cfg = effective_config(c.common);
    sc = cfg.splits;
    data_root = cfg.data_root;
  } else if (!c.total) {
    throw UsageError("splits needs --total, or a config (--config/--profile) to read ids from the data root");
  } else if (!c.common.data_root.empty()) {
    data_root = c.common.data_root;
  }
  if (c.train_count) sc.train = *c.train_count;
  if (c.n_splits) sc.count = *c.n_splits;
  if (c.split_seed) sc.seed = *c.split_seed;
  const auto ids = c.total ? numbered_ids(*c.total) : list_segments(data_root);
  const auto splits = make_splits(ids, sc.count, sc.train, sc.seed);
  const fs::path path = c.splits_output.empty() ? fs::path(data_root) / "splits.json" : fs::path(c.splits_output);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_splits(splits, path);
  out << "wrote " << splits.size() << " splits (" << splits.front().train.size() << " train / "
      << splits.front().test.size() << " test) to " << path.string() << '\n';
  return 0;
}

int do_train(const Commands& c, std::vector<Stage> stages, std::ostream& out, std::ostream& err) {
  const auto cfg = effective_config(c.common);
  const RunPaths paths{cfg.out_dir};
  fs::create_directories(paths.out);
  RunLock lock(paths.lock());
  freeze_config(cfg, paths.config());
  const auto log = logger(err);
  // Fail on a missing prerequisite before loading any data.
  for (auto p : initializers(stages.front())) {
    if (std::find(stages.begin(), stages.end(), p) == stages.end()) load_stage_checkpoint(cfg, p, paths);
  }
  const auto data = load_data_split(cfg, cfg.splits.index);
  for (auto s : stages) {
    log("stage " + std::string(to_string(s)) + ": " + std::to_string(data.train.size()) + " training segments, " +
        std::to_string(cfg.max_iterations(s)) + " iterations");
    StageOptions so;
    so.weights = stage_weights(s, c.single_task);
    so.log = log;
    run_stage(cfg, s, data.train, paths, so);
    out << "wrote " << paths.checkpoint(s).string() << '\n';
  }
  return 0;
}

int do_eval(const Commands& c, std::ostream& out, std::ostream& err) {
  const auto cfg = effective_config(c.common);
  const RunPaths paths{cfg.out_dir};
  MetricsReport report;
  fs::path report_path;
  if (c.baseline) {
    const auto rgb = load_stage_checkpoint(cfg, Stage::kLstmRgb, paths);
    const auto flow = load_stage_checkpoint(cfg, Stage::kLstmFlow, paths);
    const auto data = load_data_split(cfg, cfg.splits.index);
    report = evaluate_baseline(cfg, rgb, flow, data);
    report_path = paths.baseline_metrics();
  } else {
    Stage stage;
    try {
      stage = parse_stage(c.eval_stage);
    } catch (const std::exception&) {
      throw UsageError("--stage: unknown stage '" + c.eval_stage + "'");
    }
    NetworkCheckpoint ckpt;
    if (c.checkpoint.empty()) {
      ckpt = load_stage_checkpoint(cfg, stage, paths);
    } else {
      if (!fs::exists(c.checkpoint)) throw IoError("missing checkpoint: expected '" + c.checkpoint + "'");
      ckpt = load_checkpoint(c.checkpoint);
    }
    const auto data = load_data_split(cfg, cfg.splits.index);
    logger(err)("eval " + std::string(to_string(ckpt.stage)) + " on " + std::to_string(data.test.size()) +
                " test segments");
    report = evaluate_checkpoint(cfg, ckpt, data);
    report_path = stage == Stage::kJoint ? paths.metrics()
                                         : paths.out / ("metrics_" + std::string(to_string(stage)) + ".json");
  }
  if (!c.report.empty()) report_path = c.report;
  const auto text = metrics_to_json(report);
  write_text_file(report_path, text);
  out << text;
  return 0;
}

int do_compare(const Commands& c, std::ostream& out, std::ostream& err) {
  const auto cfg = effective_config(c.common);
  std::vector<std::size_t> splits;
  if (c.compare_splits.empty()) {
    for (std::size_t k = 0; k < cfg.splits.count; ++k) splits.push_back(k);
  } else {
    splits = parse_index_list(c.compare_splits, "--splits");
  }
  std::vector<std::uint64_t> seeds;
  for (auto s : parse_index_list(c.compare_seeds, "--seeds")) seeds.push_back(s);
  const RunPaths paths{cfg.out_dir};
  fs::create_directories(paths.out);
  RunLock lock(paths.lock());
  freeze_config(cfg, paths.config());
  const auto report = run_baseline_comparison(cfg, splits, seeds, paths.out, logger(err));
  out << comparison_csv(report);
  return 0;
}

int dispatch(App& a, std::ostream& out, std::ostream& err) {
  const auto& c = a.cmd;
  if (a.synth->parsed()) return do_synth(c, out, err);
  if (a.preprocess->parsed()) return do_preprocess(c, out, err);
  if (a.flow->parsed()) return do_flow(c, out);
  if (a.splits->parsed()) return do_splits(c, out);
  if (a.train_frame->parsed()) {
    return do_train(c, {frame_stage(modality_option(c.modality))}, out, err);
  }
  if (a.train_lstm->parsed()) {
    const auto m = modality_option(c.modality);
    std::vector<Stage> stages;
    if (c.with_prerequisites) stages.push_back(frame_stage(m));
    stages.push_back(lstm_stage(m));
    return do_train(c, stages, out, err);
  }
  if (a.train_joint->parsed()) {
    std::vector<Stage> stages;
    if (c.with_prerequisites) stages = prerequisites(Stage::kJoint);
    stages.push_back(Stage::kJoint);
    return do_train(c, stages, out, err);
  }
  if (a.eval->parsed()) return do_eval(c, out, err);
  if (a.compare->parsed()) return do_compare(c, out, err);
  return 2;
}

CLI::App* parsed_subcommand(App& a) {
  for (auto* s : a.app.get_subcommands()) return s;
  return &a.app;
}

}  // namespace

std::string help_text() {
  App a;
  return a.app.help("", CLI::AppFormatMode::All);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  App a;
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    a.app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << parsed_subcommand(a)->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << a.app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "surgrec: " << e.what() << "\n\n" << parsed_subcommand(a)->help();
    return 2;
  }
  CLI::App* sub = parsed_subcommand(a);
  const std::string name = sub->get_name();
  try {
    return dispatch(a, out, err);
  } catch (const UsageError& e) {
    err << "surgrec " << name << ": " << e.what() << "\n\n" << sub->help();
    return 2;
  } catch (const ConfigError& e) {
    err << "surgrec " << name << ": config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "surgrec " << name << ": error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace surgrec::cli
