#include "surgrec/config.hpp"

#include <cstdio>

#include "json_io.hpp"
#include "surgrec/errors.hpp"
#include "surgrec/random.hpp"

namespace surgrec {

RunConfig RunConfig::paper() {
  RunConfig c;
  c.profile = "paper";
  c.optimizer = OptimizerState{};
  c.optimizer.base_lr = 0.001;
  c.optimizer.weight_decay = 0.005;
  c.optimizer.step_period = 20000;
  c.optimizer.step_factor = 0.1;
  c.optimizer.clip_threshold = 15.0;
  c.training.max_iters = {40000, 60000, 90000};
  c.training.batch = 8;
  c.training.clip_length = 8;
  c.training.clip_stride = 4;
  c.input = {240, 320, 227, 227, true};
  c.preprocess.source_fps = 30.0;
  c.preprocess.extraction_fps = 8.0;
  c.preprocess.extract_height = 480;
  c.preprocess.extract_width = 640;
  c.preprocess.min_length = 8;
  c.architecture = ArchitectureSpec::paper();
  c.splits = {6, 1200, 0, 2017};
  return c;
}

RunConfig RunConfig::desk() {
  RunConfig c = paper();
  c.profile = "desk";
  c.out_dir = "runs/desk";
  c.optimizer.base_lr = 0.01;
  c.optimizer.weight_decay = 0.0005;
  c.optimizer.step_period = 0;
  c.training.max_iters = {600, 300, 1000};
  c.input = {64, 64, 56, 56, true};
  c.architecture = ArchitectureSpec::desk();
  c.synth = SynthConfig{};
  c.splits = {3, 120, 0, 2017};
  return c;
}

RunConfig RunConfig::for_profile(const std::string& name) {
  if (name == "paper") return paper();
  if (name == "desk") return desk();
  throw ConfigError("profile: unknown profile '" + name + "' (expected paper|desk)");
}

void RunConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& what) {
    throw ConfigError("config field '" + field + "': " + what);
  };
  if (!(optimizer.base_lr >= 0.0)) fail("optimizer.base_lr", "must be nonnegative");
  if (!(optimizer.weight_decay >= 0.0)) fail("optimizer.weight_decay", "must be nonnegative");
  if (!(optimizer.step_factor > 0.0)) fail("optimizer.step_factor", "must be positive");
  if (!(optimizer.clip_threshold > 0.0)) fail("optimizer.clip_threshold", "must be positive");
  if (training.batch == 0) fail("training.batch", "must be positive");
  if (training.clip_length == 0) fail("training.clip_length", "must be positive");
  if (training.clip_stride == 0) fail("training.clip_stride", "must be positive");
  if (input.crop_height > input.resize_height || input.crop_width > input.resize_width) {
    fail("input.crop_height", "crop must fit the resized frame");
  }
  if (input.crop_height != architecture.input_height || input.crop_width != architecture.input_width) {
    fail("input.crop_height", "crop must equal the architecture input size");
  }
  if (!(preprocess.source_fps > 0.0)) fail("preprocess.source_fps", "must be positive");
  if (!(preprocess.extraction_fps > 0.0)) fail("preprocess.extraction_fps", "must be positive");
  if (!(preprocess.clip_mag > 0.0)) fail("preprocess.clip_mag", "must be positive");
  if (splits.count == 0) fail("splits.count", "must be positive");
  if (splits.index >= splits.count) fail("splits.index", "must be below splits.count");
  try {
    architecture.validate();
    synth.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

std::uint64_t RunConfig::max_iterations(Stage stage) const {
  switch (form_of(stage)) {
    case NetworkForm::kFrame: return training.max_iters.frame;
    case NetworkForm::kModalityLstm: return training.max_iters.lstm;
    case NetworkForm::kJoint: return training.max_iters.joint;
  }
  return 0;
}

namespace {

using OJson = nlohmann::ordered_json;

OJson flow_json(const FlowParams& f) {
  return OJson{{"alpha", f.alpha},
               {"iterations", f.iterations},
               {"levels", f.levels},
               {"warps", f.warps},
               {"presmooth_sigma", f.presmooth_sigma}};
}

void flow_from(const Json& j, FlowParams& f) {
  j.at("alpha").get_to(f.alpha);
  j.at("iterations").get_to(f.iterations);
  j.at("levels").get_to(f.levels);
  j.at("warps").get_to(f.warps);
  j.at("presmooth_sigma").get_to(f.presmooth_sigma);
}

OJson to_ojson(const RunConfig& c) {
  OJson j;
  j["profile"] = c.profile;
  j["seed"] = c.seed;
  j["data_root"] = c.data_root;
  j["out_dir"] = c.out_dir;
  j["threads"] = c.threads;
  j["optimizer"] = OJson{{"base_lr", c.optimizer.base_lr},
                         {"weight_decay", c.optimizer.weight_decay},
                         {"step_period", c.optimizer.step_period},
                         {"step_factor", c.optimizer.step_factor},
                         {"clip_threshold", c.optimizer.clip_threshold}};
  j["training"] = OJson{{"max_iters", OJson{{"frame", c.training.max_iters.frame},
                                            {"lstm", c.training.max_iters.lstm},
                                            {"joint", c.training.max_iters.joint}}},
                        {"batch", c.training.batch},
                        {"clip_length", c.training.clip_length},
                        {"clip_stride", c.training.clip_stride},
                        {"checkpoint_interval", c.training.checkpoint_interval},
                        {"precision", std::string(to_string(c.training.precision))}};
  j["input"] = OJson{{"resize_height", c.input.resize_height},
                     {"resize_width", c.input.resize_width},
                     {"crop_height", c.input.crop_height},
                     {"crop_width", c.input.crop_width},
                     {"mirror", c.input.mirror}};
  j["preprocess"] = OJson{{"source_fps", c.preprocess.source_fps},
                          {"extraction_fps", c.preprocess.extraction_fps},
                          {"extract_height", c.preprocess.extract_height},
                          {"extract_width", c.preprocess.extract_width},
                          {"min_length", c.preprocess.min_length},
                          {"clip_mag", c.preprocess.clip_mag},
                          {"flow", flow_json(c.preprocess.flow)}};
  j["architecture"] = OJson::parse(Json(c.architecture).dump());
  j["synth"] = OJson{{"tasks", c.synth.tasks},
                     {"gestures", c.synth.gestures},
                     {"segments", c.synth.segments},
                     {"height", c.synth.height},
                     {"width", c.synth.width},
                     {"min_length", c.synth.min_length},
                     {"max_length", c.synth.max_length},
                     {"speed", c.synth.speed},
                     {"sprite_radius", c.synth.sprite_radius},
                     {"noise", c.synth.noise},
                     {"clip_mag", c.synth.clip_mag},
                     {"flow", flow_json(c.synth.flow)},
                     {"seed", c.synth.seed}};
  j["splits"] = OJson{{"count", c.splits.count},
                      {"train", c.splits.train},
                      {"index", c.splits.index},
                      {"seed", c.splits.seed}};
  return j;
}

RunConfig from_checked_json(const Json& j) {
  RunConfig c;
  j.at("profile").get_to(c.profile);
  j.at("seed").get_to(c.seed);
  j.at("data_root").get_to(c.data_root);
  j.at("out_dir").get_to(c.out_dir);
  j.at("threads").get_to(c.threads);
  const auto& o = j.at("optimizer");
  o.at("base_lr").get_to(c.optimizer.base_lr);
  o.at("weight_decay").get_to(c.optimizer.weight_decay);
  o.at("step_period").get_to(c.optimizer.step_period);
  o.at("step_factor").get_to(c.optimizer.step_factor);
  o.at("clip_threshold").get_to(c.optimizer.clip_threshold);
  const auto& t = j.at("training");
  t.at("max_iters").at("frame").get_to(c.training.max_iters.frame);
  t.at("max_iters").at("lstm").get_to(c.training.max_iters.lstm);
  t.at("max_iters").at("joint").get_to(c.training.max_iters.joint);
  t.at("batch").get_to(c.training.batch);
  t.at("clip_length").get_to(c.training.clip_length);
  t.at("clip_stride").get_to(c.training.clip_stride);
  t.at("checkpoint_interval").get_to(c.training.checkpoint_interval);
  c.training.precision = parse_precision(t.at("precision").get<std::string>());
  const auto& in = j.at("input");
  in.at("resize_height").get_to(c.input.resize_height);
  in.at("resize_width").get_to(c.input.resize_width);
  in.at("crop_height").get_to(c.input.crop_height);
  in.at("crop_width").get_to(c.input.crop_width);
  in.at("mirror").get_to(c.input.mirror);
  const auto& p = j.at("preprocess");
  p.at("source_fps").get_to(c.preprocess.source_fps);
  p.at("extraction_fps").get_to(c.preprocess.extraction_fps);
  p.at("extract_height").get_to(c.preprocess.extract_height);
  p.at("extract_width").get_to(c.preprocess.extract_width);
  p.at("min_length").get_to(c.preprocess.min_length);
  p.at("clip_mag").get_to(c.preprocess.clip_mag);
  flow_from(p.at("flow"), c.preprocess.flow);
  j.at("architecture").get_to(c.architecture);
  const auto& s = j.at("synth");
  s.at("tasks").get_to(c.synth.tasks);
  s.at("gestures").get_to(c.synth.gestures);
  s.at("segments").get_to(c.synth.segments);
  s.at("height").get_to(c.synth.height);
  s.at("width").get_to(c.synth.width);
  s.at("min_length").get_to(c.synth.min_length);
  s.at("max_length").get_to(c.synth.max_length);
  s.at("speed").get_to(c.synth.speed);
  s.at("sprite_radius").get_to(c.synth.sprite_radius);
  s.at("noise").get_to(c.synth.noise);
  s.at("clip_mag").get_to(c.synth.clip_mag);
  flow_from(s.at("flow"), c.synth.flow);
  s.at("seed").get_to(c.synth.seed);
  const auto& sp = j.at("splits");
  sp.at("count").get_to(c.splits.count);
  sp.at("train").get_to(c.splits.train);
  sp.at("index").get_to(c.splits.index);
  sp.at("seed").get_to(c.splits.seed);
  return c;
}

std::string type_name(const Json& j) {
  if (j.is_number_unsigned()) return "nonnegative integer";
  if (j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  return j.type_name();
}

// Every field in `user` must exist in `defaults` with a compatible type.
void check_fields(const Json& defaults, const Json& user, const std::string& path) {
  const std::string where = path.empty() ? "<root>" : path;
  auto mismatch = [&](const std::string& expected) {
    throw ConfigError("config field '" + where + "': expected " + expected + ", got " + user.type_name() +
                      " " + user.dump());
  };
  if (defaults.is_object()) {
    if (!user.is_object()) mismatch("object");
    for (const auto& [key, value] : user.items()) {
      const std::string child = path.empty() ? key : path + "." + key;
      if (!defaults.contains(key)) throw ConfigError("unknown config field '" + child + "'");
      check_fields(defaults.at(key), value, child);
    }
  } else if (defaults.is_array()) {
    if (!user.is_array()) mismatch("list");
    if (!defaults.empty()) {
      for (std::size_t i = 0; i < user.size(); ++i) {
        check_fields(defaults.at(0), user.at(i), path + "[" + std::to_string(i) + "]");
      }
    }
  } else if (defaults.is_number_unsigned()) {
    if (!user.is_number_unsigned()) mismatch(type_name(defaults));
  } else if (defaults.is_number_integer()) {
    if (!user.is_number_integer()) mismatch(type_name(defaults));
  } else if (defaults.is_number()) {
    if (!user.is_number()) mismatch("number");
  } else if (defaults.is_boolean()) {
    if (!user.is_boolean()) mismatch("boolean");
  } else if (defaults.is_string()) {
    if (!user.is_string()) mismatch("string");
  }
}

RunConfig merge(const Json& user) {
  const std::string profile = user.contains("profile") && user.at("profile").is_string()
                                  ? user.at("profile").get<std::string>()
                                  : std::string("desk");
  Json merged = Json::parse(to_ojson(RunConfig::for_profile(profile)).dump());
  check_fields(merged, user, "");
  merged.merge_patch(user);
  RunConfig c;
  try {
    c = from_checked_json(merged);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace

std::string config_to_json(const RunConfig& config) { return to_ojson(config).dump(2) + "\n"; }

RunConfig config_from_json(const std::string& text) {
  Json user;
  try {
    user = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  return merge(user);
}

RunConfig apply_overrides(const RunConfig& config, const std::vector<std::string>& assignments) {
  if (assignments.empty()) return config;
  Json patch = Json::object();
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + a + "' must look like key.path=value");
    }
    const std::string key = a.substr(0, eq);
    const std::string raw = a.substr(eq + 1);
    Json value;
    try {
      value = Json::parse(raw);
    } catch (const Json::parse_error&) {
      value = raw;
    }
    Json* node = &patch;
    std::size_t pos = 0;
    while (true) {
      const auto dot = key.find('.', pos);
      const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
      if (part.empty()) throw ConfigError("override '" + a + "' has an empty key segment");
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      node = &(*node)[part];
      pos = dot + 1;
    }
  }
  Json base = Json::parse(to_ojson(config).dump());
  if (patch.contains("profile")) {
    // A new profile resets every default underneath the current values.
    throw ConfigError("override 'profile' is not supported; pass --profile or a config file");
  }
  check_fields(base, patch, "");
  base.merge_patch(patch);
  RunConfig c;
  try {
    c = from_checked_json(base);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string config_hash(const RunConfig& config) {
  OJson j = to_ojson(config);
  j.erase("data_root");
  j.erase("out_dir");
  j.erase("threads");
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

}  // namespace surgrec
