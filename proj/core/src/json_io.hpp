#pragma once

// nlohmann/json bindings for the plain config structs. Private to the core
// library so the public headers stay free of the JSON dependency.

#include "json.hpp"
#include "surgrec/architecture.hpp"
#include "surgrec/optim.hpp"

namespace surgrec {

using Json = nlohmann::json;

inline std::string_view init_scheme_name(InitScheme s) {
  return s == InitScheme::kHe ? "he" : "gaussian";
}

inline InitScheme parse_init_scheme(const std::string& text) {
  if (text == "he") return InitScheme::kHe;
  if (text == "gaussian") return InitScheme::kGaussian;
  throw std::invalid_argument("unknown init scheme '" + text + "' (expected gaussian|he)");
}

inline void to_json(Json& j, const InitConfig& c) {
  j = Json{{"scheme", init_scheme_name(c.scheme)}, {"stddev", c.stddev}, {"forget_bias", c.forget_bias}};
}

inline void from_json(const Json& j, InitConfig& c) {
  c.scheme = parse_init_scheme(j.at("scheme").get<std::string>());
  j.at("stddev").get_to(c.stddev);
  j.at("forget_bias").get_to(c.forget_bias);
}

inline void to_json(Json& j, const ConvLayerSpec& c) {
  j = Json{{"out_channels", c.out_channels}, {"kernel", c.kernel},           {"stride", c.stride},
           {"pad", c.pad},                   {"pool_window", c.pool_window}, {"pool_stride", c.pool_stride}};
}

inline void from_json(const Json& j, ConvLayerSpec& c) {
  j.at("out_channels").get_to(c.out_channels);
  j.at("kernel").get_to(c.kernel);
  j.at("stride").get_to(c.stride);
  j.at("pad").get_to(c.pad);
  j.at("pool_window").get_to(c.pool_window);
  j.at("pool_stride").get_to(c.pool_stride);
}

inline void to_json(Json& j, const ArchitectureSpec& s) {
  j = Json{{"profile", s.profile},
           {"input_channels", s.input_channels},
           {"input_height", s.input_height},
           {"input_width", s.input_width},
           {"conv", s.conv},
           {"final_pool_window", s.final_pool_window},
           {"final_pool_stride", s.final_pool_stride},
           {"fusion_channels", s.fusion_channels},
           {"fusion_kernel", s.fusion_kernel},
           {"fusion_pad", s.fusion_pad},
           {"dense_width", s.dense_width},
           {"hidden", s.hidden},
           {"gesture_classes", s.gesture_classes},
           {"task_classes", s.task_classes},
           {"init", s.init}};
}

inline void from_json(const Json& j, ArchitectureSpec& s) {
  j.at("profile").get_to(s.profile);
  j.at("input_channels").get_to(s.input_channels);
  j.at("input_height").get_to(s.input_height);
  j.at("input_width").get_to(s.input_width);
  j.at("conv").get_to(s.conv);
  j.at("final_pool_window").get_to(s.final_pool_window);
  j.at("final_pool_stride").get_to(s.final_pool_stride);
  j.at("fusion_channels").get_to(s.fusion_channels);
  j.at("fusion_kernel").get_to(s.fusion_kernel);
  j.at("fusion_pad").get_to(s.fusion_pad);
  j.at("dense_width").get_to(s.dense_width);
  j.at("hidden").get_to(s.hidden);
  j.at("gesture_classes").get_to(s.gesture_classes);
  j.at("task_classes").get_to(s.task_classes);
  j.at("init").get_to(s.init);
}

inline void to_json(Json& j, const OptimizerState& o) {
  j = Json{{"iteration", o.iteration},     {"base_lr", o.base_lr},
           {"weight_decay", o.weight_decay}, {"step_period", o.step_period},
           {"step_factor", o.step_factor},   {"clip_threshold", o.clip_threshold}};
}

inline void from_json(const Json& j, OptimizerState& o) {
  j.at("iteration").get_to(o.iteration);
  j.at("base_lr").get_to(o.base_lr);
  j.at("weight_decay").get_to(o.weight_decay);
  j.at("step_period").get_to(o.step_period);
  j.at("step_factor").get_to(o.step_factor);
  j.at("clip_threshold").get_to(o.clip_threshold);
}

}  // namespace surgrec
