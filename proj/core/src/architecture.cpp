#include "surgrec/architecture.hpp"

#include <algorithm>
#include <stdexcept>

#include "surgrec/errors.hpp"

namespace surgrec {

std::string_view to_string(Modality m) { return m == Modality::kRgb ? "rgb" : "flow"; }

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kFrameRgb: return "frame-rgb";
    case Stage::kFrameFlow: return "frame-flow";
    case Stage::kLstmRgb: return "lstm-rgb";
    case Stage::kLstmFlow: return "lstm-flow";
    case Stage::kJoint: return "joint";
  }
  return "?";
}

Modality parse_modality(std::string_view text) {
  if (text == "rgb") return Modality::kRgb;
  if (text == "flow") return Modality::kFlow;
  throw std::invalid_argument("unknown modality '" + std::string(text) + "' (expected rgb|flow)");
}

Stage parse_stage(std::string_view text) {
  for (Stage s : {Stage::kFrameRgb, Stage::kFrameFlow, Stage::kLstmRgb, Stage::kLstmFlow, Stage::kJoint}) {
    if (to_string(s) == text) return s;
  }
  throw std::invalid_argument("unknown stage '" + std::string(text) + "'");
}

NetworkForm form_of(Stage s) {
  switch (s) {
    case Stage::kFrameRgb:
    case Stage::kFrameFlow: return NetworkForm::kFrame;
    case Stage::kLstmRgb:
    case Stage::kLstmFlow: return NetworkForm::kModalityLstm;
    case Stage::kJoint: return NetworkForm::kJoint;
  }
  return NetworkForm::kJoint;
}

Modality modality_of(Stage s) {
  switch (s) {
    case Stage::kFrameRgb:
    case Stage::kLstmRgb: return Modality::kRgb;
    case Stage::kFrameFlow:
    case Stage::kLstmFlow: return Modality::kFlow;
    case Stage::kJoint: break;
  }
  throw std::invalid_argument("the joint stage consumes both modalities");
}

Stage frame_stage(Modality m) { return m == Modality::kRgb ? Stage::kFrameRgb : Stage::kFrameFlow; }
Stage lstm_stage(Modality m) { return m == Modality::kRgb ? Stage::kLstmRgb : Stage::kLstmFlow; }

ArchitectureSpec ArchitectureSpec::paper() {
  // Zeiler-Fergus body on 227x227 crops.
  ArchitectureSpec spec;
  spec.profile = "paper";
  spec.input_height = 227;
  spec.input_width = 227;
  spec.conv = {
      {96, 7, 2, 1, 3, 2},
      {256, 5, 2, 0, 3, 2},
      {384, 3, 1, 1, 0, 0},
      {384, 3, 1, 1, 0, 0},
      {256, 3, 1, 1, 0, 0},
  };
  spec.final_pool_window = 3;
  spec.final_pool_stride = 2;
  spec.fusion_channels = 256;
  spec.fusion_kernel = 3;
  spec.fusion_pad = 1;
  spec.dense_width = 4096;
  spec.hidden = 256;
  spec.init = InitConfig{InitScheme::kGaussian, 0.01, 1.0};
  return spec;
}

ArchitectureSpec ArchitectureSpec::desk() {
  ArchitectureSpec spec;
  spec.profile = "desk";
  spec.input_height = 56;
  spec.input_width = 56;
  spec.conv = {
      {16, 5, 2, 2, 2, 2},
      {32, 3, 1, 1, 2, 2},
      {32, 3, 1, 1, 0, 0},
      {32, 3, 1, 1, 0, 0},
      {32, 3, 1, 1, 0, 0},
  };
  spec.final_pool_window = 3;
  spec.final_pool_stride = 2;
  spec.fusion_channels = 16;
  spec.fusion_kernel = 3;
  spec.fusion_pad = 1;
  spec.dense_width = 64;
  spec.hidden = 32;
  spec.init = InitConfig{InitScheme::kHe, 0.01, 1.0};
  return spec;
}

namespace {

std::size_t conv_out(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t pad,
                     const std::string& where) {
  if (stride == 0) throw ConfigError(where + ": stride must be positive");
  if (in + 2 * pad < kernel) {
    throw ConfigError(where + ": kernel " + std::to_string(kernel) + " exceeds padded extent " +
                      std::to_string(in + 2 * pad));
  }
  return (in + 2 * pad - kernel) / stride + 1;
}

Extents pooled(Extents e, std::size_t window, std::size_t stride, const std::string& where) {
  if (window == 0) return e;
  e.height = conv_out(e.height, window, stride, 0, where);
  e.width = conv_out(e.width, window, stride, 0, where);
  return e;
}

}  // namespace

Extents ArchitectureSpec::conv5_extents() const {
  Extents e{input_channels, input_height, input_width};
  for (std::size_t i = 0; i < conv.size(); ++i) {
    const auto& layer = conv[i];
    const std::string where = "conv" + std::to_string(i + 1);
    e.height = conv_out(e.height, layer.kernel, layer.stride, layer.pad, where);
    e.width = conv_out(e.width, layer.kernel, layer.stride, layer.pad, where);
    e.channels = layer.out_channels;
    // The last layer's pool is the final pool, applied by the caller.
    if (i + 1 < conv.size()) e = pooled(e, layer.pool_window, layer.pool_stride, where + " pool");
  }
  return e;
}

Extents ArchitectureSpec::stream_pooled_extents() const {
  return pooled(conv5_extents(), final_pool_window, final_pool_stride, "final pool");
}

Extents ArchitectureSpec::fused_pooled_extents() const {
  Extents e = conv5_extents();
  e.height = conv_out(e.height, fusion_kernel, 1, fusion_pad, "fusion conv");
  e.width = conv_out(e.width, fusion_kernel, 1, fusion_pad, "fusion conv");
  e.channels = fusion_channels;
  return pooled(e, final_pool_window, final_pool_stride, "final pool");
}

void ArchitectureSpec::validate() const {
  if (conv.empty()) throw ConfigError("architecture: conv stack is empty");
  if (input_channels == 0 || input_height == 0 || input_width == 0) {
    throw ConfigError("architecture: input extents must be positive");
  }
  for (std::size_t i = 0; i < conv.size(); ++i) {
    if (conv[i].out_channels == 0) {
      throw ConfigError("architecture: conv" + std::to_string(i + 1) + " has no output channels");
    }
    if (conv[i].pool_window != 0 && conv[i].pool_stride == 0) {
      throw ConfigError("architecture: conv" + std::to_string(i + 1) + " pool stride must be positive");
    }
  }
  if (fusion_channels == 0 || dense_width == 0 || hidden == 0 || gesture_classes == 0 ||
      task_classes == 0) {
    throw ConfigError("architecture: fusion, dense, hidden and head widths must be positive");
  }
  (void)stream_pooled_extents();
  (void)fused_pooled_extents();
}

bool ArchitectureSpec::operator==(const ArchitectureSpec& o) const {
  return profile == o.profile && input_channels == o.input_channels &&
         input_height == o.input_height && input_width == o.input_width && conv == o.conv &&
         final_pool_window == o.final_pool_window && final_pool_stride == o.final_pool_stride &&
         fusion_channels == o.fusion_channels && fusion_kernel == o.fusion_kernel &&
         fusion_pad == o.fusion_pad && dense_width == o.dense_width && hidden == o.hidden &&
         gesture_classes == o.gesture_classes && task_classes == o.task_classes &&
         init.scheme == o.init.scheme && init.stddev == o.init.stddev &&
         init.forget_bias == o.init.forget_bias;
}

namespace {

void append_stream(const ArchitectureSpec& spec, std::string_view stream,
                   std::vector<ParamDescriptor>& out) {
  std::size_t in_channels = spec.input_channels;
  for (std::size_t i = 0; i < spec.conv.size(); ++i) {
    const auto& layer = spec.conv[i];
    const std::string prefix = std::string(stream) + ".conv" + std::to_string(i + 1);
    const std::size_t fan_in = in_channels * layer.kernel * layer.kernel;
    out.push_back({prefix + ".bias", Shape{layer.out_channels}, ParamRole::kBias, fan_in});
    out.push_back({prefix + ".weight", Shape{layer.out_channels, in_channels, layer.kernel, layer.kernel},
                   ParamRole::kWeight, fan_in});
    in_channels = layer.out_channels;
  }
}

void append(std::vector<ParamDescriptor>& out, std::vector<ParamDescriptor> more) {
  out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

}  // namespace

std::vector<ParamDescriptor> parameter_layout(const ArchitectureSpec& spec, Stage stage) {
  spec.validate();
  std::vector<ParamDescriptor> out;
  const NetworkForm form = form_of(stage);
  std::size_t head_input = spec.dense_width;
  if (form == NetworkForm::kJoint) {
    append_stream(spec, "rgb", out);
    append_stream(spec, "flow", out);
    const std::size_t fusion_in = spec.fusion_input_channels();
    const std::size_t fan_in = fusion_in * spec.fusion_kernel * spec.fusion_kernel;
    out.push_back({"fusion.bias", Shape{spec.fusion_channels}, ParamRole::kBias, fan_in});
    out.push_back({"fusion.weight",
                   Shape{spec.fusion_channels, fusion_in, spec.fusion_kernel, spec.fusion_kernel},
                   ParamRole::kWeight, fan_in});
    append(out, dense_descriptors("fc", spec.fused_pooled_extents().size(), spec.dense_width));
  } else {
    append_stream(spec, to_string(modality_of(stage)), out);
    append(out, dense_descriptors("fc", spec.stream_pooled_extents().size(), spec.dense_width));
  }
  if (form != NetworkForm::kFrame) {
    append(out, lstm_descriptors("lstm", spec.dense_width, spec.hidden));
    head_input = spec.hidden;
  }
  append(out, dense_descriptors("gesture", head_input, spec.gesture_classes));
  append(out, dense_descriptors("task", head_input, spec.task_classes));
  std::sort(out.begin(), out.end(),
            [](const ParamDescriptor& a, const ParamDescriptor& b) { return a.name < b.name; });
  return out;
}

std::size_t parameter_count(const ArchitectureSpec& spec, Stage stage) {
  std::size_t n = 0;
  for (const auto& d : parameter_layout(spec, stage)) n += shape_numel(d.shape);
  return n;
}

TransferPlan transfer_plan(const ArchitectureSpec& spec, Stage target) {
  TransferPlan plan;
  for (const auto& desc : parameter_layout(spec, target)) {
    const std::string& name = desc.name;
    const bool is_conv = name.find(".conv") != std::string::npos;
    const bool is_fc = name.rfind("fc.", 0) == 0;
    switch (form_of(target)) {
      case NetworkForm::kFrame:
        plan.fresh.push_back(name);
        break;
      case NetworkForm::kModalityLstm:
        if (is_conv || is_fc) {
          plan.copied.push_back({name, frame_stage(modality_of(target))});
        } else {
          plan.fresh.push_back(name);
        }
        break;
      case NetworkForm::kJoint:
        if (is_conv) {
          const Modality m = name.rfind("rgb.", 0) == 0 ? Modality::kRgb : Modality::kFlow;
          plan.copied.push_back({name, lstm_stage(m)});
        } else {
          plan.fresh.push_back(name);
        }
        break;
    }
  }
  return plan;
}

}  // namespace surgrec
