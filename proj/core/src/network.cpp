#include "surgrec/network.hpp"

#include <algorithm>
#include <set>

#include "surgrec/checkpoint.hpp"
#include "surgrec/errors.hpp"
#include "surgrec/ops.hpp"
#include "surgrec/random.hpp"

namespace surgrec {

template <typename T>
Network<T>::Network(ArchitectureSpec spec, Stage stage, ParameterSet<T> params)
    : spec_(std::move(spec)), stage_(stage), params_(std::move(params)) {
  const auto layout = parameter_layout(spec_, stage_);
  if (layout.size() != params_.size()) {
    throw DimensionError("network " + std::string(to_string(stage_)) + " expects " +
                         std::to_string(layout.size()) + " parameters, got " +
                         std::to_string(params_.size()));
  }
  for (const auto& desc : layout) {
    if (!params_.contains(desc.name)) {
      throw DimensionError("network " + std::string(to_string(stage_)) + " is missing parameter '" +
                           desc.name + "'");
    }
    if (params_.at(desc.name).shape() != desc.shape) {
      throw DimensionError("parameter '" + desc.name + "' has shape " +
                           shape_str(params_.at(desc.name).shape()) + ", expected " +
                           shape_str(desc.shape));
    }
  }
}

template <typename T>
Tensor<T> Network<T>::conv5(Tape<T>& tape, Modality stream, const Tensor<T>& frame) const {
  if (form() != NetworkForm::kJoint && stream != single_modality()) {
    throw std::invalid_argument("network " + std::string(to_string(stage_)) + " has no " +
                                std::string(to_string(stream)) + " stream");
  }
  const Shape expected{spec_.input_channels, spec_.input_height, spec_.input_width};
  if (frame.shape() != expected) {
    throw DimensionError("frame " + shape_str(frame.shape()) + " does not match network input " +
                         shape_str(expected));
  }
  const std::string prefix = std::string(to_string(stream)) + ".conv";
  Tensor<T> x = frame;
  for (std::size_t i = 0; i < spec_.conv.size(); ++i) {
    const auto& layer = spec_.conv[i];
    const std::string name = prefix + std::to_string(i + 1);
    x = ops::conv2d(tape, x, params_.at(name + ".weight"), params_.at(name + ".bias"), layer.stride,
                    layer.pad);
    x = ops::relu(tape, x);
    if (i + 1 < spec_.conv.size() && layer.pool_window != 0) {
      x = ops::max_pool2d(tape, x, layer.pool_window, layer.pool_stride);
    }
  }
  return x;
}

template <typename T>
Tensor<T> Network<T>::fused_features(Tape<T>& tape, const Tensor<T>& conv5_rgb,
                                     const Tensor<T>& conv5_flow) const {
  if (form() != NetworkForm::kJoint) {
    throw std::invalid_argument("fused_features requires the joint network");
  }
  Tensor<T> x = ops::concat_channels(tape, conv5_rgb, conv5_flow);
  x = ops::conv2d(tape, x, params_.at("fusion.weight"), params_.at("fusion.bias"), 1, spec_.fusion_pad);
  x = ops::relu(tape, x);
  if (spec_.final_pool_window != 0) {
    x = ops::max_pool2d(tape, x, spec_.final_pool_window, spec_.final_pool_stride);
  }
  x = ops::reshape(tape, x, Shape{x.numel()});
  return ops::relu(tape, dense(tape, x, params_, "fc"));
}

template <typename T>
Tensor<T> Network<T>::features(Tape<T>& tape, const FramePair<T>& frame) const {
  if (form() == NetworkForm::kJoint) {
    return fused_features(tape, conv5(tape, Modality::kRgb, frame.rgb),
                          conv5(tape, Modality::kFlow, frame.flow));
  }
  const Modality m = single_modality();
  Tensor<T> x = conv5(tape, m, m == Modality::kRgb ? frame.rgb : frame.flow);
  if (spec_.final_pool_window != 0) {
    x = ops::max_pool2d(tape, x, spec_.final_pool_window, spec_.final_pool_stride);
  }
  x = ops::reshape(tape, x, Shape{x.numel()});
  return ops::relu(tape, dense(tape, x, params_, "fc"));
}

template <typename T>
HeadLogits<T> Network<T>::heads(Tape<T>& tape, const Tensor<T>& x) const {
  return HeadLogits<T>{dense(tape, x, params_, "gesture"), dense(tape, x, params_, "task")};
}

template <typename T>
HeadLogits<T> Network<T>::forward_frame(Tape<T>& tape, const FramePair<T>& frame) const {
  if (form() != NetworkForm::kFrame) {
    throw std::invalid_argument("forward_frame requires a per-frame network, this is " +
                                std::string(to_string(stage_)));
  }
  return heads(tape, features(tape, frame));
}

template <typename T>
std::vector<HeadLogits<T>> Network<T>::forward_clip(Tape<T>& tape, const ClipSequence<T>& clip) const {
  if (clip.frames.empty()) throw std::invalid_argument("forward_clip: empty clip");
  if (clip.markers.size() != clip.frames.size()) {
    throw DimensionError("forward_clip: " + std::to_string(clip.markers.size()) + " markers for " +
                         std::to_string(clip.frames.size()) + " frames");
  }
  if (clip.markers[0] != 0) throw std::invalid_argument("forward_clip: first marker must be 0");

  std::vector<HeadLogits<T>> out;
  out.reserve(clip.frames.size());
  if (form() == NetworkForm::kFrame) {
    for (const auto& frame : clip.frames) out.push_back(heads(tape, features(tape, frame)));
    return out;
  }
  auto state = LstmState<T>::zeros(spec_.hidden);
  for (std::size_t t = 0; t < clip.frames.size(); ++t) {
    Tensor<T> phi = features(tape, clip.frames[t]);
    auto step = lstm_step(tape, phi, state, params_, "lstm", clip.markers[t]);
    out.push_back(heads(tape, step.y));
    state = step.state;
  }
  return out;
}

template <typename T>
std::vector<FramePrediction> forward_sequence(const Network<T>& network,
                                              const ClipSequence<T>& clip) {
  Tape<T> tape(Tape<T>::Mode::kInference);
  std::vector<FramePrediction> out;
  for (const auto& logits : network.forward_clip(tape, clip)) {
    out.push_back({ops::softmax(logits.gesture.values()), ops::softmax(logits.task.values())});
  }
  return out;
}

namespace {

template <typename T>
void copy_parameter(ParameterSet<T>& params, const std::string& name,
                    const NetworkCheckpoint& source) {
  auto it = source.tensors.find(name);
  if (it == source.tensors.end()) {
    throw CheckpointError("parameter '" + name + "' missing from " +
                          std::string(to_string(source.stage)) + " checkpoint");
  }
  Tensor<T>& target = params.at(name);
  if (it->second.shape != target.shape()) {
    throw CheckpointError("parameter '" + name + "': " + std::string(to_string(source.stage)) +
                          " checkpoint has shape " + shape_str(it->second.shape) +
                          ", network expects " + shape_str(target.shape()));
  }
  auto dst = target.mutable_values();
  std::transform(it->second.values.begin(), it->second.values.end(), dst.begin(),
                 [](double v) { return static_cast<T>(v); });
}

void require_stage(const NetworkCheckpoint& ckpt, Stage expected) {
  if (ckpt.stage != expected) {
    throw CheckpointError("expected a " + std::string(to_string(expected)) +
                          " checkpoint, got " + std::string(to_string(ckpt.stage)));
  }
}

template <typename T>
Network<T> build_with_transfer(const ArchitectureSpec& spec, Stage target, std::uint64_t seed,
                               const std::vector<const NetworkCheckpoint*>& sources) {
  const auto layout = parameter_layout(spec, target);
  auto params = init_params<T>(layout, derive_seed(seed, to_string(target)), spec.init);
  for (const auto& copy : transfer_plan(spec, target).copied) {
    const NetworkCheckpoint* source = nullptr;
    for (const auto* s : sources) {
      if (s->stage == copy.source) source = s;
    }
    if (source == nullptr) {
      throw CheckpointError("no " + std::string(to_string(copy.source)) + " checkpoint supplied for '" +
                            copy.name + "'");
    }
    copy_parameter(params, copy.name, *source);
  }
  return Network<T>(spec, target, std::move(params));
}

}  // namespace

template <typename T>
Network<T> build_frame_cnn(const ArchitectureSpec& spec, Modality modality, std::uint64_t seed) {
  return build_with_transfer<T>(spec, frame_stage(modality), seed, {});
}

template <typename T>
Network<T> build_modality_lstm(const ArchitectureSpec& spec, Modality modality,
                               const NetworkCheckpoint& frame_checkpoint, std::uint64_t seed) {
  require_stage(frame_checkpoint, frame_stage(modality));
  return build_with_transfer<T>(spec, lstm_stage(modality), seed, {&frame_checkpoint});
}

template <typename T>
Network<T> build_joint_model(const ArchitectureSpec& spec, const NetworkCheckpoint& rgb_checkpoint,
                             const NetworkCheckpoint& flow_checkpoint, std::uint64_t seed) {
  require_stage(rgb_checkpoint, Stage::kLstmRgb);
  require_stage(flow_checkpoint, Stage::kLstmFlow);
  return build_with_transfer<T>(spec, Stage::kJoint, seed, {&rgb_checkpoint, &flow_checkpoint});
}

template class Network<float>;
template class Network<double>;

#define SURGREC_INSTANTIATE(T)                                                                    \
  template std::vector<FramePrediction> forward_sequence<T>(const Network<T>&,                    \
                                                            const ClipSequence<T>&);             \
  template Network<T> build_frame_cnn<T>(const ArchitectureSpec&, Modality, std::uint64_t);      \
  template Network<T> build_modality_lstm<T>(const ArchitectureSpec&, Modality,                  \
                                             const NetworkCheckpoint&, std::uint64_t);           \
  template Network<T> build_joint_model<T>(const ArchitectureSpec&, const NetworkCheckpoint&,    \
                                           const NetworkCheckpoint&, std::uint64_t);

SURGREC_INSTANTIATE(float)
SURGREC_INSTANTIATE(double)
#undef SURGREC_INSTANTIATE

}  // namespace surgrec
