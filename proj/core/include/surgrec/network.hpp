#pragma once

#include <cstdint>
#include <vector>

#include "surgrec/architecture.hpp"
#include "surgrec/clip.hpp"
#include "surgrec/layers.hpp"
#include "surgrec/tape.hpp"

namespace surgrec {

struct NetworkCheckpoint;

template <typename T>
struct HeadLogits {
  Tensor<T> gesture;
  Tensor<T> task;
};

// Per-frame class distributions.
struct FramePrediction {
  std::vector<double> gesture;
  std::vector<double> task;
};

// A network of one of the three forms. Parameters are owned by the network;
// forward passes are const and may run concurrently on separate tapes.
template <typename T>
class Network {
 public:
  Network(ArchitectureSpec spec, Stage stage, ParameterSet<T> params);

  const ArchitectureSpec& spec() const { return spec_; }
  Stage stage() const { return stage_; }
  NetworkForm form() const { return form_of(stage_); }
  const ParameterSet<T>& params() const { return params_; }
  ParameterSet<T>& params() { return params_; }

  // conv1..conv5 (ReLU after each, pooling between) for one stream.
  Tensor<T> conv5(Tape<T>& tape, Modality stream, const Tensor<T>& frame) const;

  // Fixed-length frame descriptor fed to the recurrent layer (or heads).
  Tensor<T> features(Tape<T>& tape, const FramePair<T>& frame) const;

  // Joint form only: fusion conv, final pool and dense projection applied to
  // externally supplied conv5 activations.
  Tensor<T> fused_features(Tape<T>& tape, const Tensor<T>& conv5_rgb,
                           const Tensor<T>& conv5_flow) const;

  HeadLogits<T> heads(Tape<T>& tape, const Tensor<T>& x) const;

  // Frame form only.
  HeadLogits<T> forward_frame(Tape<T>& tape, const FramePair<T>& frame) const;

  // One HeadLogits per step. Recurrent forms thread state through the clip
  // and reset on marker 0; the frame form treats steps independently.
  std::vector<HeadLogits<T>> forward_clip(Tape<T>& tape, const ClipSequence<T>& clip) const;

 private:
  Modality single_modality() const { return modality_of(stage_); }

  ArchitectureSpec spec_;
  Stage stage_;
  ParameterSet<T> params_;
};

// Softmax of forward_clip on an inference tape.
template <typename T>
std::vector<FramePrediction> forward_sequence(const Network<T>& network,
                                              const ClipSequence<T>& clip);

template <typename T>
Network<T> build_frame_cnn(const ArchitectureSpec& spec, Modality modality, std::uint64_t seed);

// Conv body and dense layer come from `frame_checkpoint`; recurrent layer and
// heads are freshly initialized from `seed`.
template <typename T>
Network<T> build_modality_lstm(const ArchitectureSpec& spec, Modality modality,
                               const NetworkCheckpoint& frame_checkpoint, std::uint64_t seed);

// Stream conv weights come from the two recurrent checkpoints; fusion conv,
// dense projection, recurrent layer and heads are fresh.
template <typename T>
Network<T> build_joint_model(const ArchitectureSpec& spec, const NetworkCheckpoint& rgb_checkpoint,
                             const NetworkCheckpoint& flow_checkpoint, std::uint64_t seed);

extern template class Network<float>;
extern template class Network<double>;

}  // namespace surgrec
