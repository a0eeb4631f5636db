#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "surgrec/layers.hpp"

namespace surgrec {

enum class Modality { kRgb, kFlow };

// Training stage; also the tag carried by every checkpoint.
enum class Stage { kFrameRgb, kFrameFlow, kLstmRgb, kLstmFlow, kJoint };

// Per-frame CNN, single-modality recurrent net, or two-stream recurrent net.
enum class NetworkForm { kFrame, kModalityLstm, kJoint };

std::string_view to_string(Modality m);
std::string_view to_string(Stage s);
Modality parse_modality(std::string_view text);
Stage parse_stage(std::string_view text);

NetworkForm form_of(Stage s);
Modality modality_of(Stage s);  // throws for kJoint
Stage frame_stage(Modality m);
Stage lstm_stage(Modality m);

struct ConvLayerSpec {
  std::size_t out_channels = 0;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t pad = 0;
  std::size_t pool_window = 0;  // 0: no pooling after this layer
  std::size_t pool_stride = 0;

  bool operator==(const ConvLayerSpec&) const = default;
};

struct Extents {
  std::size_t channels = 0, height = 0, width = 0;
  std::size_t size() const { return channels * height * width; }
};

// Topology shared by every network form. Both streams use `conv`, so they
// are identical up to parameters. The final pool runs after conv5 in the
// single-stream forms and after the fusion conv in the joint form.
struct ArchitectureSpec {
  std::string profile = "desk";
  std::size_t input_channels = 3;
  std::size_t input_height = 56;
  std::size_t input_width = 56;
  std::vector<ConvLayerSpec> conv;
  std::size_t final_pool_window = 3;
  std::size_t final_pool_stride = 2;
  std::size_t fusion_channels = 16;
  std::size_t fusion_kernel = 3;
  std::size_t fusion_pad = 1;
  std::size_t dense_width = 64;
  std::size_t hidden = 32;
  std::size_t gesture_classes = 14;
  std::size_t task_classes = 3;
  InitConfig init;

  static ArchitectureSpec paper();
  static ArchitectureSpec desk();

  // Throws ConfigError when layers do not fit the input.
  void validate() const;

  Extents conv5_extents() const;
  std::size_t fusion_input_channels() const { return 2 * conv5_extents().channels; }
  Extents stream_pooled_extents() const;
  Extents fused_pooled_extents() const;

  bool operator==(const ArchitectureSpec&) const;
};

// Every parameter a network of `stage` owns, in name order.
std::vector<ParamDescriptor> parameter_layout(const ArchitectureSpec& spec, Stage stage);

std::size_t parameter_count(const ArchitectureSpec& spec, Stage stage);

// Which tensors a stage inherits from its predecessors and which start fresh.
struct TransferPlan {
  struct Copy {
    std::string name;
    Stage source;
  };
  std::vector<Copy> copied;
  std::vector<std::string> fresh;
};

// Plan for building `target` from the previous stage(s). Frame stages have no
// predecessor, so everything is fresh.
TransferPlan transfer_plan(const ArchitectureSpec& spec, Stage target);

}  // namespace surgrec
