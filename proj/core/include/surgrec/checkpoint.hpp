#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "surgrec/architecture.hpp"
#include "surgrec/network.hpp"
#include "surgrec/optim.hpp"

namespace surgrec {

enum class Precision { kF32, kF64 };

std::string_view to_string(Precision p);
Precision parse_precision(std::string_view text);

struct TensorRecord {
  Shape shape;
  std::vector<double> values;  // widened; narrowing back to the stored dtype is exact
};

struct NetworkCheckpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  ArchitectureSpec architecture;
  Stage stage = Stage::kFrameRgb;
  std::uint64_t iteration = 0;
  OptimizerState optimizer;
  Precision precision = Precision::kF32;
  std::map<std::string, TensorRecord, std::less<>> tensors;

  // Every tensor the stage's layout requires, at the declared shape.
  void validate() const;
};

template <typename T>
NetworkCheckpoint make_checkpoint(const Network<T>& network, const OptimizerState& optimizer);

// Parameters arrive with requires_grad set; values are converted to T.
template <typename T>
Network<T> network_from_checkpoint(const NetworkCheckpoint& checkpoint);

// Byte layout is documented in docs/checkpoint_format.md.
std::string serialize_checkpoint(const NetworkCheckpoint& checkpoint);
NetworkCheckpoint parse_checkpoint(const std::string& bytes);

void save_checkpoint(const NetworkCheckpoint& checkpoint, const std::filesystem::path& path);
NetworkCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace surgrec
