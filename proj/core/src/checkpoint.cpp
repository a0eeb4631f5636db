#include "surgrec/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json_io.hpp"
#include "surgrec/errors.hpp"

namespace surgrec {
namespace {

constexpr char kMagic[8] = {'S', 'U', 'R', 'G', 'C', 'K', 'P', 'T'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_uint(const std::string& in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

std::size_t dtype_size(Precision p) { return p == Precision::kF32 ? 4 : 8; }

}  // namespace

std::string_view to_string(Precision p) { return p == Precision::kF32 ? "f32" : "f64"; }

Precision parse_precision(std::string_view text) {
  if (text == "f32") return Precision::kF32;
  if (text == "f64") return Precision::kF64;
  throw std::invalid_argument("unknown precision '" + std::string(text) + "' (expected f32|f64)");
}

void NetworkCheckpoint::validate() const {
  const auto layout = parameter_layout(architecture, stage);
  for (const auto& desc : layout) {
    auto it = tensors.find(desc.name);
    if (it == tensors.end()) {
      throw CheckpointError(std::string(to_string(stage)) + " checkpoint lacks parameter '" +
                            desc.name + "'");
    }
    if (it->second.shape != desc.shape || it->second.values.size() != shape_numel(desc.shape)) {
      throw CheckpointError("checkpoint parameter '" + desc.name + "' has shape " +
                            shape_str(it->second.shape) + ", architecture expects " +
                            shape_str(desc.shape));
    }
  }
  if (tensors.size() != layout.size()) {
    throw CheckpointError(std::string(to_string(stage)) + " checkpoint holds " +
                          std::to_string(tensors.size()) + " tensors, architecture declares " +
                          std::to_string(layout.size()));
  }
}

template <typename T>
NetworkCheckpoint make_checkpoint(const Network<T>& network, const OptimizerState& optimizer) {
  NetworkCheckpoint ckpt;
  ckpt.architecture = network.spec();
  ckpt.stage = network.stage();
  ckpt.optimizer = optimizer;
  ckpt.iteration = optimizer.iteration;
  ckpt.precision = sizeof(T) == 4 ? Precision::kF32 : Precision::kF64;
  for (const auto& [name, tensor] : network.params()) {
    TensorRecord record{tensor.shape(), {}};
    record.values.assign(tensor.values().begin(), tensor.values().end());
    ckpt.tensors.emplace(name, std::move(record));
  }
  return ckpt;
}

template <typename T>
Network<T> network_from_checkpoint(const NetworkCheckpoint& checkpoint) {
  checkpoint.validate();
  ParameterSet<T> params;
  for (const auto& [name, record] : checkpoint.tensors) {
    std::vector<T> values(record.values.size());
    std::transform(record.values.begin(), record.values.end(), values.begin(),
                   [](double v) { return static_cast<T>(v); });
    params.add(name, Tensor<T>(record.shape, std::move(values), true));
  }
  return Network<T>(checkpoint.architecture, checkpoint.stage, std::move(params));
}

std::string serialize_checkpoint(const NetworkCheckpoint& checkpoint) {
  const std::size_t width = dtype_size(checkpoint.precision);
  Json index = Json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, record] : checkpoint.tensors) {
    const std::uint64_t nbytes = record.values.size() * width;
    index.push_back(Json{{"name", name}, {"shape", record.shape}, {"offset", offset}, {"nbytes", nbytes}});
    offset += nbytes;
  }
  Json header{{"format_version", NetworkCheckpoint::kFormatVersion},
              {"stage", to_string(checkpoint.stage)},
              {"iteration", checkpoint.iteration},
              {"precision", to_string(checkpoint.precision)},
              {"architecture", checkpoint.architecture},
              {"optimizer", checkpoint.optimizer},
              {"tensors", index}};
  const std::string header_text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, NetworkCheckpoint::kFormatVersion);
  put_u32(out, 0);
  put_u64(out, header_text.size());
  out += header_text;
  out.reserve(out.size() + offset);
  for (const auto& [_, record] : checkpoint.tensors) {
    for (double v : record.values) {
      if (checkpoint.precision == Precision::kF32) {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      } else {
        put_u64(out, std::bit_cast<std::uint64_t>(v));
      }
    }
  }
  return out;
}

NetworkCheckpoint parse_checkpoint(const std::string& bytes) {
  constexpr std::size_t kPrefix = sizeof(kMagic) + 4 + 4 + 8;
  if (bytes.size() < kPrefix || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a surgrec checkpoint (bad magic)");
  }
  const auto version = static_cast<std::uint32_t>(get_uint(bytes, 8, 4));
  if (version != NetworkCheckpoint::kFormatVersion) {
    throw CheckpointError("unsupported checkpoint format version " + std::to_string(version));
  }
  const std::uint64_t header_len = get_uint(bytes, 16, 8);
  if (header_len > bytes.size() - kPrefix) throw CheckpointError("truncated checkpoint header");

  NetworkCheckpoint ckpt;
  std::size_t data_start = kPrefix + header_len;
  try {
    const Json header = Json::parse(bytes.substr(kPrefix, header_len));
    ckpt.stage = parse_stage(header.at("stage").get<std::string>());
    ckpt.iteration = header.at("iteration").get<std::uint64_t>();
    ckpt.precision = parse_precision(header.at("precision").get<std::string>());
    ckpt.architecture = header.at("architecture").get<ArchitectureSpec>();
    ckpt.optimizer = header.at("optimizer").get<OptimizerState>();
    const std::size_t width = dtype_size(ckpt.precision);
    for (const auto& entry : header.at("tensors")) {
      TensorRecord record;
      record.shape = entry.at("shape").get<Shape>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      const auto nbytes = entry.at("nbytes").get<std::uint64_t>();
      const std::string name = entry.at("name").get<std::string>();
      if (nbytes != shape_numel(record.shape) * width) {
        throw CheckpointError("tensor '" + name + "' byte count disagrees with its shape");
      }
      if (data_start + offset + nbytes > bytes.size()) {
        throw CheckpointError("tensor '" + name + "' extends past end of file");
      }
      record.values.resize(shape_numel(record.shape));
      std::size_t pos = data_start + offset;
      for (double& v : record.values) {
        if (ckpt.precision == Precision::kF32) {
          v = std::bit_cast<float>(static_cast<std::uint32_t>(get_uint(bytes, pos, 4)));
        } else {
          v = std::bit_cast<double>(get_uint(bytes, pos, 8));
        }
        pos += width;
      }
      ckpt.tensors.emplace(name, std::move(record));
    }
  } catch (const Json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint header: ") + e.what());
  }
  ckpt.validate();
  return ckpt;
}

void save_checkpoint(const NetworkCheckpoint& checkpoint, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::string bytes = serialize_checkpoint(checkpoint);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

NetworkCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint not found: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

template NetworkCheckpoint make_checkpoint<float>(const Network<float>&, const OptimizerState&);
template NetworkCheckpoint make_checkpoint<double>(const Network<double>&, const OptimizerState&);
template Network<float> network_from_checkpoint<float>(const NetworkCheckpoint&);
template Network<double> network_from_checkpoint<double>(const NetworkCheckpoint&);

}  // namespace surgrec
