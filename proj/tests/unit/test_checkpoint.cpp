#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <set>

#include "surgrec/checkpoint.hpp"
#include "surgrec/errors.hpp"
#include "surgrec/network.hpp"
#include "surgrec/random.hpp"

using namespace surgrec;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("surgrec_ckpt_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

template <typename T>
bool bit_equal(const Tensor<T>& a, const Tensor<T>& b) {
  return a.shape() == b.shape() &&
         std::memcmp(a.values().data(), b.values().data(), a.numel() * sizeof(T)) == 0;
}

template <typename T>
NetworkCheckpoint ckpt(const Network<T>& n) {
  return make_checkpoint(n, OptimizerState{});
}

std::set<std::string> all_names(const ArchitectureSpec& spec, Stage s) {
  std::set<std::string> out;
  for (const auto& d : parameter_layout(spec, s)) out.insert(d.name);
  return out;
}

}  // namespace

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  const auto spec = ArchitectureSpec::desk();
  for (Precision p : {Precision::kF32, Precision::kF64}) {
    NetworkCheckpoint c;
    if (p == Precision::kF32) {
      c = make_checkpoint(build_frame_cnn<float>(spec, Modality::kRgb, 5), OptimizerState{});
    } else {
      c = make_checkpoint(build_frame_cnn<double>(spec, Modality::kRgb, 5), OptimizerState{});
    }
    c.iteration = 123;
    c.optimizer.iteration = 123;
    const auto dir = scratch("roundtrip");
    save_checkpoint(c, dir / "a.ckpt");
    const auto loaded = load_checkpoint(dir / "a.ckpt");
    EXPECT_EQ(loaded.iteration, 123u);
    EXPECT_EQ(loaded.stage, Stage::kFrameRgb);
    EXPECT_EQ(loaded.precision, p);
    EXPECT_TRUE(loaded.architecture == spec);
    EXPECT_EQ(serialize_checkpoint(loaded), serialize_checkpoint(c));
    for (const auto& [name, rec] : c.tensors) {
      const auto& other = loaded.tensors.at(name);
      ASSERT_EQ(rec.shape, other.shape);
      EXPECT_EQ(std::memcmp(rec.values.data(), other.values.data(), rec.values.size() * sizeof(double)), 0) << name;
    }
  }
}

TEST(Checkpoint, NetworkRoundTripIsBitExact) {
  const auto spec = ArchitectureSpec::desk();
  const auto frame = build_frame_cnn<float>(spec, Modality::kFlow, 8);
  const auto lstm = build_modality_lstm<float>(spec, Modality::kFlow, ckpt(frame), 9);
  const auto back = network_from_checkpoint<float>(parse_checkpoint(serialize_checkpoint(ckpt(lstm))));
  EXPECT_EQ(back.stage(), Stage::kLstmFlow);
  for (const auto& [name, t] : lstm.params()) EXPECT_TRUE(bit_equal(t, back.params().at(name))) << name;
}

TEST(Checkpoint, CorruptFilesAreRejected) {
  const auto spec = ArchitectureSpec::desk();
  const auto bytes = serialize_checkpoint(ckpt(build_frame_cnn<float>(spec, Modality::kRgb, 1)));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(parse_checkpoint(bad_magic), CheckpointError);
  EXPECT_THROW(parse_checkpoint(bytes.substr(0, bytes.size() - 7)), CheckpointError);
  EXPECT_THROW(parse_checkpoint(bytes.substr(0, 10)), CheckpointError);
  EXPECT_THROW(load_checkpoint(scratch("missing") / "none.ckpt"), IoError);
}

TEST(Checkpoint, ValidateNamesMissingAndMisshapenTensors) {
  const auto spec = ArchitectureSpec::desk();
  auto c = ckpt(build_frame_cnn<float>(spec, Modality::kRgb, 2));
  auto missing = c;
  missing.tensors.erase("rgb.conv3.weight");
  try {
    missing.validate();
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("rgb.conv3.weight"), std::string::npos);
  }
  auto wrong = c;
  wrong.tensors.at("fc.weight").shape = {1, wrong.tensors.at("fc.weight").values.size()};
  EXPECT_THROW(wrong.validate(), CheckpointError);
}

TEST(Transfer, LstmStageCopiesBodyBitExactly) {
  const auto spec = ArchitectureSpec::desk();
  const auto frame = build_frame_cnn<float>(spec, Modality::kRgb, 11);
  const auto source = ckpt(frame);
  const auto lstm = build_modality_lstm<float>(spec, Modality::kRgb, source, 12);
  // Save right after transfer, reload, compare against the frame network.
  const auto saved = parse_checkpoint(serialize_checkpoint(ckpt(lstm)));
  const auto plan = transfer_plan(spec, Stage::kLstmRgb);
  std::set<std::string> copied, fresh(plan.fresh.begin(), plan.fresh.end());
  for (const auto& c : plan.copied) {
    copied.insert(c.name);
    EXPECT_EQ(c.source, Stage::kFrameRgb);
    const auto& a = source.tensors.at(c.name).values;
    const auto& b = saved.tensors.at(c.name).values;
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)), 0) << c.name;
  }
  // Exactly the recurrent layer and both heads start fresh.
  EXPECT_EQ(fresh, (std::set<std::string>{"gesture.bias", "gesture.weight", "lstm.bias", "lstm.weight",
                                          "task.bias", "task.weight"}));
  std::set<std::string> both = copied;
  both.insert(fresh.begin(), fresh.end());
  EXPECT_EQ(both, all_names(spec, Stage::kLstmRgb));
  EXPECT_TRUE(copied.count("rgb.conv1.weight") && copied.count("fc.weight"));
}

TEST(Transfer, JointStageCopiesOnlyStreamConvs) {
  const auto spec = ArchitectureSpec::desk();
  const auto fr = build_frame_cnn<double>(spec, Modality::kRgb, 21);
  const auto ff = build_frame_cnn<double>(spec, Modality::kFlow, 22);
  const auto lr = ckpt(build_modality_lstm<double>(spec, Modality::kRgb, ckpt(fr), 23));
  const auto lf = ckpt(build_modality_lstm<double>(spec, Modality::kFlow, ckpt(ff), 24));
  const auto joint = build_joint_model<double>(spec, lr, lf, 25);
  const auto plan = transfer_plan(spec, Stage::kJoint);
  std::set<std::string> fresh(plan.fresh.begin(), plan.fresh.end());
  for (const auto& c : plan.copied) {
    EXPECT_EQ(c.name.find("conv"), c.name.find('.') + 1) << c.name;
    const auto& src = (c.source == Stage::kLstmRgb ? lr : lf).tensors.at(c.name).values;
    const auto got = joint.params().at(c.name).values();
    ASSERT_EQ(src.size(), got.size());
    for (std::size_t i = 0; i < src.size(); ++i) ASSERT_EQ(src[i], got[i]) << c.name << " " << i;
  }
  EXPECT_EQ(plan.copied.size(), 20u);  // 5 convs x (weight, bias) x 2 streams
  EXPECT_EQ(fresh, (std::set<std::string>{"fc.bias", "fc.weight", "fusion.bias", "fusion.weight", "gesture.bias",
                                          "gesture.weight", "lstm.bias", "lstm.weight", "task.bias",
                                          "task.weight"}));

  // Stream A on an RGB frame reproduces the source network's conv5.
  const auto rgb_net = network_from_checkpoint<double>(lr);
  Rng rng(26);
  std::vector<double> v(3 * spec.input_height * spec.input_width);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  Tensor<double> frame({3, spec.input_height, spec.input_width}, v);
  Tape<double> tape(Tape<double>::Mode::kInference);
  EXPECT_TRUE(bit_equal(joint.conv5(tape, Modality::kRgb, frame), rgb_net.conv5(tape, Modality::kRgb, frame)));
}

TEST(Transfer, WrongShapedSourceNamesTheParameter) {
  auto spec = ArchitectureSpec::desk();
  const auto frame = ckpt(build_frame_cnn<float>(spec, Modality::kRgb, 31));
  auto other = spec;
  other.dense_width = 48;
  try {
    build_modality_lstm<float>(other, Modality::kRgb, frame, 32);
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("fc."), std::string::npos) << e.what();
  }
}
