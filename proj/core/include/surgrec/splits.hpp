#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace surgrec {

struct Split {
  std::vector<std::string> train;  // sorted
  std::vector<std::string> test;   // sorted

  bool operator==(const Split&) const = default;
};

// Split k shuffles `ids` with a sub-seed derived from (seed, k) and takes the
// first train_count as training ids.
std::vector<Split> make_splits(const std::vector<std::string>& ids, std::size_t n_splits,
                               std::size_t train_count, std::uint64_t seed);

// Ids "000000".."N-1" for split generation without a dataset.
std::vector<std::string> numbered_ids(std::size_t total);

// FNV-1a over the id lists; equal hashes mean identical splits.
std::uint64_t split_hash(const Split& split);

// JSON list of {"train": [...], "test": [...]}.
std::string splits_to_json(const std::vector<Split>& splits);
std::vector<Split> splits_from_json(const std::string& text);
void save_splits(const std::vector<Split>& splits, const std::filesystem::path& path);
std::vector<Split> load_splits(const std::filesystem::path& path);

}  // namespace surgrec
