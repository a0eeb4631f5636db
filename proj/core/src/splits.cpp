#include "surgrec/splits.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "surgrec/errors.hpp"
#include "surgrec/random.hpp"

namespace surgrec {

std::vector<Split> make_splits(const std::vector<std::string>& ids, std::size_t n_splits,
                               std::size_t train_count, std::uint64_t seed) {
  if (train_count >= ids.size()) {
    throw std::invalid_argument("make_splits: train count " + std::to_string(train_count) +
                                " must be below the total " + std::to_string(ids.size()));
  }
  if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size()) {
    throw std::invalid_argument("make_splits: duplicate segment ids");
  }
  std::vector<Split> splits;
  for (std::size_t k = 0; k < n_splits; ++k) {
    std::vector<std::string> order = ids;
    Rng rng(derive_seed(seed, "split", k));
    rng.shuffle(order);
    Split s;
    s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_count));
    s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(train_count), order.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    splits.push_back(std::move(s));
  }
  return splits;
}

std::vector<std::string> numbered_ids(std::size_t total) {
  std::vector<std::string> ids;
  ids.reserve(total);
  char buf[32];
  for (std::size_t i = 0; i < total; ++i) {
    std::snprintf(buf, sizeof(buf), "%06zu", i);
    ids.emplace_back(buf);
  }
  return ids;
}

std::uint64_t split_hash(const Split& split) {
  std::string text = "train";
  for (const auto& id : split.train) text += "\n" + id;
  text += "\ntest";
  for (const auto& id : split.test) text += "\n" + id;
  return fnv1a64(text);
}

std::string splits_to_json(const std::vector<Split>& splits) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& s : splits) j.push_back({{"train", s.train}, {"test", s.test}});
  return j.dump(1) + "\n";
}

std::vector<Split> splits_from_json(const std::string& text) {
  std::vector<Split> out;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_array()) throw ParseError("split file must be a JSON list");
    for (std::size_t k = 0; k < j.size(); ++k) {
      Split s;
      j[k].at("train").get_to(s.train);
      j[k].at("test").get_to(s.test);
      std::set<std::string> seen(s.train.begin(), s.train.end());
      for (const auto& id : s.test) {
        if (seen.count(id)) throw ParseError("split " + std::to_string(k) + ": id '" + id + "' is in both train and test");
      }
      out.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("split file: ") + e.what());
  }
  return out;
}

void save_splits(const std::vector<Split>& splits, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << splits_to_json(splits);
  if (!out) throw IoError("cannot write split file '" + path.string() + "'");
}

std::vector<Split> load_splits(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open split file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return splits_from_json(ss.str());
}

}  // namespace surgrec
