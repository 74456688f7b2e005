#include "minigpt/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "minigpt/error.hpp"

namespace minigpt {

Split parse_split(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  throw std::invalid_argument("unknown split '" + name + "' (expected train or val)");
}

const char* split_name(Split split) { return split == Split::Train ? "train" : "val"; }

TokenStore split_tokens(const TokenIds& ids, double train_fraction, std::size_t block_size) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("train fraction must lie strictly between 0 and 1");
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(ids.size())));
  const std::size_t n_val = ids.size() - n_train;
  if (n_train < block_size + 1 || n_val < block_size + 1)
    throw std::invalid_argument("corpus of " + std::to_string(ids.size()) + " tokens splits into " +
                                std::to_string(n_train) + "/" + std::to_string(n_val) +
                                ", each part needs at least block_size + 1 = " + std::to_string(block_size + 1));
  TokenStore store;
  store.train_ids.assign(ids.begin(), ids.begin() + static_cast<long>(n_train));
  store.val_ids.assign(ids.begin() + static_cast<long>(n_train), ids.end());
  store.block_size = block_size;
  return store;
}

Batch batch_at(std::span<const TokenId> ids, std::span<const std::size_t> starts, std::size_t block_size) {
  const std::size_t rows = starts.size();
  std::vector<std::int32_t> x(rows * block_size), y(rows * block_size);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t s = starts[r];
    if (s + block_size + 1 > ids.size())
      throw std::out_of_range("window starting at " + std::to_string(s) + " runs past the end of " +
                              std::to_string(ids.size()) + " tokens");
    for (std::size_t t = 0; t < block_size; ++t) {
      x[r * block_size + t] = ids[s + t];
      y[r * block_size + t] = ids[s + t + 1];
    }
  }
  return Batch{IdTensor::from({rows, block_size}, std::move(x)), IdTensor::from({rows, block_size}, std::move(y))};
}

Batch sample_batch(const TokenStore& store, Split split, std::size_t batch_size, RandomState& rng) {
  const TokenIds& ids = store.ids(split);
  const std::size_t t = store.block_size;
  if (ids.size() < t + 1)
    throw std::invalid_argument(std::string(split_name(split)) + " split has " + std::to_string(ids.size()) +
                                " tokens, needs at least " + std::to_string(t + 1));
  std::vector<std::size_t> starts(batch_size);
  for (auto& s : starts) s = static_cast<std::size_t>(rng.uniform_int(ids.size() - t));
  return batch_at(ids, starts, t);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace minigpt
