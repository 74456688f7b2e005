#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "minigpt/rng.hpp"
#include "minigpt/tensor.hpp"
#include "minigpt/tokenizer.hpp"

namespace minigpt {

enum class Split { Train, Val };

Split parse_split(const std::string& name);
const char* split_name(Split split);

/// Tokenized corpus divided into a contiguous train prefix and val suffix.
struct TokenStore {
  TokenIds train_ids;
  TokenIds val_ids;
  std::size_t block_size = 0;

  const TokenIds& ids(Split split) const { return split == Split::Train ? train_ids : val_ids; }
};

/// Inputs and next-token targets, both [B, T].
struct Batch {
  IdTensor x;
  IdTensor y;
};

/// train = first floor(train_fraction * N) ids, val = the rest. Both parts
/// must hold at least block_size + 1 ids.
TokenStore split_tokens(const TokenIds& ids, double train_fraction, std::size_t block_size);

/// Batch built from explicit window starts into `ids`.
Batch batch_at(std::span<const TokenId> ids, std::span<const std::size_t> starts, std::size_t block_size);

/// B independent uniform starts in [0, len - T - 1], drawn in row order.
Batch sample_batch(const TokenStore& store, Split split, std::size_t batch_size, RandomState& rng);

/// Reads a whole file; throws IoError when it cannot be opened.
std::string read_text_file(const std::string& path);

}  // namespace minigpt
