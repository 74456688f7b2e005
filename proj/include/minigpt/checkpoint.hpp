#pragma once

// Single-file binary checkpoint:
//
//   "MGPT"                      4 bytes magic
//   version                     u32 LE (= 1)
//   metadata length             u32 LE, then that many bytes of UTF-8 JSON:
//                               model config, "vocab" chars, "step", "val_loss"
//   tensor count                u32 LE
//   per tensor                  u16 LE name length + UTF-8 name, u8 rank,
//                               rank x u64 LE dims, f32 LE data (row-major)
//
// Tensors appear in GptParams::named() order; a tied head is stored once as
// tok_emb and re-aliased on load.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "minigpt/error.hpp"
#include "minigpt/model.hpp"
#include "minigpt/tokenizer.hpp"

namespace minigpt {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public IoError {
 public:
  enum class Kind { BadMagic, BadVersion, Truncated, BadMetadata, ConfigMismatch, BadTensor, TrailingBytes };
  CheckpointError(Kind kind, const std::string& what) : IoError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct Checkpoint {
  ModelConfig config;
  Vocabulary vocab;
  std::size_t step = 0;
  std::optional<double> val_loss;
  GptParams<float> params;
};

std::string encode_checkpoint(const Checkpoint& ckpt);

/// When `expected` is given, a differing model config in the metadata fails
/// before any tensor is read.
Checkpoint decode_checkpoint(std::string_view bytes, const ModelConfig* expected = nullptr);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path, const ModelConfig* expected = nullptr);

}  // namespace minigpt
