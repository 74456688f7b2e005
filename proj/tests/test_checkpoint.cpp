#include <doctest.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "minigpt/checkpoint.hpp"
#include "test_paths.hpp"

using namespace minigpt;

namespace {

Checkpoint make_checkpoint(bool tied, std::uint64_t seed = 4) {
  const auto vocab = Vocabulary::build("abcdefghij\n");
  const ModelConfig cfg{6, vocab.size(), 2, 2, 8, 0.1, tied};
  RandomState rng(seed);
  return Checkpoint{cfg, vocab, 1750, 1.478, init_params<float>(cfg, rng)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CheckpointError::Kind kind_of(std::string_view bytes, const ModelConfig* expected = nullptr) {
  try {
    decode_checkpoint(bytes, expected);
  } catch (const CheckpointError& e) {
    return e.kind();
  }
  FAIL("decode unexpectedly succeeded");
  return CheckpointError::Kind::BadMagic;
}

}  // namespace

TEST_CASE("save -> load -> save is byte-identical") {
  for (bool tied : {false, true}) {
    CAPTURE(tied);
    const auto dir = test_paths::scratch(tied ? "ckpt_tied" : "ckpt_untied");
    const auto ck = make_checkpoint(tied);
    save_checkpoint((dir / "a.mgpt").string(), ck);
    const auto loaded = load_checkpoint((dir / "a.mgpt").string());
    save_checkpoint((dir / "b.mgpt").string(), loaded);
    CHECK(slurp(dir / "a.mgpt") == slurp(dir / "b.mgpt"));

    CHECK(loaded.config == ck.config);
    CHECK(loaded.vocab == ck.vocab);
    CHECK(loaded.step == 1750);
    REQUIRE(loaded.val_loss.has_value());
    CHECK(*loaded.val_loss == 1.478);
    CHECK(loaded.params.tied() == tied);
    const auto a = ck.params.named(), b = loaded.params.named();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].name == b[i].name);
      CHECK(a[i].tensor.shape() == b[i].tensor.shape());
      CHECK(std::memcmp(a[i].tensor.data().data(), b[i].tensor.data().data(), a[i].tensor.numel() * 4) == 0);
    }
  }
}

TEST_CASE("header layout") {
  const auto bytes = encode_checkpoint(make_checkpoint(false));
  REQUIRE(bytes.size() > 12);
  CHECK(bytes.substr(0, 4) == "MGPT");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 0);
  CHECK(bytes[7] == 0);
  std::uint32_t meta_len = 0;
  std::memcpy(&meta_len, bytes.data() + 8, 4);
  const std::string meta = bytes.substr(12, meta_len);
  CHECK(meta.find("\"vocab\"") != std::string::npos);
  CHECK(meta.find("\"step\"") != std::string::npos);
  std::uint32_t count = 0;
  std::memcpy(&count, bytes.data() + 12 + meta_len, 4);
  CHECK(count == make_checkpoint(false).params.named().size());
  std::uint16_t name_len = 0;
  std::memcpy(&name_len, bytes.data() + 16 + meta_len, 2);
  CHECK(bytes.substr(18 + meta_len, name_len) == "tok_emb");
}

TEST_CASE("tied checkpoints store the shared matrix once") {
  const auto tied = encode_checkpoint(make_checkpoint(true));
  const auto untied = encode_checkpoint(make_checkpoint(false));
  CHECK(untied.size() > tied.size());
  CHECK(tied.find("head.weight") == std::string::npos);
  CHECK(untied.find("head.weight") != std::string::npos);
}

TEST_CASE("corruption is reported with distinct kinds") {
  const auto good = encode_checkpoint(make_checkpoint(false));

  auto magic = good;
  magic[0] = 'X';
  CHECK(kind_of(magic) == CheckpointError::Kind::BadMagic);

  auto version = good;
  version[4] = 2;
  CHECK(kind_of(version) == CheckpointError::Kind::BadVersion);

  CHECK(kind_of(std::string_view(good).substr(0, good.size() - 3)) == CheckpointError::Kind::Truncated);
  CHECK(kind_of(std::string_view(good).substr(0, 10)) == CheckpointError::Kind::Truncated);
  CHECK(kind_of(good + "x") == CheckpointError::Kind::TrailingBytes);

  auto meta = good;
  meta[12] = '#';
  CHECK(kind_of(meta) == CheckpointError::Kind::BadMetadata);
}

TEST_CASE("config mismatch fails before reading tensors") {
  const auto ck = make_checkpoint(false);
  const auto bytes = encode_checkpoint(ck);
  auto other = ck.config;
  other.n_embd = 16;
  CHECK(kind_of(bytes, &other) == CheckpointError::Kind::ConfigMismatch);

  // Even with the tensor section cut off the mismatch wins.
  std::uint32_t meta_len = 0;
  std::memcpy(&meta_len, bytes.data() + 8, 4);
  CHECK(kind_of(std::string_view(bytes).substr(0, 12 + meta_len), &other) == CheckpointError::Kind::ConfigMismatch);
  CHECK_NOTHROW(decode_checkpoint(bytes, &ck.config));
}

TEST_CASE("missing file is an I/O error") {
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/dir/x.mgpt"), IoError);
}
