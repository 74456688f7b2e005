#include "minigpt/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace minigpt {
namespace {

using Kind = CheckpointError::Kind;

template <typename U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n)
      throw CheckpointError(Kind::Truncated, std::string("checkpoint truncated while reading ") + what + " at byte " +
                                                 std::to_string(pos_) + " (need " + std::to_string(n) + ", have " +
                                                 std::to_string(bytes_.size() - pos_) + ")");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  template <typename U>
  U le(const char* what) {
    const auto s = take(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

nlohmann::json metadata_of(const Checkpoint& c) {
  nlohmann::json j;
  j["block_size"] = c.config.block_size;
  j["vocab_size"] = c.config.vocab_size;
  j["n_layer"] = c.config.n_layer;
  j["n_head"] = c.config.n_head;
  j["n_embd"] = c.config.n_embd;
  j["dropout"] = c.config.dropout;
  j["tie_weights"] = c.config.tie_weights;
  j["vocab"] = c.vocab.chars_utf8();
  j["step"] = c.step;
  j["val_loss"] = c.val_loss && std::isfinite(*c.val_loss) ? nlohmann::json(*c.val_loss) : nlohmann::json(nullptr);
  return j;
}

std::string describe(const ModelConfig& c) {
  std::ostringstream os;
  os << "block_size=" << c.block_size << " vocab_size=" << c.vocab_size << " n_layer=" << c.n_layer
     << " n_head=" << c.n_head << " n_embd=" << c.n_embd << " dropout=" << c.dropout
     << " tie_weights=" << c.tie_weights;
  return os.str();
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.vocab.size() != ckpt.config.vocab_size)
    throw std::invalid_argument("checkpoint vocabulary size differs from model vocab_size");
  std::string out = "MGPT";
  put_le<std::uint32_t>(out, kCheckpointVersion);
  const std::string meta = metadata_of(ckpt).dump();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(meta.size()));
  out += meta;
  const auto named = ckpt.params.named();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(named.size()));
  for (const auto& np : named) {
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(np.name.size()));
    out += np.name;
    out.push_back(static_cast<char>(np.tensor.rank()));
    for (auto d : np.tensor.shape()) put_le<std::uint64_t>(out, d);
    for (float v : np.tensor.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes, const ModelConfig* expected) {
  Reader in(bytes);
  if (bytes.size() < 4 || bytes.substr(0, 4) != "MGPT")
    throw CheckpointError(Kind::BadMagic, "not a checkpoint: bad magic bytes (expected 'MGPT')");
  in.take(4, "magic");
  const auto version = in.le<std::uint32_t>("version");
  if (version != kCheckpointVersion)
    throw CheckpointError(Kind::BadVersion, "unsupported checkpoint version " + std::to_string(version) +
                                                " (this build reads version " + std::to_string(kCheckpointVersion) +
                                                ")");
  const auto meta_len = in.le<std::uint32_t>("metadata length");
  const auto meta_text = in.take(meta_len, "metadata");

  Checkpoint ckpt;
  try {
    const auto j = nlohmann::json::parse(meta_text);
    ckpt.config.block_size = j.at("block_size").get<std::size_t>();
    ckpt.config.vocab_size = j.at("vocab_size").get<std::size_t>();
    ckpt.config.n_layer = j.at("n_layer").get<std::size_t>();
    ckpt.config.n_head = j.at("n_head").get<std::size_t>();
    ckpt.config.n_embd = j.at("n_embd").get<std::size_t>();
    ckpt.config.dropout = j.at("dropout").get<double>();
    ckpt.config.tie_weights = j.at("tie_weights").get<bool>();
    ckpt.vocab = Vocabulary::from_chars(j.at("vocab").get<std::string>());
    ckpt.step = j.at("step").get<std::size_t>();
    if (!j.at("val_loss").is_null()) ckpt.val_loss = j.at("val_loss").get<double>();
    ckpt.config.validate();
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(Kind::BadMetadata, std::string("invalid checkpoint metadata: ") + e.what());
  }
  if (ckpt.vocab.size() != ckpt.config.vocab_size)
    throw CheckpointError(Kind::BadMetadata, "checkpoint vocabulary has " + std::to_string(ckpt.vocab.size()) +
                                                 " characters but vocab_size is " +
                                                 std::to_string(ckpt.config.vocab_size));
  if (expected && !(*expected == ckpt.config))
    throw CheckpointError(Kind::ConfigMismatch, "checkpoint model (" + describe(ckpt.config) +
                                                    ") does not match the requested model (" + describe(*expected) +
                                                    ")");

  ckpt.params = empty_params<float>(ckpt.config);
  const auto named = ckpt.params.named();
  const auto count = in.le<std::uint32_t>("tensor count");
  if (count != named.size())
    throw CheckpointError(Kind::BadTensor, "checkpoint holds " + std::to_string(count) + " tensors, model expects " +
                                               std::to_string(named.size()));
  for (const auto& np : named) {
    const auto name_len = in.le<std::uint16_t>("tensor name length");
    const std::string name(in.take(name_len, "tensor name"));
    if (name != np.name)
      throw CheckpointError(Kind::BadTensor, "expected tensor '" + np.name + "', found '" + name + "'");
    const auto rank = in.le<std::uint8_t>("tensor rank");
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(in.le<std::uint64_t>("tensor dims"));
    if (shape != np.tensor.shape())
      throw CheckpointError(Kind::BadTensor, "tensor '" + name + "' has shape " + shape_str(shape) + ", expected " +
                                                 shape_str(np.tensor.shape()));
    Tensor<float> t = np.tensor;
    const auto raw = in.take(t.numel() * 4, ("data of tensor '" + name + "'").c_str());
    auto dst = t.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      std::uint32_t bits = 0;
      for (std::size_t b = 0; b < 4; ++b)
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[4 * i + b])) << (8 * b);
      dst[i] = std::bit_cast<float>(bits);
    }
  }
  if (in.remaining() != 0)
    throw CheckpointError(Kind::TrailingBytes,
                          std::to_string(in.remaining()) + " unexpected bytes after the last tensor");
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::string bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path, const ModelConfig* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str(), expected);
}

}  // namespace minigpt
