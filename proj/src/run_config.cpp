#include "minigpt/run_config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <set>

#include "minigpt/dataset.hpp"
#include "minigpt/error.hpp"

namespace minigpt {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct ValueError {
  std::string message;
};

std::size_t to_size(std::string_view v) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ValueError{"expected a non-negative integer"};
  return out;
}

std::uint64_t to_u64(std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ValueError{"expected a non-negative integer"};
  return out;
}

double to_double(std::string_view v) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ValueError{"expected a number"};
  return out;
}

bool to_bool(std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ValueError{"expected true or false"};
}

bool is_none(std::string_view v) { return v == "none"; }

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"data_path", [](RunConfig& c, std::string_view v) { c.data_path = std::string(v); }},
      {"out_dir", [](RunConfig& c, std::string_view v) { c.out_dir = std::string(v); }},
      {"train_fraction", [](RunConfig& c, std::string_view v) { c.train_fraction = to_double(v); }},
      {"block_size", [](RunConfig& c, std::string_view v) { c.model.block_size = to_size(v); }},
      {"vocab_size", [](RunConfig& c, std::string_view v) { c.vocab_size = to_size(v); }},
      {"n_layer", [](RunConfig& c, std::string_view v) { c.model.n_layer = to_size(v); }},
      {"n_head", [](RunConfig& c, std::string_view v) { c.model.n_head = to_size(v); }},
      {"n_embd", [](RunConfig& c, std::string_view v) { c.model.n_embd = to_size(v); }},
      {"dropout", [](RunConfig& c, std::string_view v) { c.model.dropout = to_double(v); }},
      {"tie_weights", [](RunConfig& c, std::string_view v) { c.model.tie_weights = to_bool(v); }},
      {"batch_size", [](RunConfig& c, std::string_view v) { c.train.batch_size = to_size(v); }},
      {"max_iters", [](RunConfig& c, std::string_view v) { c.train.max_iters = to_size(v); }},
      {"eval_interval", [](RunConfig& c, std::string_view v) { c.train.eval_interval = to_size(v); }},
      {"eval_iters", [](RunConfig& c, std::string_view v) { c.train.eval_iters = to_size(v); }},
      {"lr_schedule",
       [](RunConfig& c, std::string_view v) {
         if (v == "fixed")
           c.train.lr.kind = LrPolicy::Kind::Fixed;
         else if (v == "warmup_cosine")
           c.train.lr.kind = LrPolicy::Kind::WarmupCosine;
         else
           throw ValueError{"expected fixed or warmup_cosine"};
       }},
      {"learning_rate", [](RunConfig& c, std::string_view v) { c.train.lr.fixed_lr = to_double(v); }},
      {"max_lr", [](RunConfig& c, std::string_view v) { c.train.lr.schedule.max_lr = to_double(v); }},
      {"min_lr", [](RunConfig& c, std::string_view v) { c.train.lr.schedule.min_lr = to_double(v); }},
      {"warmup_steps", [](RunConfig& c, std::string_view v) { c.train.lr.schedule.warmup_steps = to_size(v); }},
      {"decay_steps", [](RunConfig& c, std::string_view v) { c.train.lr.schedule.decay_steps = to_size(v); }},
      {"beta1", [](RunConfig& c, std::string_view v) { c.train.beta1 = to_double(v); }},
      {"beta2", [](RunConfig& c, std::string_view v) { c.train.beta2 = to_double(v); }},
      {"eps", [](RunConfig& c, std::string_view v) { c.train.eps = to_double(v); }},
      {"weight_decay", [](RunConfig& c, std::string_view v) { c.train.weight_decay = to_double(v); }},
      {"weight_decay_mode",
       [](RunConfig& c, std::string_view v) {
         if (v == "uniform")
           c.train.decay_mode = WeightDecayMode::Uniform;
         else if (v == "grouped")
           c.train.decay_mode = WeightDecayMode::Grouped;
         else
           throw ValueError{"expected uniform or grouped"};
       }},
      {"clip_norm",
       [](RunConfig& c, std::string_view v) {
         c.train.clip_norm = is_none(v) ? std::nullopt : std::optional<double>(to_double(v));
       }},
      {"seed", [](RunConfig& c, std::string_view v) { c.train.seed = to_u64(v); }},
      {"checkpoint_policy",
       [](RunConfig& c, std::string_view v) {
         if (v == "final")
           c.train.policy = CheckpointPolicy::Final;
         else if (v == "best_val")
           c.train.policy = CheckpointPolicy::BestVal;
         else
           throw ValueError{"expected final or best_val"};
       }},
      {"max_new_tokens", [](RunConfig& c, std::string_view v) { c.sample.max_new_tokens = to_size(v); }},
      {"temperature", [](RunConfig& c, std::string_view v) { c.sample.temperature = to_double(v); }},
      {"top_k",
       [](RunConfig& c, std::string_view v) {
         c.sample.top_k = is_none(v) ? std::nullopt : std::optional<std::size_t>(to_size(v));
       }},
      {"sample_seed", [](RunConfig& c, std::string_view v) { c.sample.seed = to_u64(v); }},
  };
  return table;
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::string& source) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
    if (!seen.emplace(key).second) throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
    if (value.empty()) throw ConfigError(where + "missing value for '" + std::string(key) + "'");
    try {
      it->second(cfg, value);
    } catch (const ValueError& e) {
      throw ConfigError(where + "bad value '" + std::string(value) + "' for '" + std::string(key) + "': " + e.message);
    }
  }
  try {
    ModelConfig m = cfg.model;
    if (cfg.vocab_size) m.vocab_size = *cfg.vocab_size;
    m.validate();
    cfg.train.validate();
    cfg.sample.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (!(cfg.train_fraction > 0 && cfg.train_fraction < 1))
    throw ConfigError(source + ": train_fraction must lie strictly between 0 and 1");
  return cfg;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_text_file(path), path); }

}  // namespace minigpt
