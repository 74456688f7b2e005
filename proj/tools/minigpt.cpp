// minigpt: train, sample, evaluate and plot character-level GPT models.
//
// Exit codes: 0 success, 1 usage or config error, 2 I/O or format error,
// 3 numerical divergence.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "minigpt/checkpoint.hpp"
#include "minigpt/dataset.hpp"
#include "minigpt/error.hpp"
#include "minigpt/kernels.hpp"
#include "minigpt/loss_log.hpp"
#include "minigpt/run_config.hpp"
#include "minigpt/runtime.hpp"
#include "minigpt/sampler.hpp"
#include "minigpt/trainer.hpp"

namespace fs = std::filesystem;
using namespace minigpt;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kDiverged = 3 };

std::string with_commas(std::size_t n) {
  std::string s = std::to_string(n);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

// --data beats MINIGPT_DATA beats the config's data_path.
std::string resolve_data(const std::string& flag, const std::string& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("MINIGPT_DATA"); env && *env) return env;
  return fallback;
}

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out_dir;
  std::size_t max_iters = 0;
};

int cmd_train(const TrainArgs& a) {
  RunConfig rc = load_run_config(a.config);
  if (!a.out_dir.empty()) rc.out_dir = a.out_dir;
  if (a.max_iters > 0) {
    rc.train.max_iters = a.max_iters;
    rc.train.eval_interval = std::min(rc.train.eval_interval, a.max_iters);
  }
  const std::string data_path = resolve_data(a.data, rc.data_path);
  const std::string text = read_text_file(data_path);
  const Vocabulary vocab = Vocabulary::build(text);
  if (rc.vocab_size && *rc.vocab_size != vocab.size())
    throw ConfigError(a.config + ": vocab_size = " + std::to_string(*rc.vocab_size) + " but '" + data_path + "' has " +
                      std::to_string(vocab.size()) + " distinct characters");
  ModelConfig mc = rc.model;
  mc.vocab_size = vocab.size();
  mc.validate();
  const TokenStore store = split_tokens(vocab.encode(text), rc.train_fraction, mc.block_size);

  fs::create_directories(rc.out_dir);
  const fs::path out(rc.out_dir);
  std::printf("data %s: %zu chars, vocab %zu, train %zu / val %zu tokens\n", data_path.c_str(),
              store.train_ids.size() + store.val_ids.size(), vocab.size(), store.train_ids.size(),
              store.val_ids.size());
  std::printf("parameters %s\n", with_commas(closed_form_param_count(mc)).c_str());
  std::fflush(stdout);

  std::vector<LossRecord> log;
  TrainHooks hooks;
  hooks.on_eval = [&](const LossRecord& r) {
    log.push_back(r);
    write_loss_log((out / "loss_log.csv").string(), log);
    std::printf("step %zu: train %.4f, val %.4f, lr %.6g\n", r.step, r.train_loss, r.val_loss, r.lr);
    std::fflush(stdout);
  };
  hooks.on_best = [&](const Snapshot<float>& s) {
    save_checkpoint((out / "best.mgpt").string(), Checkpoint{mc, vocab, s.step, s.val_loss, s.params});
  };

  const TrainResult res = train(mc, rc.train, store, hooks);
  const LossRecord& last = res.log.back();
  save_checkpoint((out / "final.mgpt").string(),
                  Checkpoint{mc, vocab, last.step, last.val_loss, res.final_params});

  std::printf("done: parameters %s, elapsed %.2f s, final train %.4f, val %.4f (perplexity %.2f)\n",
              with_commas(param_count(res.final_params)).c_str(), res.elapsed_s, last.train_loss, last.val_loss,
              perplexity(last.val_loss));
  if (res.best)
    std::printf("best val %.4f at step %zu -> %s\n", res.best->val_loss, res.best->step,
                (out / "best.mgpt").string().c_str());
  return kOk;
}

struct SampleArgs {
  std::string checkpoint;
  std::string prompt;
  SampleConfig cfg;
  std::size_t top_k = 200;
};

int cmd_sample(SampleArgs a) {
  a.cfg.top_k = a.top_k == 0 ? std::nullopt : std::optional<std::size_t>(a.top_k);
  a.cfg.validate();
  Checkpoint ck = load_checkpoint(a.checkpoint);
  const Gpt<float> model(ck.config, std::move(ck.params));
  const std::string text = generate(model, ck.vocab, a.prompt, a.cfg);
  std::fwrite(text.data(), 1, text.size(), stdout);
  std::fputc('\n', stdout);
  return kOk;
}

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string split = "val";
  std::size_t eval_iters = 20;
  std::size_t batch_size = 32;
  double train_fraction = 0.9;
  std::uint64_t seed = 42;
  bool from_metadata = false;
};

int cmd_eval(const EvalArgs& a) {
  Checkpoint ck = load_checkpoint(a.checkpoint);
  double loss = 0;
  if (a.from_metadata) {
    if (!ck.val_loss) throw IoError("checkpoint '" + a.checkpoint + "' carries no val_loss");
    loss = *ck.val_loss;
  } else {
    const Split split = parse_split(a.split);
    const std::string path = resolve_data(a.data, "data/input.txt");
    const TokenStore store =
        split_tokens(ck.vocab.encode(read_text_file(path)), a.train_fraction, ck.config.block_size);
    const Gpt<float> model(ck.config, std::move(ck.params));
    RandomState rng(a.seed);
    loss = estimate_loss(model, store, split, a.eval_iters, a.batch_size, rng);
  }
  std::printf("loss %.4f perplexity %.4f\n", loss, perplexity(loss));
  return kOk;
}

int cmd_plot(const std::string& log_path, const std::string& out_path, const std::string& title) {
  const auto log = read_loss_log(log_path);
  if (log.empty()) throw IoError("loss log '" + log_path + "' has no rows");
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + out_path + "' for writing");
  f << render_loss_svg(log, title);
  if (!f) throw IoError("failed writing '" + out_path + "'");
  return kOk;
}

int cmd_vocab(const std::string& data, const std::string& out_path) {
  const std::string json = Vocabulary::build(read_text_file(resolve_data(data, "data/input.txt"))).to_json();
  if (out_path.empty()) {
    std::cout << json << '\n';
    return kOk;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + out_path + "' for writing");
  f << json << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Character-level GPT: train, sample, evaluate, plot"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads for the kernels (0 = runtime default)");

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train from a run config");
  train_cmd->add_option("--config", ta.config, "Run config file")->required();
  train_cmd->add_option("--data", ta.data, "Corpus path (overrides data_path)");
  train_cmd->add_option("--out-dir", ta.out_dir, "Output directory (overrides out_dir)");
  train_cmd->add_option("--max-iters", ta.max_iters, "Truncate training to this many steps");

  SampleArgs sa;
  auto* sample_cmd = app.add_subcommand("sample", "Generate text from a checkpoint");
  sample_cmd->add_option("--checkpoint", sa.checkpoint, "Checkpoint file")->required();
  sample_cmd->add_option("--prompt", sa.prompt, "Prompt text");
  sample_cmd->add_option("--max-new-tokens", sa.cfg.max_new_tokens, "Characters to generate")->capture_default_str();
  sample_cmd->add_option("--temperature", sa.cfg.temperature, "Softmax temperature")->capture_default_str();
  sample_cmd->add_option("--top-k", sa.top_k, "Keep the k most likely tokens (0 = all)")->capture_default_str();
  sample_cmd->add_option("--seed", sa.cfg.seed, "Sampling seed")->capture_default_str();

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Estimate loss and perplexity");
  eval_cmd->add_option("--checkpoint", ea.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--data", ea.data, "Corpus path");
  eval_cmd->add_option("--split", ea.split, "train or val")->capture_default_str();
  eval_cmd->add_option("--eval-iters", ea.eval_iters, "Batches to average")->capture_default_str();
  eval_cmd->add_option("--batch-size", ea.batch_size, "Sequences per batch")->capture_default_str();
  eval_cmd->add_option("--train-fraction", ea.train_fraction, "Train share of the corpus")->capture_default_str();
  eval_cmd->add_option("--seed", ea.seed, "Batch sampling seed")->capture_default_str();
  eval_cmd->add_flag("--from-metadata", ea.from_metadata, "Report the val_loss stored in the checkpoint");

  std::string log_path, svg_path, title = "loss";
  auto* plot_cmd = app.add_subcommand("plot", "Render a loss log as SVG");
  plot_cmd->add_option("--log", log_path, "loss_log.csv")->required();
  plot_cmd->add_option("--out", svg_path, "Output SVG")->required();
  plot_cmd->add_option("--title", title, "Chart title")->capture_default_str();

  std::string vocab_data, vocab_out;
  auto* vocab_cmd = app.add_subcommand("vocab", "Export the corpus vocabulary as JSON");
  vocab_cmd->add_option("--data", vocab_data, "Corpus path");
  vocab_cmd->add_option("--out", vocab_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (threads > 0) kernels::set_num_threads(threads);
    if (*train_cmd) return cmd_train(ta);
    if (*sample_cmd) return cmd_sample(sa);
    if (*eval_cmd) return cmd_eval(ea);
    if (*plot_cmd) return cmd_plot(log_path, svg_path, title);
    if (*vocab_cmd) return cmd_vocab(vocab_data, vocab_out);
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error: training diverged: %s\n", e.what());
    return kDiverged;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIo;
  } catch (const std::exception& e) {
    // Bad prompt characters, out-of-range flags and similar caller mistakes.
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
