#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gradcheck.hpp"
#include "minigpt/dataset.hpp"
#include "minigpt/error.hpp"
#include "minigpt/model.hpp"
#include "minigpt/trainer.hpp"
#include "test_paths.hpp"

using namespace minigpt;

namespace {

ModelConfig tiny_config(bool tied = false) { return ModelConfig{4, 11, 1, 2, 8, 0.0, tied}; }

IdTensor ids_1xT(const TokenIds& ids) { return IdTensor::from({1, ids.size()}, ids); }

template <typename T>
std::vector<T> logits_of(const Gpt<T>& model, const TokenIds& ids) {
  auto tape = Tape<T>::inference();
  const auto out = model.forward(tape, ids_1xT(ids), nullptr, false, nullptr);
  return {out.logits.data().begin(), out.logits.data().end()};
}

}  // namespace

TEST_CASE("parameter counts") {
  RandomState rng(42);
  CHECK(Gpt<float>(baseline_model_config(), rng).param_count() == 826433);
  CHECK(Gpt<float>(stronger_model_config(), rng).param_count() == 10770881);
  CHECK(closed_form_param_count(baseline_model_config()) == 826433);
  CHECK(closed_form_param_count(stronger_model_config()) == 10770881);

  auto untied = stronger_model_config();
  untied.tie_weights = false;
  CHECK(closed_form_param_count(untied) - closed_form_param_count(stronger_model_config()) == 65 * 384);

  const ModelConfig degenerate{2, 2, 0, 1, 2, 0.0, false};
  CHECK(param_count(empty_params<float>(degenerate)) == 18);
  CHECK(closed_form_param_count(degenerate) == 18);
}

TEST_CASE("named enumeration order") {
  const auto p = empty_params<float>(ModelConfig{4, 5, 2, 1, 4, 0.0, false});
  const auto named = p.named();
  REQUIRE(named.size() == 2 + 2 * 16 + 4);
  CHECK(named[0].name == "tok_emb");
  CHECK(named[1].name == "pos_emb");
  CHECK(named[2].name == "blocks.0.ln1.gain");
  CHECK(named[4].name == "blocks.0.attn.q.weight");
  CHECK(named[17].name == "blocks.0.mlp.proj.bias");
  CHECK(named[18].name == "blocks.1.ln1.gain");
  CHECK(named[34].name == "ln_f.gain");
  CHECK(named[36].name == "head.bias");
  CHECK(named[37].name == "head.weight");

  const auto tied = empty_params<float>(ModelConfig{4, 5, 1, 1, 4, 0.0, true});
  CHECK(tied.tied());
  CHECK(tied.named().back().name == "head.bias");
}

TEST_CASE("initialization statistics on the largest matrix") {
  RandomState rng(42);
  const auto p = init_params<float>(baseline_model_config(), rng);
  const auto& w = p.blocks[0].mlp_fc_weight;
  REQUIRE(w.numel() == 128 * 512);
  double mean = 0, sq = 0;
  for (float x : w.data()) mean += x;
  mean /= static_cast<double>(w.numel());
  for (float x : w.data()) sq += (x - mean) * (x - mean);
  const double sd = std::sqrt(sq / static_cast<double>(w.numel() - 1));
  CHECK(std::abs(mean) < 0.005);
  CHECK(sd >= 0.015);
  CHECK(sd <= 0.025);

  for (float x : p.blocks[0].q_bias.data()) CHECK(x == 0.0f);
  for (float x : p.lnf_gain.data()) CHECK(x == 1.0f);
  for (float x : p.lnf_bias.data()) CHECK(x == 0.0f);
}

TEST_CASE("init is deterministic under a fixed seed") {
  RandomState a(7), b(7);
  const auto pa = init_params<float>(tiny_config(), a);
  const auto pb = init_params<float>(tiny_config(), b);
  const auto na = pa.named(), nb = pb.named();
  for (std::size_t i = 0; i < na.size(); ++i)
    CHECK(std::equal(na[i].tensor.data().begin(), na[i].tensor.data().end(), nb[i].tensor.data().begin()));
}

TEST_CASE("forward shapes and argument checks") {
  RandomState rng(1);
  Gpt<float> model(ModelConfig{8, 65, 1, 2, 16, 0.0, false}, rng);
  Tape<float> tape;
  std::vector<std::int32_t> ids(3 * 8);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int32_t>(i % 65);
  const auto idx = IdTensor::from({3, 8}, ids);
  const auto out = model.forward(tape, idx, &idx, false, nullptr);
  CHECK(out.logits.shape() == Shape{3, 8, 65});
  REQUIRE(out.loss.has_value());
  CHECK(out.loss->numel() == 1);

  auto long_ids = IdTensor::from({1, 9}, TokenIds(9, 0));
  CHECK_THROWS_AS(model.forward(tape, long_ids, nullptr, false, nullptr), std::invalid_argument);
  auto bad_targets = IdTensor::from({1, 8}, TokenIds(8, 0));
  CHECK_THROWS_AS(model.forward(tape, idx, &bad_targets, false, nullptr), ShapeError);
  CHECK_THROWS(model.forward(tape, IdTensor::from({1, 2}, {0, 65}), nullptr, false, nullptr));
}

TEST_CASE("causality probe") {
  RandomState rng(3);
  const ModelConfig cfg{8, 11, 2, 2, 8, 0.0, false};
  Gpt<float> model(cfg, rng);
  const TokenIds base{1, 4, 2, 9, 0, 7, 3, 5};
  const auto ref = logits_of(model, base);
  for (std::size_t p = 0; p < base.size(); ++p) {
    TokenIds changed = base;
    changed[p] = (changed[p] + 5) % 11;
    const auto got = logits_of(model, changed);
    for (std::size_t t = 0; t < base.size(); ++t) {
      const bool same = std::equal(got.begin() + t * 11, got.begin() + (t + 1) * 11, ref.begin() + t * 11);
      if (t < p)
        CHECK_MESSAGE(same, "position ", t, " moved after perturbing ", p);
      else if (t == p)
        CHECK_FALSE(same);
    }
  }
}

TEST_CASE("logits_last equals the final row of forward") {
  RandomState rng(5);
  Gpt<float> model(ModelConfig{6, 11, 1, 2, 8, 0.0, false}, rng);
  const TokenIds ctx{3, 1, 4, 1, 5};
  const auto full = logits_of(model, ctx);
  const auto last = model.logits_last(ctx);
  REQUIRE(last.size() == 11);
  for (std::size_t v = 0; v < 11; ++v) CHECK(last[v] == full[4 * 11 + v]);
  CHECK_THROWS_AS(model.logits_last({}), std::invalid_argument);
  CHECK_THROWS_AS(model.logits_last(TokenIds(7, 0)), std::invalid_argument);
}

TEST_CASE("dropout-off forward is pure") {
  RandomState rng(9);
  auto cfg = tiny_config();
  cfg.dropout = 0.3;
  Gpt<float> model(cfg, rng);
  const TokenIds ctx{1, 2, 3, 4};
  CHECK(logits_of(model, ctx) == logits_of(model, ctx));

  Tape<float> tape;
  CHECK_THROWS_AS(model.forward(tape, ids_1xT(ctx), nullptr, true, nullptr), std::invalid_argument);
  RandomState r1(1), r2(2);
  auto a = model.forward(tape, ids_1xT(ctx), nullptr, true, &r1).logits;
  auto b = model.forward(tape, ids_1xT(ctx), nullptr, true, &r2).logits;
  CHECK_FALSE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
}

TEST_CASE("tied head shares storage with the token embedding") {
  RandomState rng(11);
  Gpt<double> model(tiny_config(true), rng);
  auto& p = model.params();
  REQUIRE(p.tied());
  CHECK(model.param_count() == closed_form_param_count(tiny_config(true)));
  for (auto& x : p.head_bias.data()) x = 0.1 * rng.normal(0.0, 1.0);

  const TokenIds ctx{2, 0, 5};
  const auto base = model.logits_last(ctx);

  // Row 7 never appears in the input, so a unit bump of tok_emb[7][j] moves
  // only logit 7, and by exactly the final hidden state's j-th entry.
  const std::size_t d = 8, w = 7;
  std::vector<double> hidden(d);
  for (std::size_t j = 0; j < d; ++j) {
    double& cell = p.tok_emb.data()[w * d + j];
    const double saved = cell;
    cell += 1.0;
    const auto bumped = model.logits_last(ctx);
    cell = saved;
    hidden[j] = bumped[w] - base[w];
    for (std::size_t v = 0; v < 11; ++v)
      if (v != w) CHECK(bumped[v] == doctest::Approx(base[v]).epsilon(1e-12));
  }
  for (std::size_t v = 0; v < 11; ++v) {
    double dot = p.head_bias.data()[v];
    for (std::size_t j = 0; j < d; ++j) dot += hidden[j] * p.tok_emb.data()[v * d + j];
    CHECK(base[v] == doctest::Approx(dot).epsilon(1e-9));
  }
}

TEST_CASE("full tiny model passes the finite-difference check") {
  for (bool tied : {false, true}) {
    CAPTURE(tied);
    RandomState rng(2024);
    Gpt<double> model(tiny_config(tied), rng);
    // Widen the init so the gradients are not dominated by round-off.
    for (auto& np : model.params().named())
      for (auto& x : np.tensor.data()) x = (np.tensor.rank() >= 2 ? 12.0 * x : x + 0.2 * rng.normal(0.0, 1.0));

    const auto idx = IdTensor::from({2, 4}, {1, 7, 3, 10, 0, 2, 2, 9});
    const auto tgt = IdTensor::from({2, 4}, {7, 3, 10, 4, 2, 2, 9, 5});
    std::vector<std::pair<std::string, Tensor<double>>> inputs;
    for (auto& np : model.params().named()) inputs.emplace_back(np.name, np.tensor);
    const auto r = gradcheck::check(
        inputs, [&](Tape<double>& tape) { return *model.forward(tape, idx, &tgt, false, nullptr).loss; }, 1e-3);
    CHECK(r.checked == model.param_count());
    CHECK_MESSAGE(r.max_rel_error < 1e-3, "worst ", r.worst, " at ", r.max_rel_error);
  }
}

TEST_CASE("untrained baseline loss is near ln 65") {
  const std::string text = read_text_file(test_paths::corpus());
  const auto vocab = Vocabulary::build(text);
  REQUIRE(vocab.size() == 65);
  const auto store = split_tokens(vocab.encode(text), 0.9, 128);
  RandomState rng(42);
  Gpt<float> model(baseline_model_config(), rng);
  for (Split s : {Split::Train, Split::Val}) {
    const double loss = estimate_loss(model, store, s, 4, 32, rng);
    CAPTURE(split_name(s));
    CHECK(loss >= 4.0);
    CHECK(loss <= 4.4);
  }
}
