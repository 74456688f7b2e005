#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "fixtures.hpp"
#include "minigpt/error.hpp"
#include "minigpt/trainer.hpp"

using namespace minigpt;

namespace {

TrainConfig quick_config(std::size_t steps, std::size_t interval) {
  auto c = fixtures::memorization_train(steps);
  c.eval_interval = interval;
  c.eval_iters = 2;
  c.batch_size = 4;
  return c;
}

}  // namespace

TEST_CASE("selector keeps the strict minimum and the earliest tie") {
  RandomState rng(1);
  const auto params = init_params<float>(fixtures::memorization_model(), rng);
  BestCheckpointSelector<float> sel;
  const double seq[] = {3.0, 2.0, 2.5, 1.9, 2.2};
  const bool expect[] = {true, true, false, true, false};
  for (std::size_t i = 0; i < 5; ++i) CHECK(sel.offer(i * 250, seq[i], params) == expect[i]);
  REQUIRE(sel.best().has_value());
  CHECK(sel.best()->step == 750);  // the fourth evaluation
  CHECK(sel.best()->val_loss == 1.9);

  CHECK_FALSE(sel.offer(1250, 1.9, params));
  CHECK(sel.best()->step == 750);
}

TEST_CASE("snapshot is a deep copy") {
  RandomState rng(1);
  auto params = init_params<float>(fixtures::memorization_model(), rng);
  BestCheckpointSelector<float> sel;
  sel.offer(0, 1.0, params);
  const float before = params.tok_emb.data()[0];
  params.tok_emb.data()[0] += 1.0f;
  CHECK(sel.best()->params.tok_emb.data()[0] == before);
  CHECK_FALSE(sel.best()->params.tok_emb.same_storage(params.tok_emb));
}

TEST_CASE("log cadence covers step 0, every interval and the final step") {
  const auto store = fixtures::memorization_store();
  auto r = train(fixtures::memorization_model(), quick_config(23, 5), store);
  std::vector<std::size_t> steps;
  for (const auto& rec : r.log) steps.push_back(rec.step);
  CHECK(steps == std::vector<std::size_t>{0, 5, 10, 15, 20, 23});
  for (std::size_t i = 1; i < r.log.size(); ++i) CHECK(r.log[i].wall_time_s >= r.log[i - 1].wall_time_s);
  CHECK_FALSE(r.best.has_value());
}

TEST_CASE("training is reproducible under a fixed seed") {
  const auto store = fixtures::memorization_store();
  auto a = train(fixtures::memorization_model(), quick_config(30, 10), store);
  auto b = train(fixtures::memorization_model(), quick_config(30, 10), store);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].train_loss == b.log[i].train_loss);
    CHECK(a.log[i].val_loss == b.log[i].val_loss);
  }
  const auto pa = a.final_params.named(), pb = b.final_params.named();
  for (std::size_t i = 0; i < pa.size(); ++i)
    CHECK(std::equal(pa[i].tensor.data().begin(), pa[i].tensor.data().end(), pb[i].tensor.data().begin()));
}

TEST_CASE("clipped norms never exceed the threshold") {
  const auto store = fixtures::memorization_store();
  auto cfg = quick_config(40, 40);
  cfg.clip_norm = 0.05;
  auto r = train(fixtures::memorization_model(), cfg, store);
  REQUIRE(r.grad_norms.size() == 40);
  bool some_clipped = false;
  for (const auto& g : r.grad_norms) {
    CHECK(g.post_clip <= 0.05 + 1e-6);
    some_clipped = some_clipped || g.pre_clip > 0.05;
  }
  CHECK(some_clipped);
}

TEST_CASE("best_val policy reports the minimum of the log") {
  const auto store = fixtures::memorization_store();
  auto cfg = quick_config(60, 10);
  cfg.policy = CheckpointPolicy::BestVal;
  std::size_t best_calls = 0;
  TrainHooks hooks;
  hooks.on_best = [&](const Snapshot<float>&) { ++best_calls; };
  auto r = train(fixtures::memorization_model(), cfg, store, hooks);
  REQUIRE(r.best.has_value());
  double min_val = r.log[0].val_loss;
  std::size_t min_step = 0;
  for (const auto& rec : r.log)
    if (rec.val_loss < min_val) min_val = rec.val_loss, min_step = rec.step;
  CHECK(r.best->val_loss == min_val);
  CHECK(r.best->step == min_step);
  CHECK(best_calls >= 1);
}

TEST_CASE("memorization of a repeating sequence") {
  const auto store = fixtures::memorization_store();
  auto r = train(fixtures::memorization_model(), fixtures::memorization_train(500), store);
  Gpt<float> model(fixtures::memorization_model(), r.final_params);
  RandomState rng(7);
  const double loss = estimate_loss(model, store, Split::Train, 10, 16, rng);
  CHECK(loss < 0.2);
  CHECK(r.log.back().train_loss < 0.2);
}

TEST_CASE("estimate_loss with one batch equals that batch's loss") {
  const auto store = fixtures::memorization_store();
  RandomState init(3);
  Gpt<float> model(fixtures::memorization_model(), init);
  RandomState a(11), b(11);
  const double est = estimate_loss(model, store, Split::Val, 1, 8, a);
  const Batch batch = sample_batch(store, Split::Val, 8, b);
  auto tape = Tape<float>::inference();
  const double direct = model.forward(tape, batch.x, &batch.y, false, nullptr).loss->item();
  CHECK(est == direct);

  RandomState c(11);
  CHECK(estimate_loss(model, store, Split::Val, 1, 8, c) == est);
  CHECK_THROWS_AS(estimate_loss(model, store, Split::Val, 0, 8, c), std::invalid_argument);
}

TEST_CASE("perplexity") {
  auto two_dp = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return std::string(buf);
  };
  CHECK(two_dp(perplexity(1.7236)) == "5.60");
  CHECK(two_dp(perplexity(1.4780)) == "4.38");
  CHECK(perplexity(0.0) == 1.0);
}

TEST_CASE("config validation and store mismatch") {
  auto c = quick_config(10, 20);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = quick_config(10, 5);
  c.eval_iters = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_NOTHROW(baseline_train_config().validate());
  CHECK_NOTHROW(stronger_train_config().validate());
  const auto store = fixtures::memorization_store(8);
  CHECK_THROWS_AS(train(fixtures::memorization_model(), quick_config(10, 5), store), ConfigError);
}

TEST_CASE("an exploding learning rate aborts with divergence") {
  const auto store = fixtures::memorization_store();
  auto cfg = quick_config(200, 200);
  cfg.lr.fixed_lr = 1e30;
  CHECK_THROWS_AS(train(fixtures::memorization_model(), cfg, store), DivergenceError);
}
