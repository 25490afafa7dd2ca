#include <doctest.h>

#include <cmath>

#include "procurl/envs/bandit.hpp"
#include "procurl/envs/karel.hpp"
#include "procurl/pos.hpp"
#include "procurl/rollouts.hpp"
#include "procurl/students/actor_critic.hpp"
#include "procurl/students/softmax_table.hpp"

using namespace procurl;
using namespace procurl::pos;

namespace {

// Bandit rollouts under a policy that always plays a1.
RolloutFn always_a1(const envs::BanditInstance& env) {
  return [&env](TaskId task, Rng& rng) {
    const auto r = envs::bandit_step(env, task, envs::BanditAction::kA1, rng);
    return RolloutOutcome{r.reached_goal, r.reward, 1};
  };
}

}  // namespace

TEST_CASE("estimate on a certain success is 1") {
  const envs::BanditInstance env({1.0});
  Rng rng(1);
  const auto e = estimate_pos_mc(always_a1(env), TaskId{0}, 50, rng);
  CHECK(e.pos == 1.0);
  CHECK(e.steps == 50);
}

TEST_CASE("estimate matches p_rand within a binomial band") {
  const envs::BanditInstance env({0.3});
  Rng rng(2);
  const auto e = estimate_pos_mc(always_a1(env), TaskId{0}, 10000, rng);
  CHECK(std::abs(e.pos - 0.3) <= 0.015);
  CHECK(e.steps == 10000);
}

TEST_CASE("estimate charges one step per bandit rollout") {
  const envs::BanditInstance env({0.2, 0.6});
  students::SoftmaxPolicyTable policy(2, 2, 0.1);
  const RolloutFn fn = [&](TaskId t, Rng& rng) { return summarize(rollout_bandit(env, policy, t, rng)); };
  Rng rng(3);
  CHECK(estimate_pos_mc(fn, TaskId{1}, 20, rng).steps == 20);
}

TEST_CASE("estimate is a multiple of 1/c") {
  const envs::BanditInstance env({0.37});
  Rng rng(4);
  for (std::size_t c : {1, 3, 7, 20}) {
    for (int i = 0; i < 50; ++i) {
      const double p = estimate_pos_mc(always_a1(env), TaskId{0}, c, rng).pos;
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      const double k = p * static_cast<double>(c);
      CHECK(std::abs(k - std::round(k)) < 1e-9);
    }
  }
  CHECK_THROWS_AS(estimate_pos_mc(always_a1(env), TaskId{0}, 0, rng), ContractError);
}

TEST_CASE("parallel refresh equals the serial reference") {
  const auto env = envs::BanditInstance::linspace(37, 0.05, 0.95);
  students::SoftmaxPolicyTable policy(37, 2, 0.1);
  for (std::size_t s = 0; s < 37; ++s) policy.at(s, 0) = 0.1 * static_cast<double>(s) - 1.0;
  const RolloutFn fn = [&](TaskId t, Rng& rng) { return summarize(rollout_bandit(env, policy, t, rng)); };
  const auto a = refresh_pos_mc(fn, 37, 25, 99);
  const auto b = refresh_pos_mc_serial(fn, 37, 25, 99);
  CHECK(a.pos == b.pos);
  CHECK(a.steps == b.steps);
  CHECK(a.steps == 37 * 25);
  CHECK(refresh_pos_mc(fn, 37, 25, 100).pos != a.pos);
}

TEST_CASE("parallel refresh equals serial on karel") {
  const auto pool = envs::generate_karel_pool(40, {}, RngSeed{8});
  students::LinearActorCritic ac(envs::kObservationDim, envs::kKarelActions);
  Rng w(5);
  for (auto& x : ac.policy_weights()) x = w.uniform(-0.3, 0.3);
  const RolloutFn fn = [&](TaskId t, Rng& rng) { return attempt_karel(pool, ac, t, rng); };
  const auto a = refresh_pos_mc(fn, pool.tasks.size(), 10, 7);
  const auto b = refresh_pos_mc_serial(fn, pool.tasks.size(), 10, 7);
  CHECK(a.pos == b.pos);
  CHECK(a.steps == b.steps);
}

TEST_CASE("refresh surfaces rollout errors") {
  const RolloutFn bad = [](TaskId t, Rng&) -> RolloutOutcome {
    if (t.index == 3) throw DomainError("boom");
    return {true, 1.0, 1};
  };
  CHECK_THROWS_AS(refresh_pos_mc(bad, 8, 2, 1), DomainError);
  CHECK_THROWS_AS(refresh_pos_mc_serial(bad, 8, 2, 1), DomainError);
}

TEST_CASE("normalize examples") {
  const Normalizer n{0.0, 60.0, false};
  CHECK(normalize_value(60.0, n) == 1.0);
  CHECK(normalize_value(0.0, n) == 0.0);
  CHECK(normalize_value(30.0, n) == 0.5);
  CHECK(normalize_value(90.0, n) == 1.0);
  CHECK(normalize_value(-5.0, n) == 0.0);
  CHECK_THROWS_AS(normalize_value(1.0, Normalizer{2.0, 2.0, false}), ConfigError);
  CHECK(normalize_value(2.0, Normalizer{2.0, 2.0, true}) == 0.0);
}

TEST_CASE("normalize is monotone and idempotent on the unit range") {
  Rng rng(6);
  const Normalizer unit{0.0, 1.0, false};
  const Normalizer n{-3.0, 7.0, false};
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(-10, 10);
    const double b = rng.uniform(-10, 10);
    if (a <= b) CHECK(normalize_value(a, n) <= normalize_value(b, n));
    const double u = rng.uniform();
    CHECK(normalize_value(u, unit) == u);
  }
}

TEST_CASE("critic pos examples") {
  const auto pool = envs::generate_karel_pool(10, {}, RngSeed{2});
  students::LinearActorCritic ac(envs::kObservationDim, envs::kKarelActions);
  for (double v : pos_from_critic(ac, pool, std::nullopt)) CHECK(v == 0.0);

  const std::vector<double> raw{-0.5, 0.2, 0.7, 1.4};
  const auto clipped = pos_from_critic(raw, std::nullopt);
  CHECK(clipped == std::vector<double>{0.0, 0.2, 0.7, 1.0});
  const auto dyn = pos_from_critic(raw, Normalizer{0, 1, true});
  CHECK(dyn[0] == 0.0);
  CHECK(dyn[3] == 1.0);
  CHECK(dyn[1] == doctest::Approx(0.7 / 1.9));

  students::LinearActorCritic small(4, 2);
  CHECK_THROWS_AS(pos_from_critic(small, pool, std::nullopt), ContractError);

  students::TabularCritic tc{{0.25, 1.5}, 0.1};
  CHECK(pos_from_critic(tc, std::nullopt) == std::vector<double>{0.25, 1.0});
}

TEST_CASE("should_refresh cadence") {
  PoSRefreshPolicy policy;
  policy.n_pos = 100;
  StepLedger ledger;
  CHECK_FALSE(should_refresh(ledger, policy, 20));
  ledger.charge_student(99);
  CHECK_FALSE(should_refresh(ledger, policy, 20));
  ledger.charge_student(1);
  CHECK(should_refresh(ledger, policy, 20));
  ledger.record_refresh(400);
  CHECK_FALSE(should_refresh(ledger, policy, 20));
  CHECK(ledger.refresh_count == 1);
  CHECK(ledger.total_steps() == 500);
}

TEST_CASE("budget caps the number of refreshes") {
  PoSRefreshPolicy policy;
  policy.n_pos = 1;
  policy.c_rollouts = 20;
  policy.budget_multiplier = 2.0;
  policy.planned_student_steps = 10000;
  policy.rollout_step_bound = 1;
  StepLedger ledger;
  while (ledger.student_steps < 10000) {
    ledger.charge_student(1);
    if (should_refresh(ledger, policy, 100)) ledger.record_refresh(100 * 20);
  }
  CHECK(ledger.refresh_count == 5);
  CHECK(ledger.teacher_steps == 10000);
  CHECK(ledger.total_steps() <= 2 * ledger.student_steps);
}

TEST_CASE("refresh policy validation") {
  PoSRefreshPolicy p;
  p.n_pos = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.budget_multiplier = 0.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  CHECK_NOTHROW(p.validate());
}
