#include "procurl/pos.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace procurl::pos {

void PoSRefreshPolicy::validate() const {
  if (n_pos < 1) throw ConfigError("refresh: n_pos must be >= 1");
  if (c_rollouts < 1) throw ConfigError("refresh: c_rollouts must be >= 1");
  if (budget_multiplier && !(*budget_multiplier >= 1.0)) {
    throw ConfigError("refresh: budget_multiplier must be >= 1");
  }
  if (rollout_step_bound < 1) throw ConfigError("refresh: rollout_step_bound must be >= 1");
}

Normalizer Normalizer::from_values(std::span<const double> values) {
  if (values.empty()) throw ContractError("Normalizer::from_values: empty");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return Normalizer{*lo, *hi, true};
}

double normalize_value(double v, const Normalizer& norm) {
  if (!std::isfinite(v)) throw ContractError("normalize_value: non-finite value");
  const double range = norm.v_max - norm.v_min;
  if (!(range > 0.0)) {
    if (!norm.dynamic) throw ConfigError("normalize_value: static normalizer needs v_max > v_min");
    return 0.0;
  }
  return std::clamp((v - norm.v_min) / range, 0.0, 1.0);
}

PosEstimate estimate_pos_mc(const RolloutFn& rollout, TaskId task, std::size_t c_rollouts, Rng& rng) {
  if (c_rollouts < 1) throw ContractError("estimate_pos_mc: c_rollouts must be >= 1");
  std::size_t wins = 0;
  PosEstimate out;
  for (std::size_t i = 0; i < c_rollouts; ++i) {
    const RolloutOutcome o = rollout(task, rng);
    wins += o.succeeded ? 1 : 0;
    out.steps += o.steps;
  }
  out.pos = static_cast<double>(wins) / static_cast<double>(c_rollouts);
  return out;
}

PosRefreshResult refresh_pos_mc(const RolloutFn& rollout, std::size_t pool_size,
                                std::size_t c_rollouts, std::uint64_t seed) {
  PosRefreshResult out{std::vector<double>(pool_size, 0.0), 0};
  std::vector<std::size_t> steps(pool_size, 0);
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(pool_size);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      const PosEstimate e = estimate_pos_mc(rollout, TaskId{static_cast<std::size_t>(i)}, c_rollouts, rng);
      out.pos[static_cast<std::size_t>(i)] = e.pos;
      steps[static_cast<std::size_t>(i)] = e.steps;
    } catch (...) {
#pragma omp critical(procurl_refresh_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  for (std::size_t s : steps) out.steps += s;
  return out;
}

PosRefreshResult refresh_pos_mc_serial(const RolloutFn& rollout, std::size_t pool_size,
                                       std::size_t c_rollouts, std::uint64_t seed) {
  PosRefreshResult out{std::vector<double>(pool_size, 0.0), 0};
  for (std::size_t i = 0; i < pool_size; ++i) {
    Rng rng(derive_seed(seed, i));
    const PosEstimate e = estimate_pos_mc(rollout, TaskId{i}, c_rollouts, rng);
    out.pos[i] = e.pos;
    out.steps += e.steps;
  }
  return out;
}

std::vector<double> pos_from_critic(std::span<const double> raw_values,
                                    const std::optional<Normalizer>& norm) {
  std::vector<double> out(raw_values.begin(), raw_values.end());
  if (norm) {
    const Normalizer n = norm->dynamic ? Normalizer::from_values(raw_values) : *norm;
    for (double& v : out) v = normalize_value(v, n);
  } else {
    for (double& v : out) v = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

std::vector<double> pos_from_critic(const students::LinearActorCritic& ac, const envs::KarelPool& pool,
                                    const std::optional<Normalizer>& norm) {
  if (ac.input_dim() != envs::kObservationDim) {
    throw ContractError("pos_from_critic: critic input dimension does not match the Karel encoder");
  }
  std::vector<double> raw(pool.tasks.size());
  for (std::size_t i = 0; i < pool.tasks.size(); ++i) {
    const auto& task = pool.tasks[i];
    raw[i] = ac.raw_value(envs::encode_observation(task, envs::initial_state(task)));
  }
  return pos_from_critic(raw, norm);
}

std::vector<double> pos_from_critic(const students::TabularCritic& critic,
                                    const std::optional<Normalizer>& norm) {
  return pos_from_critic(critic.values, norm);
}

bool should_refresh(const StepLedger& ledger, const PoSRefreshPolicy& policy, std::size_t pool_size) {
  if (ledger.student_steps - ledger.last_refresh_student_steps < policy.n_pos) return false;
  if (!policy.budget_multiplier) return true;
  const double next_cost = static_cast<double>(pool_size) * static_cast<double>(policy.c_rollouts) *
                           static_cast<double>(policy.rollout_step_bound);
  const double planned = static_cast<double>(policy.planned_student_steps);
  const double projected = planned + static_cast<double>(ledger.teacher_steps) + next_cost;
  return projected <= *policy.budget_multiplier * planned;
}

}  // namespace procurl::pos
