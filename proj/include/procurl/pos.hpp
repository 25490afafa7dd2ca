#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "procurl/core.hpp"
#include "procurl/envs/karel.hpp"
#include "procurl/rollouts.hpp"
#include "procurl/students/actor_critic.hpp"
#include "procurl/students/softmax_table.hpp"

namespace procurl::pos {

/// Any policy/environment pair that can attempt a task. Must be callable
/// concurrently from several threads with distinct generators.
using RolloutFn = std::function<RolloutOutcome(TaskId, Rng&)>;

struct PoSRefreshPolicy {
  std::size_t n_pos = 1;
  std::size_t c_rollouts = 20;
  std::optional<double> budget_multiplier;
  /// Student steps the run intends to take; the budget is relative to it.
  std::size_t planned_student_steps = 0;
  /// Upper bound on steps of one rollout (1 for bandits, the horizon for Karel).
  std::size_t rollout_step_bound = 1;

  void validate() const;
};

struct StepLedger {
  std::size_t student_steps = 0;
  std::size_t teacher_steps = 0;
  std::size_t refresh_count = 0;
  std::size_t last_refresh_student_steps = 0;

  void charge_student(std::size_t steps) { student_steps += steps; }
  void record_refresh(std::size_t teacher_cost) {
    teacher_steps += teacher_cost;
    ++refresh_count;
    last_refresh_student_steps = student_steps;
  }
  [[nodiscard]] std::size_t total_steps() const { return student_steps + teacher_steps; }
};

struct Normalizer {
  double v_min = 0.0;
  double v_max = 1.0;
  bool dynamic = false;

  /// Min/max taken from `values`.
  static Normalizer from_values(std::span<const double> values);
};

/// (v - v_min) / (v_max - v_min) clipped to [0, 1]. A degenerate range
/// (possible only for dynamic normalisers over a constant pool) maps to 0.
double normalize_value(double v, const Normalizer& norm);

struct PosEstimate {
  double pos = 0.0;
  std::size_t steps = 0;
};

PosEstimate estimate_pos_mc(const RolloutFn& rollout, TaskId task, std::size_t c_rollouts, Rng& rng);

struct PosRefreshResult {
  std::vector<double> pos;
  std::size_t steps = 0;
};

/// Task i is estimated from its own stream derive_seed(seed, i), so the
/// OpenMP kernel and the serial reference agree exactly.
PosRefreshResult refresh_pos_mc(const RolloutFn& rollout, std::size_t pool_size,
                                std::size_t c_rollouts, std::uint64_t seed);
PosRefreshResult refresh_pos_mc_serial(const RolloutFn& rollout, std::size_t pool_size,
                                       std::size_t c_rollouts, std::uint64_t seed);

/// Critic outputs to PoS: normalised when a normaliser is given (a dynamic
/// one is rebuilt from these values), clipped to [0, 1] either way.
std::vector<double> pos_from_critic(std::span<const double> raw_values,
                                    const std::optional<Normalizer>& norm);
std::vector<double> pos_from_critic(const students::LinearActorCritic& ac, const envs::KarelPool& pool,
                                    const std::optional<Normalizer>& norm);
std::vector<double> pos_from_critic(const students::TabularCritic& critic,
                                    const std::optional<Normalizer>& norm);

bool should_refresh(const StepLedger& ledger, const PoSRefreshPolicy& policy, std::size_t pool_size);

}  // namespace procurl::pos
