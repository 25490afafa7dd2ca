#pragma once

#include <vector>

#include "procurl/core.hpp"

namespace procurl::envs {

/// The two abstract actions of the contextual-bandit pool.
enum class BanditAction : std::size_t { kA1 = 0, kA2 = 1 };

inline constexpr std::size_t kBanditActions = 2;

/// Pool of one-step contextual bandit tasks sharing a single goal state.
/// Action a1 reaches the goal with probability p_rand(s); a2 self-loops.
class BanditInstance {
 public:
  explicit BanditInstance(std::vector<double> p_rand);

  /// Evenly spaced p_rand values in [lo, hi].
  static BanditInstance linspace(std::size_t num_tasks, double lo, double hi);

  [[nodiscard]] std::size_t num_tasks() const { return p_rand_.size(); }
  [[nodiscard]] double p_rand(TaskId task) const;
  [[nodiscard]] const std::vector<double>& p_rand() const { return p_rand_; }

 private:
  std::vector<double> p_rand_;
};

struct BanditOutcome {
  bool reached_goal = false;
  double reward = 0.0;
};

/// One episode (H = 1). The goal-state reward is folded into the step, so
/// reward == 1 exactly when the goal is reached.
BanditOutcome bandit_step(const BanditInstance& instance, TaskId task, BanditAction action,
                          Rng& rng);

}  // namespace procurl::envs
