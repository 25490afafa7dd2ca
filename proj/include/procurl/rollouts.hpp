#pragma once

#include "procurl/core.hpp"
#include "procurl/envs/abstract.hpp"
#include "procurl/envs/bandit.hpp"
#include "procurl/envs/karel.hpp"
#include "procurl/students/abstract_learner.hpp"
#include "procurl/students/actor_critic.hpp"
#include "procurl/students/softmax_table.hpp"

namespace procurl {

/// Summary of one policy rollout from a task's start state.
struct RolloutOutcome {
  bool succeeded = false;
  double total_reward = 0.0;
  std::size_t steps = 0;
};

Trajectory<std::size_t> rollout_bandit(const envs::BanditInstance& env,
                                       const students::SoftmaxPolicyTable& policy, TaskId task,
                                       Rng& rng);

RolloutOutcome attempt_abstract(const envs::AbstractTaskSet& env,
                                const students::AbstractLearner& learner, TaskId task, Rng& rng);

/// Full trajectory with 88-dim observations, for learning.
Trajectory<students::Features> rollout_karel(const envs::KarelPool& pool,
                                             const students::LinearActorCritic& ac, TaskId task,
                                             Rng& rng);
/// Same random stream as rollout_karel but keeps only the outcome.
RolloutOutcome attempt_karel(const envs::KarelPool& pool, const students::LinearActorCritic& ac,
                             TaskId task, Rng& rng);

template <class State>
RolloutOutcome summarize(const Trajectory<State>& traj) {
  RolloutOutcome out{traj.succeeded, 0.0, traj.steps.size()};
  for (const auto& s : traj.steps) out.total_reward += s.reward;
  return out;
}

}  // namespace procurl
