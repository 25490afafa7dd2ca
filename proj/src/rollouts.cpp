#include "procurl/rollouts.hpp"

namespace procurl {

Trajectory<std::size_t> rollout_bandit(const envs::BanditInstance& env,
                                       const students::SoftmaxPolicyTable& policy, TaskId task,
                                       Rng& rng) {
  const auto action = static_cast<envs::BanditAction>(rng.categorical(students::policy_prob(policy, task.index)));
  const envs::BanditOutcome o = envs::bandit_step(env, task, action, rng);
  Trajectory<std::size_t> traj;
  traj.steps.push_back({task.index, static_cast<std::size_t>(action), o.reward});
  traj.succeeded = o.reached_goal;
  return traj;
}

RolloutOutcome attempt_abstract(const envs::AbstractTaskSet& env,
                                const students::AbstractLearner& learner, TaskId task, Rng& rng) {
  const bool succ = envs::abstract_attempt(env, learner.theta, task, rng);
  return RolloutOutcome{succ, succ ? 1.0 : 0.0, 1};
}

namespace {

template <class Visit>
bool run_karel(const envs::KarelPool& pool, const students::LinearActorCritic& ac, TaskId task,
               Rng& rng, Visit&& visit) {
  if (task.index >= pool.tasks.size()) throw ContractError("karel rollout: task out of range");
  const envs::KarelTask& kt = pool.tasks[task.index];
  envs::KarelState state = envs::initial_state(kt);
  while (true) {
    const envs::KarelObservation obs = envs::encode_observation(kt, state);
    const std::size_t a = rng.categorical(ac.action_probs(obs));
    const envs::KarelStepResult r = envs::karel_step(kt, state, static_cast<envs::KarelAction>(a), pool.horizon);
    visit(obs, a, r.reward);
    state = r.next;
    if (r.done) return r.reward > 0.0;
  }
}

}  // namespace

Trajectory<students::Features> rollout_karel(const envs::KarelPool& pool,
                                             const students::LinearActorCritic& ac, TaskId task,
                                             Rng& rng) {
  Trajectory<students::Features> traj;
  traj.succeeded = run_karel(pool, ac, task, rng, [&](const envs::KarelObservation& obs, std::size_t a, double r) {
    traj.steps.push_back({students::Features(obs.begin(), obs.end()), a, r});
  });
  return traj;
}

RolloutOutcome attempt_karel(const envs::KarelPool& pool, const students::LinearActorCritic& ac,
                             TaskId task, Rng& rng) {
  RolloutOutcome out;
  out.succeeded = run_karel(pool, ac, task, rng, [&](const envs::KarelObservation&, std::size_t, double r) {
    out.total_reward += r;
    ++out.steps;
  });
  return out;
}

}  // namespace procurl
