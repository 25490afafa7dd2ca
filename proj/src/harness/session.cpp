#include "procurl/harness/session.hpp"

#include "procurl/envs/abstract.hpp"
#include "procurl/envs/bandit.hpp"
#include "procurl/rollouts.hpp"
#include "procurl/students/abstract_learner.hpp"
#include "procurl/students/actor_critic.hpp"
#include "procurl/students/softmax_table.hpp"

namespace procurl::harness {

std::vector<double> Session::critic_pos(const std::optional<pos::Normalizer>&) const {
  throw ConfigError("this learner has no critic");
}

std::vector<double> Session::exact_pos() const {
  throw ConfigError("exact PoS is not available for this environment");
}

pos::RolloutFn Session::rollout_fn() const {
  return [this](TaskId task, Rng& rng) { return attempt(task, rng); };
}

namespace {

class BanditSession final : public Session {
 public:
  BanditSession(envs::BanditInstance env, const StudentConfig& cfg)
      : env_(std::move(env)),
        table_(env_.num_tasks(), envs::kBanditActions, cfg.eta),
        critic_{std::vector<double>(env_.num_tasks(), 0.0), cfg.critic_lr} {}

  std::size_t pool_size() const override { return env_.num_tasks(); }

  std::size_t train_episode(TaskId task, Rng& rng) override {
    const auto traj = rollout_bandit(env_, table_, task, rng);
    students::reinforce_step(table_, traj, table_.learning_rate(), 1.0);
    critic_.update(task.index, rewards_to_go(traj, 1.0).front());
    return traj.length();
  }

  RolloutOutcome attempt(TaskId task, Rng& rng) const override {
    return summarize(rollout_bandit(env_, table_, task, rng));
  }

  std::size_t rollout_step_bound() const override { return 1; }

  bool has_critic() const override { return true; }
  std::vector<double> critic_pos(const std::optional<pos::Normalizer>& norm) const override {
    return pos::pos_from_critic(critic_, norm);
  }

  bool has_exact_pos() const override { return true; }
  std::vector<double> exact_pos() const override {
    std::vector<double> out(env_.num_tasks());
    for (std::size_t s = 0; s < out.size(); ++s) out[s] = env_.p_rand()[s] * students::policy_prob(table_, s)[0];
    return out;
  }
  std::optional<std::vector<double>> known_pos_star() const override { return env_.p_rand(); }
  std::optional<double> exact_uniform_performance() const override {
    const auto p = exact_pos();
    double sum = 0.0;
    for (double v : p) sum += v;
    return sum / static_cast<double>(p.size());
  }

  std::vector<std::string> metadata_fields() const override { return {"p_rand"}; }
  std::vector<double> task_metadata(TaskId task) const override { return {env_.p_rand(task)}; }

  nlohmann::json snapshot() const override {
    return {{"policy", students::to_json(table_)}, {"critic", students::to_json(critic_)}};
  }

 private:
  envs::BanditInstance env_;
  students::SoftmaxPolicyTable table_;
  students::TabularCritic critic_;
};

class AbstractSession final : public Session {
 public:
  AbstractSession(envs::AbstractTaskSet env, const StudentConfig& cfg, double initial_theta)
      : env_(std::move(env)),
        learner_{ParameterVector(env_.num_tasks(), initial_theta), cfg.alpha, cfg.beta} {
    try {
      learner_.validate();
    } catch (const ContractError& e) {
      throw ConfigError(e.what());
    }
  }

  std::size_t pool_size() const override { return env_.num_tasks(); }

  std::size_t train_episode(TaskId task, Rng& rng) override {
    const RolloutOutcome o = attempt_abstract(env_, learner_, task, rng);
    students::abstract_step(learner_, task, o.succeeded, env_.target(task));
    return o.steps;
  }

  RolloutOutcome attempt(TaskId task, Rng& rng) const override {
    return attempt_abstract(env_, learner_, task, rng);
  }

  std::size_t rollout_step_bound() const override { return 1; }

  bool has_exact_pos() const override { return true; }
  std::vector<double> exact_pos() const override { return learner_.theta; }
  std::optional<std::vector<double>> known_pos_star() const override { return env_.target(); }
  std::optional<double> exact_uniform_performance() const override {
    double sum = 0.0;
    for (double v : learner_.theta) sum += v;
    return sum / static_cast<double>(learner_.theta.size());
  }

  std::vector<std::string> metadata_fields() const override { return {"target"}; }
  std::vector<double> task_metadata(TaskId task) const override { return {env_.target(task)}; }

  nlohmann::json snapshot() const override { return {{"learner", students::to_json(learner_)}}; }

 private:
  envs::AbstractTaskSet env_;
  students::AbstractLearner learner_;
};

class KarelSession final : public Session {
 public:
  KarelSession(envs::KarelPool pool, const StudentConfig& cfg)
      : pool_(std::make_shared<const envs::KarelPool>(std::move(pool))),
        ac_(envs::kObservationDim, envs::kKarelActions,
            students::ActorCriticConfig{cfg.policy_lr, cfg.critic_lr, cfg.discount}) {}

  std::size_t pool_size() const override { return pool_->tasks.size(); }

  std::size_t train_episode(TaskId task, Rng& rng) override {
    const auto traj = rollout_karel(*pool_, ac_, task, rng);
    students::actor_critic_episode_step(ac_, traj);
    return traj.length();
  }

  RolloutOutcome attempt(TaskId task, Rng& rng) const override { return attempt_karel(*pool_, ac_, task, rng); }

  std::size_t rollout_step_bound() const override { return static_cast<std::size_t>(pool_->horizon); }

  bool has_critic() const override { return true; }
  std::vector<double> critic_pos(const std::optional<pos::Normalizer>& norm) const override {
    return pos::pos_from_critic(ac_, *pool_, norm);
  }

  std::vector<std::string> metadata_fields() const override {
    return {"traj_length", "uses_marker_action", "num_distractor_markers", "num_walls"};
  }
  std::vector<double> task_metadata(TaskId task) const override {
    const auto& m = pool_->tasks.at(task.index).metadata;
    return {static_cast<double>(m.traj_length), m.uses_marker_action ? 1.0 : 0.0,
            static_cast<double>(m.num_distractor_markers), static_cast<double>(m.num_walls)};
  }

  nlohmann::json snapshot() const override { return {{"actor_critic", students::to_json(ac_)}}; }

  const students::LinearActorCritic& actor_critic() const { return ac_; }

 private:
  std::shared_ptr<const envs::KarelPool> pool_;
  students::LinearActorCritic ac_;
};

}  // namespace

envs::KarelPool resolve_karel_pool(const EnvironmentConfig& env) {
  if (env.kind != EnvKind::kKarel) throw ConfigError("not a karel environment");
  envs::KarelPool pool;
  if (env.pool_file) {
    pool = envs::load_karel_pool(*env.pool_file);
  } else if (env.generate) {
    pool = envs::generate_karel_pool(env.generate->count, env.generate->generator, RngSeed{env.generate->seed});
  } else {
    throw ConfigError("karel environment needs a pool file or generation parameters");
  }
  pool.horizon = env.horizon;
  return pool;
}

std::unique_ptr<Session> make_session(const EnvironmentConfig& env, const StudentConfig& student) {
  try {
    switch (env.kind) {
      case EnvKind::kBandit: return std::make_unique<BanditSession>(envs::BanditInstance(env.p_rand), student);
      case EnvKind::kAbstract:
        return std::make_unique<AbstractSession>(envs::AbstractTaskSet(env.targets), student, env.initial_theta);
      case EnvKind::kKarel: return std::make_unique<KarelSession>(resolve_karel_pool(env), student);
    }
  } catch (const ContractError& e) {
    throw ConfigError(std::string("environment/student: ") + e.what());
  }
  throw ConfigError("unknown environment kind");
}

pos::RolloutFn karel_rollout_on(const Session& session, std::shared_ptr<const envs::KarelPool> pool) {
  const auto* ks = dynamic_cast<const KarelSession*>(&session);
  if (ks == nullptr) throw ConfigError("held-out pools need a karel session");
  return [ks, pool = std::move(pool)](TaskId task, Rng& rng) {
    return attempt_karel(*pool, ks->actor_critic(), task, rng);
  };
}

}  // namespace procurl::harness
