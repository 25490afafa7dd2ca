#include "procurl/students/actor_critic.hpp"

#include <algorithm>

#include "procurl/students/softmax_table.hpp"

namespace procurl::students {

LinearActorCritic::LinearActorCritic(std::size_t input_dim, std::size_t num_actions,
                                     ActorCriticConfig config)
    : input_dim_(input_dim),
      num_actions_(num_actions),
      config_(config),
      policy_(num_actions * (input_dim + 1), 0.0),
      critic_(input_dim + 1, 0.0) {
  if (input_dim == 0 || num_actions == 0) throw ContractError("LinearActorCritic: empty shape");
  if (!(config.policy_lr > 0.0) || !(config.critic_lr > 0.0)) {
    throw ContractError("LinearActorCritic: learning rates must be positive");
  }
  if (!(config.discount > 0.0 && config.discount <= 1.0)) {
    throw ContractError("LinearActorCritic: discount must be in (0, 1]");
  }
}

void LinearActorCritic::check_dim(std::span<const double> x) const {
  if (x.size() != input_dim_) {
    throw ContractError("LinearActorCritic: feature dimension " + std::to_string(x.size()) +
                        ", expected " + std::to_string(input_dim_));
  }
}

std::vector<double> LinearActorCritic::logits(std::span<const double> x) const {
  check_dim(x);
  const std::size_t stride = input_dim_ + 1;
  std::vector<double> out(num_actions_);
  for (std::size_t a = 0; a < num_actions_; ++a) {
    const double* w = &policy_[a * stride];
    double z = w[input_dim_];
    for (std::size_t i = 0; i < input_dim_; ++i) z += w[i] * x[i];
    out[a] = z;
  }
  return out;
}

std::vector<double> LinearActorCritic::action_probs(std::span<const double> x) const {
  return softmax(logits(x));
}

double LinearActorCritic::raw_value(std::span<const double> x) const {
  check_dim(x);
  double v = critic_[input_dim_];
  for (std::size_t i = 0; i < input_dim_; ++i) v += critic_[i] * x[i];
  return v;
}

double critic_value(const LinearActorCritic& ac, std::span<const double> x) {
  return std::clamp(ac.raw_value(x), 0.0, 1.0);
}

std::vector<double> policy_gradient(const LinearActorCritic& ac, const Trajectory<Features>& traj) {
  const std::size_t dim = ac.input_dim();
  const std::size_t stride = dim + 1;
  const std::vector<double> returns = rewards_to_go(traj, ac.config().discount);
  std::vector<double> grad(ac.policy_weights().size(), 0.0);
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const auto& step = traj.steps[t];
    if (step.action >= ac.num_actions()) throw ContractError("policy_gradient: action out of range");
    const double adv = returns[t] - ac.raw_value(step.state);
    if (adv == 0.0) continue;
    const std::vector<double> pi = ac.action_probs(step.state);
    for (std::size_t a = 0; a < ac.num_actions(); ++a) {
      const double coef = adv * ((a == step.action ? 1.0 : 0.0) - pi[a]);
      if (coef == 0.0) continue;
      double* g = &grad[a * stride];
      for (std::size_t i = 0; i < dim; ++i) g[i] += coef * step.state[i];
      g[dim] += coef;
    }
  }
  return grad;
}

void actor_critic_episode_step(LinearActorCritic& ac, const Trajectory<Features>& traj) {
  const std::size_t dim = ac.input_dim();
  const std::vector<double> pg = policy_gradient(ac, traj);
  const std::vector<double> returns = rewards_to_go(traj, ac.config().discount);

  // Critic gradient of 1/2 sum (G - V)^2, computed before any weight moves.
  std::vector<double> cg(dim + 1, 0.0);
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const auto& x = traj.steps[t].state;
    const double err = returns[t] - ac.raw_value(x);
    if (err == 0.0) continue;
    for (std::size_t i = 0; i < dim; ++i) cg[i] += err * x[i];
    cg[dim] += err;
  }

  auto& pw = ac.policy_weights();
  for (std::size_t i = 0; i < pw.size(); ++i) pw[i] += ac.config().policy_lr * pg[i];
  auto& cw = ac.critic_weights();
  for (std::size_t i = 0; i < cw.size(); ++i) cw[i] += ac.config().critic_lr * cg[i];
}

LinearActorCritic actor_critic_episode_update(const LinearActorCritic& ac,
                                              const Trajectory<Features>& traj) {
  LinearActorCritic out = ac;
  actor_critic_episode_step(out, traj);
  return out;
}

nlohmann::json to_json(const LinearActorCritic& ac) {
  return {{"kind", "linear_actor_critic"},
          {"input_dim", ac.input_dim()},
          {"num_actions", ac.num_actions()},
          {"policy_lr", ac.config().policy_lr},
          {"critic_lr", ac.config().critic_lr},
          {"discount", ac.config().discount},
          {"policy_weights", ac.policy_weights()},
          {"critic_weights", ac.critic_weights()}};
}

LinearActorCritic linear_actor_critic_from_json(const nlohmann::json& j) {
  LinearActorCritic ac(j.at("input_dim").get<std::size_t>(), j.at("num_actions").get<std::size_t>(),
                       ActorCriticConfig{j.at("policy_lr").get<double>(), j.at("critic_lr").get<double>(),
                                         j.at("discount").get<double>()});
  auto pw = j.at("policy_weights").get<std::vector<double>>();
  auto cw = j.at("critic_weights").get<std::vector<double>>();
  if (pw.size() != ac.policy_weights().size() || cw.size() != ac.critic_weights().size()) {
    throw ContractError("actor-critic snapshot: weight size mismatch");
  }
  ac.policy_weights() = std::move(pw);
  ac.critic_weights() = std::move(cw);
  return ac;
}

}  // namespace procurl::students
