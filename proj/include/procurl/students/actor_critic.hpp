#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "procurl/core.hpp"

namespace procurl::students {

using Features = std::vector<double>;

struct ActorCriticConfig {
  double policy_lr = 0.05;
  double critic_lr = 0.05;
  double discount = 0.99;
  friend bool operator==(const ActorCriticConfig&, const ActorCriticConfig&) = default;
};

/// Linear softmax policy and linear state-value critic over a shared
/// feature vector. Both carry a trailing bias weight, so each row has
/// input_dim + 1 entries.
class LinearActorCritic {
 public:
  LinearActorCritic(std::size_t input_dim, std::size_t num_actions, ActorCriticConfig config = {});

  [[nodiscard]] std::size_t input_dim() const { return input_dim_; }
  [[nodiscard]] std::size_t num_actions() const { return num_actions_; }
  [[nodiscard]] const ActorCriticConfig& config() const { return config_; }

  [[nodiscard]] std::vector<double> logits(std::span<const double> x) const;
  [[nodiscard]] std::vector<double> action_probs(std::span<const double> x) const;
  /// Unclipped linear value.
  [[nodiscard]] double raw_value(std::span<const double> x) const;

  /// Row-major [action][input_dim + 1].
  [[nodiscard]] const std::vector<double>& policy_weights() const { return policy_; }
  std::vector<double>& policy_weights() { return policy_; }
  [[nodiscard]] const std::vector<double>& critic_weights() const { return critic_; }
  std::vector<double>& critic_weights() { return critic_; }

  friend bool operator==(const LinearActorCritic&, const LinearActorCritic&) = default;

 private:
  void check_dim(std::span<const double> x) const;

  std::size_t input_dim_;
  std::size_t num_actions_;
  ActorCriticConfig config_;
  std::vector<double> policy_;
  std::vector<double> critic_;
};

/// Critic output clipped to [0, 1], for use as a success-probability proxy.
double critic_value(const LinearActorCritic& ac, std::span<const double> x);

/// Gradient (same layout as policy_weights) of
///   sum_tau A^(tau) * log pi(a^(tau) | x^(tau)),  A^(tau) = G^(tau) - V(x^(tau)),
/// with the advantages held fixed at the current critic.
std::vector<double> policy_gradient(const LinearActorCritic& ac, const Trajectory<Features>& traj);

/// One REINFORCE-with-baseline step for the policy and one squared-error
/// gradient step for the critic.
void actor_critic_episode_step(LinearActorCritic& ac, const Trajectory<Features>& traj);
LinearActorCritic actor_critic_episode_update(const LinearActorCritic& ac,
                                              const Trajectory<Features>& traj);

nlohmann::json to_json(const LinearActorCritic& ac);
LinearActorCritic linear_actor_critic_from_json(const nlohmann::json& j);

}  // namespace procurl::students
