#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "procurl/core.hpp"
#include "procurl/envs/bandit.hpp"

namespace procurl::students {

/// Numerically stable softmax (max-subtracted).
std::vector<double> softmax(std::span<const double> logits);

/// Tabular softmax policy: pi(a|s) proportional to exp(theta[s,a]).
/// Storage is row-major, one row of `num_actions` logits per state.
class SoftmaxPolicyTable {
 public:
  SoftmaxPolicyTable(std::size_t num_states, std::size_t num_actions, double learning_rate);

  [[nodiscard]] std::size_t num_states() const { return num_states_; }
  [[nodiscard]] std::size_t num_actions() const { return num_actions_; }
  [[nodiscard]] double learning_rate() const { return learning_rate_; }

  [[nodiscard]] double at(std::size_t state, std::size_t action) const;
  double& at(std::size_t state, std::size_t action);
  [[nodiscard]] std::span<const double> row(std::size_t state) const;
  [[nodiscard]] const ParameterVector& values() const { return theta_; }

  friend bool operator==(const SoftmaxPolicyTable&, const SoftmaxPolicyTable&) = default;

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  double learning_rate_;
  ParameterVector theta_;
};

std::vector<double> policy_prob(const SoftmaxPolicyTable& table, std::size_t state);

/// Generic REINFORCE: theta += eta * sum_tau G^(tau) * grad log pi(a^(tau)|s^(tau)),
/// every gradient evaluated at the pre-update parameters.
void reinforce_step(SoftmaxPolicyTable& table, const Trajectory<std::size_t>& traj, double eta,
                    double discount = 1.0);
SoftmaxPolicyTable reinforce_update(const SoftmaxPolicyTable& table,
                                    const Trajectory<std::size_t>& traj, double eta,
                                    double discount = 1.0);

/// Specialised bandit form: only a successful a1 attempt moves the row.
void bandit_reinforce_step(SoftmaxPolicyTable& table, TaskId task, envs::BanditAction action,
                           bool succ, double eta);
SoftmaxPolicyTable bandit_reinforce_update(const SoftmaxPolicyTable& table, TaskId task,
                                           envs::BanditAction action, bool succ, double eta);

/// Per-state value estimates moved toward observed returns. Gives the tabular
/// student a critic for value-based task scoring.
struct TabularCritic {
  std::vector<double> values;
  double learning_rate = 0.1;

  void update(std::size_t state, double target);
  friend bool operator==(const TabularCritic&, const TabularCritic&) = default;
};

nlohmann::json to_json(const SoftmaxPolicyTable& table);
SoftmaxPolicyTable softmax_table_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TabularCritic& critic);
TabularCritic tabular_critic_from_json(const nlohmann::json& j);

}  // namespace procurl::students
