#include "procurl/students/softmax_table.hpp"

#include <algorithm>
#include <cmath>

namespace procurl::students {

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw ContractError("softmax: empty logits");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

SoftmaxPolicyTable::SoftmaxPolicyTable(std::size_t num_states, std::size_t num_actions,
                                       double learning_rate)
    : num_states_(num_states),
      num_actions_(num_actions),
      learning_rate_(learning_rate),
      theta_(num_states * num_actions, 0.0) {
  if (num_states == 0 || num_actions == 0) throw ContractError("SoftmaxPolicyTable: empty shape");
  if (!(learning_rate > 0.0)) throw ContractError("SoftmaxPolicyTable: learning rate must be positive");
}

double SoftmaxPolicyTable::at(std::size_t state, std::size_t action) const {
  if (state >= num_states_ || action >= num_actions_) throw ContractError("SoftmaxPolicyTable: index out of range");
  return theta_[state * num_actions_ + action];
}

double& SoftmaxPolicyTable::at(std::size_t state, std::size_t action) {
  if (state >= num_states_ || action >= num_actions_) throw ContractError("SoftmaxPolicyTable: index out of range");
  return theta_[state * num_actions_ + action];
}

std::span<const double> SoftmaxPolicyTable::row(std::size_t state) const {
  if (state >= num_states_) throw ContractError("SoftmaxPolicyTable: state out of range");
  return std::span<const double>(theta_).subspan(state * num_actions_, num_actions_);
}

std::vector<double> policy_prob(const SoftmaxPolicyTable& table, std::size_t state) {
  return softmax(table.row(state));
}

void reinforce_step(SoftmaxPolicyTable& table, const Trajectory<std::size_t>& traj, double eta,
                    double discount) {
  const std::vector<double> returns = rewards_to_go(traj, discount);
  const std::size_t na = table.num_actions();
  // Accumulate against the frozen pre-update table.
  std::vector<double> delta(table.values().size(), 0.0);
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const auto& step = traj.steps[t];
    if (step.action >= na) throw ContractError("reinforce_update: action out of range");
    if (returns[t] == 0.0) continue;
    const std::vector<double> pi = policy_prob(table, step.state);
    for (std::size_t a = 0; a < na; ++a) {
      const double grad = (a == step.action ? 1.0 : 0.0) - pi[a];
      delta[step.state * na + a] += eta * returns[t] * grad;
    }
  }
  for (std::size_t s = 0; s < table.num_states(); ++s) {
    for (std::size_t a = 0; a < na; ++a) table.at(s, a) += delta[s * na + a];
  }
}

SoftmaxPolicyTable reinforce_update(const SoftmaxPolicyTable& table,
                                    const Trajectory<std::size_t>& traj, double eta,
                                    double discount) {
  SoftmaxPolicyTable out = table;
  reinforce_step(out, traj, eta, discount);
  return out;
}

void bandit_reinforce_step(SoftmaxPolicyTable& table, TaskId task, envs::BanditAction action,
                           bool succ, double eta) {
  if (table.num_actions() != envs::kBanditActions) {
    throw ContractError("bandit_reinforce_update: table must have exactly two actions");
  }
  if (action != envs::BanditAction::kA1 || !succ) return;
  const std::size_t s = task.index;
  const double step = eta * (1.0 - policy_prob(table, s)[0]);
  table.at(s, 0) += step;
  table.at(s, 1) -= step;
}

SoftmaxPolicyTable bandit_reinforce_update(const SoftmaxPolicyTable& table, TaskId task,
                                           envs::BanditAction action, bool succ, double eta) {
  SoftmaxPolicyTable out = table;
  bandit_reinforce_step(out, task, action, succ, eta);
  return out;
}

void TabularCritic::update(std::size_t state, double target) {
  if (state >= values.size()) throw ContractError("TabularCritic: state out of range");
  values[state] += learning_rate * (target - values[state]);
}

nlohmann::json to_json(const SoftmaxPolicyTable& table) {
  return {{"kind", "softmax_table"},
          {"num_states", table.num_states()},
          {"num_actions", table.num_actions()},
          {"learning_rate", table.learning_rate()},
          {"theta", table.values()}};
}

SoftmaxPolicyTable softmax_table_from_json(const nlohmann::json& j) {
  SoftmaxPolicyTable t(j.at("num_states").get<std::size_t>(), j.at("num_actions").get<std::size_t>(),
                       j.at("learning_rate").get<double>());
  const auto theta = j.at("theta").get<std::vector<double>>();
  if (theta.size() != t.values().size()) throw ContractError("softmax table snapshot: theta size mismatch");
  for (std::size_t s = 0; s < t.num_states(); ++s) {
    for (std::size_t a = 0; a < t.num_actions(); ++a) t.at(s, a) = theta[s * t.num_actions() + a];
  }
  return t;
}

nlohmann::json to_json(const TabularCritic& critic) {
  return {{"kind", "tabular_critic"}, {"learning_rate", critic.learning_rate}, {"values", critic.values}};
}

TabularCritic tabular_critic_from_json(const nlohmann::json& j) {
  return TabularCritic{j.at("values").get<std::vector<double>>(), j.at("learning_rate").get<double>()};
}

}  // namespace procurl::students
