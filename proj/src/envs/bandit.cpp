#include "procurl/envs/bandit.hpp"

#include <string>

namespace procurl::envs {

BanditInstance::BanditInstance(std::vector<double> p_rand) : p_rand_(std::move(p_rand)) {
  if (p_rand_.empty()) throw ContractError("BanditInstance: empty pool");
  for (double p : p_rand_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ContractError("BanditInstance: p_rand outside [0,1]: " + std::to_string(p));
    }
  }
}

BanditInstance BanditInstance::linspace(std::size_t num_tasks, double lo, double hi) {
  if (num_tasks == 0) throw ContractError("BanditInstance::linspace: num_tasks must be positive");
  std::vector<double> p(num_tasks, lo);
  if (num_tasks > 1) {
    for (std::size_t i = 0; i < num_tasks; ++i) {
      p[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(num_tasks - 1);
    }
  }
  return BanditInstance(std::move(p));
}

double BanditInstance::p_rand(TaskId task) const {
  if (task.index >= p_rand_.size()) throw ContractError("BanditInstance: task out of range");
  return p_rand_[task.index];
}

BanditOutcome bandit_step(const BanditInstance& instance, TaskId task, BanditAction action,
                          Rng& rng) {
  const double p = instance.p_rand(task);
  if (action == BanditAction::kA2) return {false, 0.0};
  const bool goal = rng.bernoulli(p);
  return {goal, goal ? 1.0 : 0.0};
}

}  // namespace procurl::envs
