#include "procurl/envs/abstract.hpp"

namespace procurl::envs {

AbstractTaskSet::AbstractTaskSet(std::vector<double> target) : target_(std::move(target)) {
  if (target_.empty()) throw ContractError("AbstractTaskSet: empty pool");
  for (double t : target_) {
    if (!(t >= 0.0 && t <= 1.0)) throw ContractError("AbstractTaskSet: target outside [0,1]");
  }
}

double AbstractTaskSet::target(TaskId task) const {
  if (task.index >= target_.size()) throw ContractError("AbstractTaskSet: task out of range");
  return target_[task.index];
}

bool abstract_attempt(const AbstractTaskSet& tasks, const ParameterVector& learner_theta,
                      TaskId task, Rng& rng) {
  if (learner_theta.size() != tasks.num_tasks() || task.index >= tasks.num_tasks()) {
    throw ContractError("abstract_attempt: task/theta size mismatch");
  }
  const double p = learner_theta[task.index];
  if (!(p >= 0.0 && p <= 1.0)) throw ContractError("abstract_attempt: theta outside [0,1]");
  return rng.bernoulli(p);
}

}  // namespace procurl::envs
