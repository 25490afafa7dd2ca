#pragma once

#include <vector>

#include "procurl/core.hpp"

namespace procurl::envs {

/// Independent-task setting with direct performance parameterisation:
/// the learner's parameter for a task *is* its probability of success.
class AbstractTaskSet {
 public:
  explicit AbstractTaskSet(std::vector<double> target);

  [[nodiscard]] std::size_t num_tasks() const { return target_.size(); }
  [[nodiscard]] double target(TaskId task) const;
  [[nodiscard]] const std::vector<double>& target() const { return target_; }

 private:
  std::vector<double> target_;
};

/// Bernoulli(theta[task]) attempt.
bool abstract_attempt(const AbstractTaskSet& tasks, const ParameterVector& learner_theta,
                      TaskId task, Rng& rng);

}  // namespace procurl::envs
