#pragma once

#include <json.hpp>

#include "procurl/core.hpp"

namespace procurl::students {

/// Direct performance parameterisation: theta[s] is the success probability
/// on task s. A success moves theta[s] a fraction alpha of the way to the
/// target, a failure a fraction beta.
struct AbstractLearner {
  ParameterVector theta;
  double alpha_succ = 0.5;
  double beta_fail = 0.1;

  void validate() const;
  friend bool operator==(const AbstractLearner&, const AbstractLearner&) = default;
};

void abstract_step(AbstractLearner& learner, TaskId task, bool succ, double target);
AbstractLearner abstract_update(const AbstractLearner& learner, TaskId task, bool succ,
                                double target);

nlohmann::json to_json(const AbstractLearner& learner);
AbstractLearner abstract_learner_from_json(const nlohmann::json& j);

}  // namespace procurl::students
