#include "procurl/students/abstract_learner.hpp"

namespace procurl::students {

void AbstractLearner::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(alpha_succ) || !unit(beta_fail)) throw ContractError("AbstractLearner: alpha/beta outside [0,1]");
  if (!(alpha_succ > beta_fail)) throw ContractError("AbstractLearner: requires alpha > beta");
  for (double t : theta) {
    if (!unit(t)) throw ContractError("AbstractLearner: theta outside [0,1]");
  }
}

void abstract_step(AbstractLearner& learner, TaskId task, bool succ, double target) {
  if (task.index >= learner.theta.size()) throw ContractError("abstract_update: task out of range");
  if (!(target >= 0.0 && target <= 1.0)) throw ContractError("abstract_update: target outside [0,1]");
  double& th = learner.theta[task.index];
  const double gap = target - th;
  th += (succ ? learner.alpha_succ : learner.beta_fail) * gap;
}

AbstractLearner abstract_update(const AbstractLearner& learner, TaskId task, bool succ,
                                double target) {
  AbstractLearner out = learner;
  abstract_step(out, task, succ, target);
  return out;
}

nlohmann::json to_json(const AbstractLearner& learner) {
  return {{"kind", "abstract_learner"},
          {"theta", learner.theta},
          {"alpha_succ", learner.alpha_succ},
          {"beta_fail", learner.beta_fail}};
}

AbstractLearner abstract_learner_from_json(const nlohmann::json& j) {
  AbstractLearner l{j.at("theta").get<ParameterVector>(), j.at("alpha_succ").get<double>(),
                    j.at("beta_fail").get<double>()};
  l.validate();
  return l;
}

}  // namespace procurl::students
