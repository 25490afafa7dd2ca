#pragma once

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "procurl/core.hpp"
#include "procurl/envs/abstract.hpp"
#include "procurl/envs/bandit.hpp"
#include "procurl/students/abstract_learner.hpp"
#include "procurl/students/softmax_table.hpp"

namespace procurl::theory {

/// ||theta* - theta_t||_1 - ||theta* - theta_next||_1.
double delta_improvement(const ParameterVector& theta_star, const ParameterVector& theta_t,
                         const ParameterVector& theta_next);

/// Expected improvement of a softmax REINFORCE learner on a bandit task:
/// 2 * eta * p * (1 - p / p_star).
double closed_form_bandit(double eta, double p, double p_star);

/// Expected improvement of the abstract learner:
/// alpha * p * (p_star - p) + beta * (1 - p) * (p_star - p).
double closed_form_abstract(double alpha, double beta, double p, double p_star);

/// Logit giving pi(a1|s) = q against a zero a2 logit; q in {0, 1} maps to -/+30.
double logit_for_probability(double q);

struct BanditSetting {
  envs::BanditInstance env;
  students::SoftmaxPolicyTable theta;
  /// Dominant target: theta_star[s,a1] above and theta_star[s,a2] below every iterate.
  students::SoftmaxPolicyTable theta_star;
  double eta = 0.1;
};

struct AbstractSetting {
  envs::AbstractTaskSet env;
  students::AbstractLearner learner;
};

using Setting = std::variant<BanditSetting, AbstractSetting>;

/// Single-task bandit with p_rand = p_star and pi(a1|s) = p / p_star.
BanditSetting make_bandit_point(double p, double p_star, double eta, double dominant_logit = 50.0);
/// Single-task abstract setting with theta = p and target p_star.
AbstractSetting make_abstract_point(double p, double p_star, double alpha, double beta);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  /// Set when an update moved past theta* so the telescoped identity no longer applies.
  bool dominance_violated = false;
};

/// Sample mean and standard error of delta_improvement over independent
/// one-step attempts on `task`, each applied to a scratch copy of the learner.
McEstimate mc_expected_improvement(const Setting& setting, TaskId task, std::size_t n_samples, Rng& rng);

enum class TheoremKind { kBandit, kAbstract };
std::string_view to_string(TheoremKind k);
TheoremKind theorem_kind_from_string(std::string_view name);

struct TheoremParams {
  TheoremKind kind = TheoremKind::kBandit;
  double eta = 0.1;
  double alpha = 1.0;
  double beta = 0.0;
  std::size_t n_samples = 20000;
  double z = 4.0;
  double abs_tol = 5e-3;
};

struct GridPoint {
  double p = 0.0;
  double p_star = 0.0;
};

/// p in {0.1, ..., 0.9}, p_star in {p, ..., 1.0}, step 0.1.
std::vector<GridPoint> standard_grid();

struct PointResult {
  double p = 0.0;
  double p_star = 0.0;
  double closed_form = 0.0;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  std::size_t n_samples = 0;
  bool pass = false;
  bool skipped = false;
  bool dominance_violated = false;
};

struct TheoremReport {
  TheoremParams params;
  std::vector<PointResult> points;

  /// True when every non-skipped point passes and at least one was checked.
  [[nodiscard]] bool all_pass() const;
};

/// Grid points run concurrently; point i draws from derive_seed(seed, i).
TheoremReport verify_theorem(const TheoremParams& params, const std::vector<GridPoint>& grid,
                             std::uint64_t seed);
TheoremReport verify_theorem_serial(const TheoremParams& params, const std::vector<GridPoint>& grid,
                                    std::uint64_t seed);

nlohmann::json to_json(const TheoremReport& report);

}  // namespace procurl::theory
