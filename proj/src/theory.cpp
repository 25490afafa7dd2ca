#include "procurl/theory.hpp"

#include <cmath>
#include <exception>
#include <string>

namespace procurl::theory {

double delta_improvement(const ParameterVector& theta_star, const ParameterVector& theta_t,
                         const ParameterVector& theta_next) {
  return l1_distance(theta_star, theta_t) - l1_distance(theta_star, theta_next);
}

double closed_form_bandit(double eta, double p, double p_star) {
  if (p_star == 0.0) throw DomainError("closed_form_bandit: p_star must be positive");
  if (!(p >= 0.0 && p <= p_star && p_star <= 1.0)) {
    throw DomainError("closed_form_bandit: requires 0 <= p <= p_star <= 1");
  }
  return 2.0 * eta * p * (1.0 - p / p_star);
}

double closed_form_abstract(double alpha, double beta, double p, double p_star) {
  if (!(p >= 0.0 && p <= 1.0 && p_star >= 0.0 && p_star <= 1.0)) {
    throw DomainError("closed_form_abstract: p and p_star must lie in [0,1]");
  }
  return alpha * p * (p_star - p) + beta * (1.0 - p) * (p_star - p);
}

double logit_for_probability(double q) {
  constexpr double kSaturated = 30.0;
  if (q <= 0.0) return -kSaturated;
  if (q >= 1.0) return kSaturated;
  return std::log(q / (1.0 - q));
}

BanditSetting make_bandit_point(double p, double p_star, double eta, double dominant_logit) {
  if (!(p_star > 0.0 && p >= 0.0 && p <= p_star)) throw DomainError("make_bandit_point: need 0 <= p <= p_star, p_star > 0");
  students::SoftmaxPolicyTable theta(1, envs::kBanditActions, eta);
  theta.at(0, 0) = logit_for_probability(p / p_star);
  students::SoftmaxPolicyTable star(1, envs::kBanditActions, eta);
  star.at(0, 0) = dominant_logit;
  star.at(0, 1) = -dominant_logit;
  return BanditSetting{envs::BanditInstance({p_star}), theta, star, eta};
}

AbstractSetting make_abstract_point(double p, double p_star, double alpha, double beta) {
  students::AbstractLearner learner{{p}, alpha, beta};
  learner.validate();
  return AbstractSetting{envs::AbstractTaskSet({p_star}), learner};
}

namespace {

// Welford accumulator.
struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  [[nodiscard]] double std_error() const {
    if (n < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

bool dominated(const students::SoftmaxPolicyTable& star, const students::SoftmaxPolicyTable& th,
               std::size_t s) {
  return star.at(s, 0) >= th.at(s, 0) && th.at(s, 1) >= star.at(s, 1);
}

McEstimate run_bandit(const BanditSetting& st, TaskId task, std::size_t n, Rng& rng) {
  Moments m;
  McEstimate out;
  out.dominance_violated = !dominated(st.theta_star, st.theta, task.index);
  const std::vector<double> pi = students::policy_prob(st.theta, task.index);
  for (std::size_t i = 0; i < n; ++i) {
    const auto action = static_cast<envs::BanditAction>(rng.categorical(pi));
    const envs::BanditOutcome o = envs::bandit_step(st.env, task, action, rng);
    const auto next = students::bandit_reinforce_update(st.theta, task, action, o.reached_goal, st.eta);
    if (!dominated(st.theta_star, next, task.index)) out.dominance_violated = true;
    m.add(delta_improvement(st.theta_star.values(), st.theta.values(), next.values()));
  }
  out.mean = m.mean;
  out.std_error = m.std_error();
  out.n_samples = m.n;
  return out;
}

McEstimate run_abstract(const AbstractSetting& st, TaskId task, std::size_t n, Rng& rng) {
  Moments m;
  const double target = st.env.target(task);
  for (std::size_t i = 0; i < n; ++i) {
    const bool succ = envs::abstract_attempt(st.env, st.learner.theta, task, rng);
    const auto next = students::abstract_update(st.learner, task, succ, target);
    m.add(delta_improvement(st.env.target(), st.learner.theta, next.theta));
  }
  return McEstimate{m.mean, m.std_error(), m.n, false};
}

PointResult verify_point(const TheoremParams& params, const GridPoint& g, std::uint64_t seed) {
  PointResult r;
  r.p = g.p;
  r.p_star = g.p_star;
  // Tolerate grid values built by repeated addition.
  constexpr double kSlack = 1e-12;
  if (params.kind == TheoremKind::kBandit && (g.p > g.p_star + kSlack || g.p_star <= 0.0)) {
    r.skipped = true;
    return r;
  }
  Rng rng(seed);
  McEstimate est;
  if (params.kind == TheoremKind::kBandit) {
    const double p = std::min(g.p, g.p_star);
    r.closed_form = closed_form_bandit(params.eta, p, g.p_star);
    est = mc_expected_improvement(make_bandit_point(p, g.p_star, params.eta), TaskId{0}, params.n_samples, rng);
  } else {
    r.closed_form = closed_form_abstract(params.alpha, params.beta, g.p, g.p_star);
    est = mc_expected_improvement(make_abstract_point(g.p, g.p_star, params.alpha, params.beta), TaskId{0},
                                  params.n_samples, rng);
  }
  r.mc_mean = est.mean;
  r.mc_stderr = est.std_error;
  r.n_samples = est.n_samples;
  r.dominance_violated = est.dominance_violated;
  r.pass = !est.dominance_violated &&
           std::abs(est.mean - r.closed_form) <= params.z * est.std_error + params.abs_tol;
  return r;
}

void check_params(const TheoremParams& params, const std::vector<GridPoint>& grid) {
  if (grid.empty()) throw ContractError("verify_theorem: empty grid");
  if (params.n_samples < 2) throw ContractError("verify_theorem: need at least 2 samples");
}

}  // namespace

McEstimate mc_expected_improvement(const Setting& setting, TaskId task, std::size_t n_samples, Rng& rng) {
  if (n_samples < 2) throw ContractError("mc_expected_improvement: n_samples must be >= 2");
  return std::visit(
      [&](const auto& st) {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, BanditSetting>) {
          return run_bandit(st, task, n_samples, rng);
        } else {
          return run_abstract(st, task, n_samples, rng);
        }
      },
      setting);
}

std::string_view to_string(TheoremKind k) { return k == TheoremKind::kBandit ? "bandit" : "abstract"; }

TheoremKind theorem_kind_from_string(std::string_view name) {
  if (name == "bandit") return TheoremKind::kBandit;
  if (name == "abstract") return TheoremKind::kAbstract;
  throw ConfigError("unknown theorem setting: " + std::string(name));
}

std::vector<GridPoint> standard_grid() {
  std::vector<GridPoint> grid;
  for (int i = 1; i <= 9; ++i) {
    for (int j = i; j <= 10; ++j) grid.push_back({i / 10.0, j / 10.0});
  }
  return grid;
}

bool TheoremReport::all_pass() const {
  bool any = false;
  for (const auto& p : points) {
    if (p.skipped) continue;
    any = true;
    if (!p.pass) return false;
  }
  return any;
}

TheoremReport verify_theorem(const TheoremParams& params, const std::vector<GridPoint>& grid,
                             std::uint64_t seed) {
  check_params(params, grid);
  TheoremReport report{params, std::vector<PointResult>(grid.size())};
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(grid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      const auto k = static_cast<std::size_t>(i);
      report.points[k] = verify_point(params, grid[k], derive_seed(seed, k));
    } catch (...) {
#pragma omp critical(procurl_theorem_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return report;
}

TheoremReport verify_theorem_serial(const TheoremParams& params, const std::vector<GridPoint>& grid,
                                    std::uint64_t seed) {
  check_params(params, grid);
  TheoremReport report{params, {}};
  for (std::size_t k = 0; k < grid.size(); ++k) report.points.push_back(verify_point(params, grid[k], derive_seed(seed, k)));
  return report;
}

nlohmann::json to_json(const TheoremReport& report) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : report.points) {
    pts.push_back({{"p", p.p},
                   {"p_star", p.p_star},
                   {"closed_form", p.closed_form},
                   {"mc_mean", p.mc_mean},
                   {"mc_stderr", p.mc_stderr},
                   {"n_samples", p.n_samples},
                   {"pass", p.pass},
                   {"skipped", p.skipped},
                   {"dominance_violated", p.dominance_violated}});
  }
  const auto& pr = report.params;
  nlohmann::json params = {{"setting", std::string(to_string(pr.kind))},
                           {"n_samples", pr.n_samples},
                           {"z", pr.z},
                           {"abs_tol", pr.abs_tol}};
  if (pr.kind == TheoremKind::kBandit) {
    params["eta"] = pr.eta;
  } else {
    params["alpha"] = pr.alpha;
    params["beta"] = pr.beta;
  }
  return {{"params", params}, {"all_pass", report.all_pass()}, {"points", pts}};
}

}  // namespace procurl::theory
