#include "procurl/teachers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <utility>

namespace procurl::teachers {

namespace {

constexpr std::array<std::pair<Strategy, std::string_view>, 9> kStrategyNames = {{
    {Strategy::kProcurlArgmax, "ProCuRL-argmax"},
    {Strategy::kProcurlSoftmax, "ProCuRL-softmax"},
    {Strategy::kProcurlEnv, "ProCuRL-env"},
    {Strategy::kProcurlVal, "ProCuRL-val"},
    {Strategy::kProcurlGeneralized, "ProCuRL-generalized"},
    {Strategy::kIid, "IID"},
    {Strategy::kEasy, "Easy"},
    {Strategy::kHard, "Hard"},
    {Strategy::kSpaceAlt, "SPaCE-alt"},
}};

constexpr std::array<std::pair<PosSource, std::string_view>, 4> kSourceNames = {{
    {PosSource::kNone, "none"},
    {PosSource::kRollouts, "rollouts"},
    {PosSource::kCritic, "critic"},
    {PosSource::kExact, "exact"},
}};

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

std::string_view to_string(Strategy s) {
  for (const auto& [k, v] : kStrategyNames) {
    if (k == s) return v;
  }
  return "?";
}

Strategy strategy_from_string(std::string_view name) {
  for (const auto& [k, v] : kStrategyNames) {
    if (v == name) return k;
  }
  throw ConfigError("unknown strategy: " + std::string(name));
}

std::string_view to_string(PosSource s) {
  for (const auto& [k, v] : kSourceNames) {
    if (k == s) return v;
  }
  return "?";
}

PosSource pos_source_from_string(std::string_view name) {
  for (const auto& [k, v] : kSourceNames) {
    if (v == name) return k;
  }
  throw ConfigError("unknown pos_source: " + std::string(name));
}

PosSource default_pos_source(Strategy s) {
  switch (s) {
    case Strategy::kIid: return PosSource::kNone;
    case Strategy::kProcurlVal:
    case Strategy::kSpaceAlt: return PosSource::kCritic;
    default: return PosSource::kRollouts;
  }
}

TeacherConfig TeacherConfig::for_strategy(Strategy strategy, double beta) {
  TeacherConfig c;
  c.strategy = strategy;
  c.beta = beta;
  c.pos_source = default_pos_source(strategy);
  return c;
}

void TeacherConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("teacher: beta must be >= 0");
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) throw ConfigError("teacher: gamma1 and gamma2 must be > 0");
  if (!(noise_eps >= 0.0)) throw ConfigError("teacher: noise_eps must be >= 0");
  if (strategy == Strategy::kProcurlEnv && pos_source != PosSource::kRollouts) {
    throw ConfigError("teacher: ProCuRL-env estimates PoS from rollouts");
  }
  if (strategy == Strategy::kProcurlVal && pos_source != PosSource::kCritic) {
    throw ConfigError("teacher: ProCuRL-val takes PoS from the critic");
  }
  if (strategy != Strategy::kIid && pos_source == PosSource::kNone) {
    throw ConfigError("teacher: " + std::string(to_string(strategy)) + " needs a PoS source");
  }
}

std::string TeacherConfig::label(double default_beta) const {
  std::vector<std::string> tags;
  if (pos_source != default_pos_source(strategy)) tags.emplace_back(to_string(pos_source));
  if (pos_star_mode == PosStarMode::kProvided) tags.emplace_back("pos*");
  if (beta != default_beta && strategy != Strategy::kProcurlArgmax) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "beta=%g", beta);
    tags.emplace_back(buf);
  }
  if (strategy == Strategy::kProcurlGeneralized) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "g=%g/%g", gamma1, gamma2);
    tags.emplace_back(buf);
  }
  if (noise_eps > 0.0) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "eps=%g", noise_eps);
    tags.emplace_back(buf);
  }
  std::string out(to_string(strategy));
  if (tags.empty()) return out;
  out += "[";
  for (std::size_t i = 0; i < tags.size(); ++i) out += (i ? "," : "") + tags[i];
  return out + "]";
}

nlohmann::json to_json(const TeacherConfig& c) {
  return {{"strategy", std::string(to_string(c.strategy))},
          {"beta", c.beta},
          {"gamma1", c.gamma1},
          {"gamma2", c.gamma2},
          {"noise_eps", c.noise_eps},
          {"pos_star_mode", c.pos_star_mode == PosStarMode::kAllOnes ? "all-ones" : "provided"},
          {"pos_source", std::string(to_string(c.pos_source))}};
}

TeacherConfig teacher_config_from_json(const nlohmann::json& j, double default_beta) {
  if (!j.is_object()) throw ConfigError("teacher: expected an object");
  static const std::array<std::string_view, 7> kKeys = {
      "strategy", "beta", "gamma1", "gamma2", "noise_eps", "pos_star_mode", "pos_source"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw ConfigError("teacher: unknown key '" + key + "'");
    }
  }
  TeacherConfig c = TeacherConfig::for_strategy(strategy_from_string(j.at("strategy").get<std::string>()));
  c.beta = j.value("beta", default_beta);
  c.gamma1 = j.value("gamma1", c.gamma1);
  c.gamma2 = j.value("gamma2", c.gamma2);
  c.noise_eps = j.value("noise_eps", c.noise_eps);
  if (j.contains("pos_star_mode")) {
    const auto m = j.at("pos_star_mode").get<std::string>();
    if (m == "all-ones") {
      c.pos_star_mode = PosStarMode::kAllOnes;
    } else if (m == "provided") {
      c.pos_star_mode = PosStarMode::kProvided;
    } else {
      throw ConfigError("teacher: unknown pos_star_mode '" + m + "'");
    }
  }
  if (j.contains("pos_source")) c.pos_source = pos_source_from_string(j.at("pos_source").get<std::string>());
  c.validate();
  return c;
}

PoSTable PoSTable::zeros(std::size_t n) {
  return PoSTable{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0), std::vector<double>(n, 0.0)};
}

void PoSTable::validate() const {
  if (pos_t.empty()) throw ContractError("PoSTable: empty");
  if (pos_star.size() != pos_t.size()) throw ContractError("PoSTable: pos_star length mismatch");
  if (prev_pos && prev_pos->size() != pos_t.size()) throw ContractError("PoSTable: prev_pos length mismatch");
  auto check = [](const std::vector<double>& v, const char* what) {
    for (double x : v) {
      if (!in_unit(x)) throw ContractError(std::string("PoSTable: ") + what + " entry outside [0,1]");
    }
  };
  check(pos_t, "pos_t");
  check(pos_star, "pos_star");
  if (prev_pos) check(*prev_pos, "prev_pos");
}

double curriculum_score(double pos_t, double pos_star) { return pos_t * (pos_star - pos_t); }

double generalized_score(double pos_t, double pos_star, double gamma1, double gamma2) {
  return pos_t * (gamma1 * pos_star - gamma2 * pos_t);
}

std::vector<double> strategy_scores(const TeacherConfig& config, const PoSTable& pos, Rng& rng) {
  pos.validate();
  const std::size_t n = pos.size();
  if (config.strategy == Strategy::kSpaceAlt && !pos.prev_pos) {
    throw ConfigError("SPaCE-alt requires previous PoS values");
  }

  std::vector<double> p = pos.pos_t;
  if (config.noise_eps > 0.0) {
    for (double& v : p) v = std::clamp(v + rng.uniform(-config.noise_eps, config.noise_eps), 0.0, 1.0);
  }

  const bool provided = config.pos_star_mode == PosStarMode::kProvided;
  std::vector<double> scores(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double star = provided ? pos.pos_star[i] : 1.0;
    switch (config.strategy) {
      case Strategy::kProcurlArgmax:
      case Strategy::kProcurlSoftmax: scores[i] = curriculum_score(p[i], star); break;
      case Strategy::kProcurlEnv:
      case Strategy::kProcurlVal: scores[i] = curriculum_score(p[i], 1.0); break;
      case Strategy::kProcurlGeneralized:
        scores[i] = generalized_score(p[i], star, config.gamma1, config.gamma2);
        break;
      case Strategy::kIid: scores[i] = 0.0; break;
      case Strategy::kEasy: scores[i] = p[i]; break;
      case Strategy::kHard: scores[i] = 1.0 - p[i]; break;
      case Strategy::kSpaceAlt: scores[i] = p[i] - (*pos.prev_pos)[i]; break;
    }
  }
  return scores;
}

TaskId select_argmax(const std::vector<double>& scores) {
  if (scores.empty()) throw ContractError("select_argmax: empty scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return TaskId{best};
}

std::vector<double> softmax_distribution(const std::vector<double>& scores, double beta) {
  if (scores.empty()) throw ContractError("select_softmax: empty scores");
  if (!(beta >= 0.0)) throw ContractError("select_softmax: beta must be >= 0");
  const double mx = *std::max_element(scores.begin(), scores.end());
  std::vector<double> w(scores.size());
  double z = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    // beta == 0 must give exp(0) even if a score were infinite.
    w[i] = beta == 0.0 ? 1.0 : std::exp(beta * (scores[i] - mx));
    z += w[i];
  }
  for (double& v : w) v /= z;
  return w;
}

TaskId select_softmax(const std::vector<double>& scores, double beta, Rng& rng) {
  return TaskId{rng.categorical(softmax_distribution(scores, beta))};
}

TaskId select_task(const TeacherConfig& config, const std::vector<double>& scores, Rng& rng) {
  if (config.strategy == Strategy::kProcurlArgmax) return select_argmax(scores);
  return select_softmax(scores, config.beta, rng);
}

}  // namespace procurl::teachers
