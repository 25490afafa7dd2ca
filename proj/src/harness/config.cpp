#include "procurl/harness/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include "procurl/envs/bandit.hpp"

namespace procurl::harness {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::string_view where, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::vector<double> linspace(std::size_t n, double lo, double hi) {
  return envs::BanditInstance::linspace(n, lo, hi).p_rand();
}

EnvironmentConfig environment_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("environment: missing 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  EnvironmentConfig e;
  if (kind == "bandit") {
    reject_unknown(j, "environment", {"kind", "p_rand", "num_tasks", "p_min", "p_max"});
    e.kind = EnvKind::kBandit;
    if (j.contains("p_rand")) {
      e.p_rand = j.at("p_rand").get<std::vector<double>>();
    } else {
      e.p_rand = linspace(get_or<std::size_t>(j, "num_tasks", 20), get_or(j, "p_min", 0.05), get_or(j, "p_max", 0.95));
    }
    if (e.p_rand.empty()) throw ConfigError("environment: empty bandit pool");
    for (double p : e.p_rand) {
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("environment: p_rand outside [0,1]");
    }
  } else if (kind == "abstract") {
    reject_unknown(j, "environment", {"kind", "targets", "num_tasks", "target_min", "target_max", "initial_theta"});
    e.kind = EnvKind::kAbstract;
    if (j.contains("targets")) {
      e.targets = j.at("targets").get<std::vector<double>>();
    } else {
      e.targets = linspace(get_or<std::size_t>(j, "num_tasks", 20), get_or(j, "target_min", 0.5),
                           get_or(j, "target_max", 1.0));
    }
    e.initial_theta = get_or(j, "initial_theta", 0.0);
  } else if (kind == "karel") {
    reject_unknown(j, "environment", {"kind", "pool_file", "generate", "horizon"});
    e.kind = EnvKind::kKarel;
    e.horizon = get_or(j, "horizon", envs::kDefaultHorizon);
    if (j.contains("pool_file")) {
      std::filesystem::path p = j.at("pool_file").get<std::string>();
      e.pool_file = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    if (j.contains("generate")) {
      const json& g = j.at("generate");
      reject_unknown(g, "environment.generate", {"count", "seed", "max_traj_len", "wall_prob", "marker_prob"});
      KarelGenerateSpec spec;
      spec.count = get_or<std::size_t>(g, "count", spec.count);
      spec.seed = get_or<std::uint64_t>(g, "seed", spec.seed);
      spec.generator.max_traj_len = get_or(g, "max_traj_len", spec.generator.max_traj_len);
      spec.generator.wall_prob = get_or(g, "wall_prob", spec.generator.wall_prob);
      spec.generator.marker_prob = get_or(g, "marker_prob", spec.generator.marker_prob);
      spec.generator.horizon = e.horizon;
      e.generate = spec;
    }
    if (e.pool_file.has_value() == e.generate.has_value()) {
      throw ConfigError("environment: karel needs exactly one of 'pool_file' or 'generate'");
    }
  } else {
    throw ConfigError("environment: unknown kind '" + kind + "'");
  }
  return e;
}

json environment_to_json(const EnvironmentConfig& e) {
  switch (e.kind) {
    case EnvKind::kBandit: return {{"kind", "bandit"}, {"p_rand", e.p_rand}};
    case EnvKind::kAbstract:
      return {{"kind", "abstract"}, {"targets", e.targets}, {"initial_theta", e.initial_theta}};
    case EnvKind::kKarel: {
      json j = {{"kind", "karel"}, {"horizon", e.horizon}};
      if (e.pool_file) j["pool_file"] = e.pool_file->string();
      if (e.generate) {
        j["generate"] = {{"count", e.generate->count},
                         {"seed", e.generate->seed},
                         {"max_traj_len", e.generate->generator.max_traj_len},
                         {"wall_prob", e.generate->generator.wall_prob},
                         {"marker_prob", e.generate->generator.marker_prob}};
      }
      return j;
    }
  }
  return {};
}

}  // namespace

double default_teacher_beta(EnvKind kind) { return kind == EnvKind::kKarel ? 10.0 : 20.0; }

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("config: seeds must be non-empty");
  if (eval_every < 1) throw ConfigError("config: eval_every must be >= 1");
  // A zero budget is allowed: it yields the initial snapshot only.
  if (total_student_steps != 0 && total_student_steps < eval_every) {
    throw ConfigError("config: total_student_steps must be >= eval_every");
  }
  if (eval_episodes_per_task < 1) throw ConfigError("config: eval_episodes_per_task must be >= 1");
  if (trend_window < 1) throw ConfigError("config: trend_window must be >= 1");
  if (refresh.n_pos < 1 || refresh.c_rollouts < 1) throw ConfigError("config: n_pos and c_rollouts must be >= 1");
  if (refresh.budget_multiplier && *refresh.budget_multiplier < 1.0) {
    throw ConfigError("config: budget_multiplier must be >= 1");
  }
  if (normalizer && !normalizer->dynamic && !(normalizer->v_max > normalizer->v_min)) {
    throw ConfigError("config: static normalizer needs v_max > v_min");
  }
  if (eval_pool && (eval_pool->kind != EnvKind::kKarel || environment.kind != EnvKind::kKarel)) {
    throw ConfigError("config: eval_pool is only supported for karel");
  }
  std::vector<std::string> labels;
  for (const auto& t : strategy_list()) {
    t.validate();
    if (std::find(labels.begin(), labels.end(), t.label(default_teacher_beta(environment.kind))) != labels.end()) {
      throw ConfigError("config: duplicate strategy " + t.label(default_teacher_beta(environment.kind)));
    }
    labels.push_back(t.label(default_teacher_beta(environment.kind)));
  }
}

std::vector<teachers::TeacherConfig> ExperimentConfig::strategy_list() const {
  return strategies.empty() ? std::vector<teachers::TeacherConfig>{teacher} : strategies;
}

ExperimentConfig experiment_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j, "config",
                 {"environment", "student", "teacher", "strategies", "refresh", "normalizer",
                  "total_student_steps", "eval_every", "eval_episodes_per_task", "eval_exact", "seeds",
                  "eval_pool", "trend_window", "checkpoint_snapshots"});
  ExperimentConfig c;
  try {
    if (!j.contains("environment")) throw ConfigError("config: missing 'environment'");
    c.environment = environment_from_json(j.at("environment"), base_dir);
    if (j.contains("student")) {
      const json& s = j.at("student");
      reject_unknown(s, "student", {"eta", "policy_lr", "critic_lr", "discount", "alpha", "beta"});
      c.student.eta = get_or(s, "eta", c.student.eta);
      c.student.policy_lr = get_or(s, "policy_lr", c.student.policy_lr);
      c.student.critic_lr = get_or(s, "critic_lr", c.student.critic_lr);
      c.student.discount = get_or(s, "discount", c.student.discount);
      c.student.alpha = get_or(s, "alpha", c.student.alpha);
      c.student.beta = get_or(s, "beta", c.student.beta);
    }
    if (j.contains("teacher")) c.teacher = teachers::teacher_config_from_json(j.at("teacher"), default_teacher_beta(c.environment.kind));
    if (j.contains("strategies")) {
      for (const auto& t : j.at("strategies")) c.strategies.push_back(teachers::teacher_config_from_json(t, default_teacher_beta(c.environment.kind)));
    }
    if (!j.contains("teacher") && c.strategies.empty()) throw ConfigError("config: need 'teacher' or 'strategies'");
    if (!j.contains("teacher")) c.teacher = c.strategies.front();
    if (j.contains("refresh")) {
      const json& r = j.at("refresh");
      reject_unknown(r, "refresh", {"n_pos", "c_rollouts", "budget_multiplier"});
      c.refresh.n_pos = get_or<std::size_t>(r, "n_pos", c.refresh.n_pos);
      c.refresh.c_rollouts = get_or<std::size_t>(r, "c_rollouts", c.refresh.c_rollouts);
      if (r.contains("budget_multiplier") && !r.at("budget_multiplier").is_null()) {
        c.refresh.budget_multiplier = r.at("budget_multiplier").get<double>();
      }
    }
    if (j.contains("normalizer") && !j.at("normalizer").is_null()) {
      const json& n = j.at("normalizer");
      reject_unknown(n, "normalizer", {"v_min", "v_max", "dynamic"});
      pos::Normalizer norm;
      norm.dynamic = get_or(n, "dynamic", false);
      norm.v_min = get_or(n, "v_min", 0.0);
      norm.v_max = get_or(n, "v_max", 1.0);
      c.normalizer = norm;
    }
    c.total_student_steps = get_or<std::size_t>(j, "total_student_steps", c.total_student_steps);
    c.eval_every = get_or<std::size_t>(j, "eval_every", c.eval_every);
    c.eval_episodes_per_task = get_or<std::size_t>(j, "eval_episodes_per_task", c.eval_episodes_per_task);
    c.eval_exact = get_or(j, "eval_exact", c.eval_exact);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("eval_pool") && !j.at("eval_pool").is_null()) {
      c.eval_pool = environment_from_json(j.at("eval_pool"), base_dir);
    }
    c.trend_window = get_or<std::size_t>(j, "trend_window", c.trend_window);
    c.checkpoint_snapshots = get_or(j, "checkpoint_snapshots", c.checkpoint_snapshots);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return experiment_config_from_json(j, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
  json strategies = json::array();
  for (const auto& t : c.strategies) strategies.push_back(teachers::to_json(t));
  json j = {
      {"environment", environment_to_json(c.environment)},
      {"student",
       {{"eta", c.student.eta},
        {"policy_lr", c.student.policy_lr},
        {"critic_lr", c.student.critic_lr},
        {"discount", c.student.discount},
        {"alpha", c.student.alpha},
        {"beta", c.student.beta}}},
      {"teacher", teachers::to_json(c.teacher)},
      {"strategies", strategies},
      {"refresh",
       {{"n_pos", c.refresh.n_pos},
        {"c_rollouts", c.refresh.c_rollouts},
        {"budget_multiplier", c.refresh.budget_multiplier ? json(*c.refresh.budget_multiplier) : json(nullptr)}}},
      {"total_student_steps", c.total_student_steps},
      {"eval_every", c.eval_every},
      {"eval_episodes_per_task", c.eval_episodes_per_task},
      {"eval_exact", c.eval_exact},
      {"seeds", c.seeds},
      {"trend_window", c.trend_window},
      {"checkpoint_snapshots", c.checkpoint_snapshots},
  };
  if (c.normalizer) {
    j["normalizer"] = {{"v_min", c.normalizer->v_min}, {"v_max", c.normalizer->v_max}, {"dynamic", c.normalizer->dynamic}};
  }
  if (c.eval_pool) j["eval_pool"] = environment_to_json(*c.eval_pool);
  return j;
}

}  // namespace procurl::harness
