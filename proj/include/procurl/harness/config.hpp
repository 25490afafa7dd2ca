#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "procurl/core.hpp"
#include "procurl/envs/karel.hpp"
#include "procurl/pos.hpp"
#include "procurl/teachers.hpp"

namespace procurl::harness {

enum class EnvKind { kBandit, kAbstract, kKarel };

struct KarelGenerateSpec {
  std::size_t count = 100;
  std::uint64_t seed = 0;
  envs::KarelGeneratorConfig generator;
};

struct EnvironmentConfig {
  EnvKind kind = EnvKind::kBandit;
  /// bandit: per-task p_rand.
  std::vector<double> p_rand;
  /// abstract: per-task target theta*, plus the learner's starting theta.
  std::vector<double> targets;
  double initial_theta = 0.0;
  /// karel: either a pool file or generation parameters.
  std::optional<std::filesystem::path> pool_file;
  std::optional<KarelGenerateSpec> generate;
  int horizon = envs::kDefaultHorizon;
};

struct StudentConfig {
  double eta = 0.1;         // tabular REINFORCE step size
  double policy_lr = 0.05;  // linear actor
  double critic_lr = 0.05;  // tabular and linear critics
  double discount = 0.99;   // Karel reward-to-go
  double alpha = 0.5;       // abstract learner, success step
  double beta = 0.1;        // abstract learner, failure step
};

struct RefreshConfig {
  std::size_t n_pos = 1;
  std::size_t c_rollouts = 20;
  std::optional<double> budget_multiplier;
};

/// Softmax temperature used when a teacher entry omits beta.
double default_teacher_beta(EnvKind kind);

struct ExperimentConfig {
  EnvironmentConfig environment;
  StudentConfig student;
  teachers::TeacherConfig teacher;
  /// Benchmarks run each of these; empty means just `teacher`.
  std::vector<teachers::TeacherConfig> strategies;
  RefreshConfig refresh;
  std::optional<pos::Normalizer> normalizer;
  std::size_t total_student_steps = 1000;
  std::size_t eval_every = 100;
  std::size_t eval_episodes_per_task = 10;
  /// Analytic evaluation where the environment admits it (bandit, abstract).
  bool eval_exact = true;
  std::vector<std::uint64_t> seeds{0};
  std::optional<EnvironmentConfig> eval_pool;
  std::size_t trend_window = 500;
  bool checkpoint_snapshots = false;

  void validate() const;
  /// `strategies`, or `{teacher}` when that list is empty.
  [[nodiscard]] std::vector<teachers::TeacherConfig> strategy_list() const;
};

/// Strict parse: unknown keys anywhere are a ConfigError. Relative pool
/// paths resolve against `base_dir`.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& c);

}  // namespace procurl::harness
