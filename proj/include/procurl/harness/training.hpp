#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "procurl/harness/config.hpp"
#include "procurl/pos.hpp"
#include "procurl/students/softmax_table.hpp"

namespace procurl::harness {

struct EvalResult {
  double mean_reward = 0.0;
  /// Environment steps spent evaluating; never charged to the ledger.
  std::size_t steps = 0;
};

/// Mean over tasks of the mean episode return from each start state.
/// Task i uses stream derive_seed(seed, i); tasks run concurrently.
EvalResult evaluate_uniform(const pos::RolloutFn& rollout, std::size_t pool_size,
                            std::size_t episodes_per_task, std::uint64_t seed);
EvalResult evaluate_uniform_serial(const pos::RolloutFn& rollout, std::size_t pool_size,
                                   std::size_t episodes_per_task, std::uint64_t seed);
/// Closed form for the bandit pool: mean of p_rand(s) * pi(a1|s).
double evaluate_uniform_exact(const envs::BanditInstance& env, const students::SoftmaxPolicyTable& policy);

struct MetricsRecord {
  /// Nominal checkpoint (a multiple of eval_every, or the final budget).
  std::size_t checkpoint = 0;
  std::size_t student_steps = 0;
  std::size_t teacher_steps = 0;
  std::size_t eval_steps = 0;
  std::size_t episode_index = 0;
  std::optional<TaskId> selected_task;
  std::vector<double> selected_task_metadata;
  double train_pool_mean_reward = 0.0;
  std::optional<double> eval_pool_mean_reward;
  double wall_clock_ms = 0.0;
  std::optional<nlohmann::json> snapshot;
};

struct Selection {
  std::size_t student_steps = 0;
  TaskId task;
};

struct RunResult {
  std::string strategy;
  std::uint64_t seed = 0;
  std::vector<MetricsRecord> records;
  std::vector<Selection> selections;
  std::vector<std::string> metadata_fields;
  /// task_metadata[task][field]
  std::vector<std::vector<double>> task_metadata;
  nlohmann::json final_snapshot;
  pos::StepLedger ledger;
  /// Sum of all training-episode lengths plus all refresh rollout lengths.
  std::size_t charged_episode_steps = 0;
  /// Exact-PoS argmax runs check that each pick maximises the proximal score.
  std::size_t argmax_checks = 0;
  std::size_t argmax_violations = 0;
};

RunResult run_training(const ExperimentConfig& config, const teachers::TeacherConfig& teacher,
                       std::uint64_t seed);
inline RunResult run_training(const ExperimentConfig& config, std::uint64_t seed) {
  return run_training(config, config.teacher, seed);
}

/// Every (strategy, seed) pair, strategy-major, using the same seed list for
/// every strategy. Runs execute concurrently; output order is fixed.
std::vector<RunResult> run_benchmark(const ExperimentConfig& config);

nlohmann::json to_json(const RunResult& run);
RunResult run_result_from_json(const nlohmann::json& j);

}  // namespace procurl::harness
