#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "procurl/envs/karel.hpp"
#include "procurl/harness/config.hpp"
#include "procurl/pos.hpp"

namespace procurl::harness {

/// One learner bound to one task pool: everything the training loop needs
/// without knowing which environment it drives.
class Session {
 public:
  virtual ~Session() = default;

  [[nodiscard]] virtual std::size_t pool_size() const = 0;
  /// Roll one episode from `task` and update the learner. Returns steps used.
  virtual std::size_t train_episode(TaskId task, Rng& rng) = 0;
  /// Read-only attempt under the current policy; safe to call concurrently.
  [[nodiscard]] virtual RolloutOutcome attempt(TaskId task, Rng& rng) const = 0;
  [[nodiscard]] virtual std::size_t rollout_step_bound() const = 0;

  [[nodiscard]] virtual bool has_critic() const { return false; }
  [[nodiscard]] virtual std::vector<double> critic_pos(const std::optional<pos::Normalizer>& norm) const;
  [[nodiscard]] virtual bool has_exact_pos() const { return false; }
  [[nodiscard]] virtual std::vector<double> exact_pos() const;
  /// Per-task PoS* when the environment knows it.
  [[nodiscard]] virtual std::optional<std::vector<double>> known_pos_star() const { return std::nullopt; }
  /// Closed-form uniform performance, when available.
  [[nodiscard]] virtual std::optional<double> exact_uniform_performance() const { return std::nullopt; }

  [[nodiscard]] virtual std::vector<std::string> metadata_fields() const = 0;
  [[nodiscard]] virtual std::vector<double> task_metadata(TaskId task) const = 0;
  [[nodiscard]] virtual nlohmann::json snapshot() const = 0;

  [[nodiscard]] pos::RolloutFn rollout_fn() const;
};

std::unique_ptr<Session> make_session(const EnvironmentConfig& env, const StudentConfig& student);

/// Pool described by a karel environment config (loaded or generated).
envs::KarelPool resolve_karel_pool(const EnvironmentConfig& env);

/// Rollouts of a Karel session's current policy on another pool.
pos::RolloutFn karel_rollout_on(const Session& session, std::shared_ptr<const envs::KarelPool> pool);

}  // namespace procurl::harness
