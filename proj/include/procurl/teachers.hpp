#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "procurl/core.hpp"

namespace procurl::teachers {

enum class Strategy {
  kProcurlArgmax,
  kProcurlSoftmax,
  kProcurlEnv,
  kProcurlVal,
  kProcurlGeneralized,
  kIid,
  kEasy,
  kHard,
  kSpaceAlt,
};

enum class PosStarMode { kAllOnes, kProvided };

/// Where the harness obtains PoS_t for the teacher.
enum class PosSource {
  kNone,      // strategy ignores PoS
  kRollouts,  // Monte-Carlo policy rollouts, charged to the teacher
  kCritic,    // student critic forward passes
  kExact,     // analytic, only where the environment admits it
};

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view name);
std::string_view to_string(PosSource s);
PosSource pos_source_from_string(std::string_view name);
PosSource default_pos_source(Strategy s);

struct TeacherConfig {
  Strategy strategy = Strategy::kProcurlSoftmax;
  double beta = 10.0;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double noise_eps = 0.0;
  PosStarMode pos_star_mode = PosStarMode::kAllOnes;
  PosSource pos_source = PosSource::kRollouts;

  /// Config for `strategy` with its default PoS source.
  static TeacherConfig for_strategy(Strategy strategy, double beta = 10.0);
  void validate() const;
  /// Display label, e.g. "ProCuRL-env" or "ProCuRL-softmax[exact]".
  /// `default_beta` is the environment default; beta is tagged only when it differs.
  [[nodiscard]] std::string label(double default_beta = 10.0) const;

  friend bool operator==(const TeacherConfig&, const TeacherConfig&) = default;
};

nlohmann::json to_json(const TeacherConfig& c);
/// Strict: unknown keys are rejected.
TeacherConfig teacher_config_from_json(const nlohmann::json& j, double default_beta = 10.0);

/// Per-task success-probability scores consumed by the strategies.
struct PoSTable {
  std::vector<double> pos_t;
  std::vector<double> pos_star;
  std::optional<std::vector<double>> prev_pos;

  static PoSTable zeros(std::size_t n);
  [[nodiscard]] std::size_t size() const { return pos_t.size(); }
  void validate() const;
};

/// PoS_t * (PoS* - PoS_t).
double curriculum_score(double pos_t, double pos_star);
/// PoS_t * (gamma1 * PoS* - gamma2 * PoS_t).
double generalized_score(double pos_t, double pos_star, double gamma1, double gamma2);

/// Per-task scores for the configured strategy. `rng` is only drawn from
/// when noise_eps > 0.
std::vector<double> strategy_scores(const TeacherConfig& config, const PoSTable& pos, Rng& rng);

/// Lowest index among maximisers.
TaskId select_argmax(const std::vector<double>& scores);
/// Probabilities proportional to exp(beta * score), max-subtracted.
std::vector<double> softmax_distribution(const std::vector<double>& scores, double beta);
TaskId select_softmax(const std::vector<double>& scores, double beta, Rng& rng);

/// Argmax for ProCuRL-argmax, softmax(beta) for every other strategy.
TaskId select_task(const TeacherConfig& config, const std::vector<double>& scores, Rng& rng);

}  // namespace procurl::teachers
