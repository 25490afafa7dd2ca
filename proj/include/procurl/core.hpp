#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace procurl {

// Error taxonomy shared by every module.
struct ContractError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Index of a task (starting state) inside a pool.
struct TaskId {
  std::size_t index = 0;

  friend bool operator==(TaskId, TaskId) = default;
  friend auto operator<=>(TaskId, TaskId) = default;
};

using ParameterVector = std::vector<double>;

/// One (state, action, reward) triple of a rollout. `State` is whatever the
/// owning environment exposes to its learner.
template <class State>
struct Transition {
  State state;
  std::size_t action = 0;
  double reward = 0.0;
};

template <class State>
struct Trajectory {
  std::vector<Transition<State>> steps;
  bool succeeded = false;

  [[nodiscard]] std::size_t length() const { return steps.size(); }
};

/// Reward-to-go G^(tau) for every step of a trajectory.
template <class State>
std::vector<double> rewards_to_go(const Trajectory<State>& traj, double discount) {
  std::vector<double> out(traj.steps.size());
  double acc = 0.0;
  for (std::size_t i = traj.steps.size(); i-- > 0;) {
    acc = traj.steps[i].reward + discount * acc;
    out[i] = acc;
  }
  return out;
}

struct RngSeed {
  std::uint64_t value = 0;
};

/// splitmix64 finaliser; used to derive independent child streams.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Seeded random stream. Draws are computed from raw 64-bit words so the
/// sequence does not depend on the standard library's distribution code.
class Rng {
 public:
  explicit Rng(RngSeed seed) : engine_(mix_seed(seed.value)) {}
  explicit Rng(std::uint64_t seed) : Rng(RngSeed{seed}) {}

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);
  /// Sample an index from non-negative weights (need not be normalised).
  std::size_t categorical(const std::vector<double>& weights);

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

double l1_distance(const ParameterVector& a, const ParameterVector& b);

}  // namespace procurl
