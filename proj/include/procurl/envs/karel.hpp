#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "procurl/core.hpp"

namespace procurl::envs {

inline constexpr int kGridSide = 4;
inline constexpr int kCells = kGridSide * kGridSide;
inline constexpr std::size_t kObservationDim = 88;
inline constexpr std::size_t kKarelActions = 6;
inline constexpr int kDefaultHorizon = 2 * kCells;

enum class Direction : std::uint8_t { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

enum class KarelAction : std::uint8_t {
  kMove = 0,
  kTurnLeft = 1,
  kTurnRight = 2,
  kPickMarker = 3,
  kPutMarker = 4,
  kFinish = 5,
};

/// Bit i set <=> cell i (row-major, row 0 at the top) is occupied.
using CellMask = std::uint16_t;

constexpr bool has_cell(CellMask mask, int cell) { return ((mask >> cell) & 1U) != 0; }
constexpr CellMask with_cell(CellMask mask, int cell) {
  return static_cast<CellMask>(mask | (1U << cell));
}
constexpr CellMask without_cell(CellMask mask, int cell) {
  return static_cast<CellMask>(mask & ~(1U << cell));
}
int popcount(CellMask mask);

/// Avatar pose plus marker layout of one grid.
struct GridConfig {
  int cell = 0;
  Direction dir = Direction::kNorth;
  CellMask markers = 0;

  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct KarelTaskMetadata {
  int traj_length = 0;
  bool uses_marker_action = false;
  int num_distractor_markers = 0;
  int num_walls = 0;

  friend bool operator==(const KarelTaskMetadata&, const KarelTaskMetadata&) = default;
};

/// A pre-grid / post-grid pair over shared walls, with the action sequence
/// the generator used to produce the post-grid.
struct KarelTask {
  CellMask walls = 0;
  GridConfig initial;
  GridConfig target;
  KarelTaskMetadata metadata;
  std::vector<KarelAction> witness;

  /// Throws ContractError if the avatar sits on a wall or markers overlap walls.
  void validate() const;

  friend bool operator==(const KarelTask&, const KarelTask&) = default;
};

struct KarelState {
  int avatar_cell = 0;
  Direction avatar_dir = Direction::kNorth;
  CellMask current_markers = 0;
  bool terminated = false;
  bool crashed = false;
  int steps_taken = 0;

  friend bool operator==(const KarelState&, const KarelState&) = default;
};

KarelState initial_state(const KarelTask& task);

struct KarelStepResult {
  KarelState next;
  double reward = 0.0;
  bool done = false;
};

/// Pure transition. Reward is 1 only for `finish` in the target
/// configuration; crashes and horizon exhaustion terminate with reward 0.
KarelStepResult karel_step(const KarelTask& task, const KarelState& state, KarelAction action,
                           int horizon = kDefaultHorizon);

using KarelObservation = std::array<double, kObservationDim>;

/// Layout: avatar cell one-hot (16) | direction one-hot (4) | markers (16)
/// for the current grid, the same 36 bits for the target grid, then walls (16).
KarelObservation encode_observation(const KarelTask& task, const KarelState& state);

struct KarelGeneratorConfig {
  int max_traj_len = 6;
  double wall_prob = 0.1;
  double marker_prob = 0.2;
  int horizon = kDefaultHorizon;
};

KarelTask generate_karel_task(const KarelGeneratorConfig& config, Rng& rng);

struct KarelPool {
  std::vector<KarelTask> tasks;
  int horizon = kDefaultHorizon;
};

/// Tasks are generated from a single stream, so the pool order is stable
/// for a given seed.
KarelPool generate_karel_pool(std::size_t count, const KarelGeneratorConfig& config,
                              RngSeed seed);

std::string_view to_string(KarelAction action);
std::string_view to_string(Direction dir);
KarelAction karel_action_from_string(std::string_view name);
Direction direction_from_string(std::string_view name);

nlohmann::json to_json(const KarelPool& pool);
KarelPool karel_pool_from_json(const nlohmann::json& j);
void save_karel_pool(const KarelPool& pool, const std::filesystem::path& path);
KarelPool load_karel_pool(const std::filesystem::path& path);

}  // namespace procurl::envs
