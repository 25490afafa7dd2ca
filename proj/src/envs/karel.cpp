#include "procurl/envs/karel.hpp"

#include <bit>
#include <fstream>
#include <string>

namespace procurl::envs {

namespace {

constexpr std::array<std::string_view, kKarelActions> kActionNames = {
    "move", "turnLeft", "turnRight", "pickMarker", "putMarker", "finish"};
constexpr std::array<std::string_view, 4> kDirectionNames = {"North", "East", "South", "West"};

Direction turn_left(Direction d) { return static_cast<Direction>((static_cast<int>(d) + 3) % 4); }
Direction turn_right(Direction d) { return static_cast<Direction>((static_cast<int>(d) + 1) % 4); }

// Cell in front of the avatar, or -1 when that would leave the grid.
int forward_cell(int cell, Direction dir) {
  const int row = cell / kGridSide;
  const int col = cell % kGridSide;
  switch (dir) {
    case Direction::kNorth: return row > 0 ? cell - kGridSide : -1;
    case Direction::kSouth: return row < kGridSide - 1 ? cell + kGridSide : -1;
    case Direction::kEast: return col < kGridSide - 1 ? cell + 1 : -1;
    case Direction::kWest: return col > 0 ? cell - 1 : -1;
  }
  return -1;
}

bool valid_cell(int cell) { return cell >= 0 && cell < kCells; }

nlohmann::json mask_to_json(CellMask mask) {
  auto arr = nlohmann::json::array();
  for (int c = 0; c < kCells; ++c) {
    if (has_cell(mask, c)) arr.push_back(c);
  }
  return arr;
}

CellMask mask_from_json(const nlohmann::json& j) {
  CellMask mask = 0;
  for (const auto& v : j) {
    const int c = v.get<int>();
    if (!valid_cell(c)) throw ContractError("karel pool: cell index out of range");
    if (has_cell(mask, c)) throw ContractError("karel pool: duplicate cell in list");
    mask = with_cell(mask, c);
  }
  return mask;
}

nlohmann::json config_to_json(const GridConfig& g) {
  return {{"cell", g.cell}, {"dir", std::string(to_string(g.dir))}, {"markers", mask_to_json(g.markers)}};
}

GridConfig config_from_json(const nlohmann::json& j) {
  GridConfig g;
  g.cell = j.at("cell").get<int>();
  g.dir = direction_from_string(j.at("dir").get<std::string>());
  g.markers = mask_from_json(j.at("markers"));
  return g;
}

}  // namespace

int popcount(CellMask mask) { return std::popcount(static_cast<unsigned>(mask)); }

void KarelTask::validate() const {
  for (const GridConfig* g : {&initial, &target}) {
    if (!valid_cell(g->cell)) throw ContractError("KarelTask: avatar cell out of range");
    if (has_cell(walls, g->cell)) throw ContractError("KarelTask: avatar on a wall cell");
    if ((g->markers & walls) != 0) throw ContractError("KarelTask: marker on a wall cell");
  }
}

KarelState initial_state(const KarelTask& task) {
  KarelState s;
  s.avatar_cell = task.initial.cell;
  s.avatar_dir = task.initial.dir;
  s.current_markers = task.initial.markers;
  return s;
}

KarelStepResult karel_step(const KarelTask& task, const KarelState& state, KarelAction action,
                           int horizon) {
  if (state.terminated) throw ContractError("karel_step: state already terminated");
  KarelStepResult out{state, 0.0, false};
  KarelState& next = out.next;
  next.steps_taken = state.steps_taken + 1;

  auto crash = [&] {
    next.crashed = true;
    next.terminated = true;
    out.done = true;
  };

  switch (action) {
    case KarelAction::kMove: {
      const int dest = forward_cell(state.avatar_cell, state.avatar_dir);
      if (dest < 0 || has_cell(task.walls, dest)) {
        crash();
      } else {
        next.avatar_cell = dest;
      }
      break;
    }
    case KarelAction::kTurnLeft: next.avatar_dir = turn_left(state.avatar_dir); break;
    case KarelAction::kTurnRight: next.avatar_dir = turn_right(state.avatar_dir); break;
    case KarelAction::kPickMarker:
      if (!has_cell(state.current_markers, state.avatar_cell)) {
        crash();
      } else {
        next.current_markers = without_cell(state.current_markers, state.avatar_cell);
      }
      break;
    case KarelAction::kPutMarker:
      if (has_cell(state.current_markers, state.avatar_cell)) {
        crash();
      } else {
        next.current_markers = with_cell(state.current_markers, state.avatar_cell);
      }
      break;
    case KarelAction::kFinish: {
      next.terminated = true;
      out.done = true;
      const GridConfig reached{next.avatar_cell, next.avatar_dir, next.current_markers};
      out.reward = reached == task.target ? 1.0 : 0.0;
      break;
    }
  }

  if (!out.done && next.steps_taken >= horizon) {
    next.terminated = true;
    out.done = true;
  }
  return out;
}

KarelObservation encode_observation(const KarelTask& task, const KarelState& state) {
  KarelObservation obs{};
  std::size_t off = 0;
  auto put_grid = [&](int cell, Direction dir, CellMask markers) {
    obs[off + static_cast<std::size_t>(cell)] = 1.0;
    off += kCells;
    obs[off + static_cast<std::size_t>(dir)] = 1.0;
    off += 4;
    for (int c = 0; c < kCells; ++c) obs[off + c] = has_cell(markers, c) ? 1.0 : 0.0;
    off += kCells;
  };
  put_grid(state.avatar_cell, state.avatar_dir, state.current_markers);
  put_grid(task.target.cell, task.target.dir, task.target.markers);
  for (int c = 0; c < kCells; ++c) obs[off + c] = has_cell(task.walls, c) ? 1.0 : 0.0;
  return obs;
}

KarelTask generate_karel_task(const KarelGeneratorConfig& config, Rng& rng) {
  if (config.max_traj_len < 1) throw ContractError("generate_karel_task: max_traj_len must be >= 1");
  if (config.max_traj_len > config.horizon) {
    throw ContractError("generate_karel_task: max_traj_len exceeds horizon");
  }
  constexpr int kLayoutRetries = 100;
  constexpr int kActionRetries = 1000;

  KarelTask task;
  bool placed = false;
  for (int attempt = 0; attempt < kLayoutRetries && !placed; ++attempt) {
    CellMask walls = 0;
    for (int c = 0; c < kCells; ++c) {
      if (rng.bernoulli(config.wall_prob)) walls = with_cell(walls, c);
    }
    const int free_cells = kCells - popcount(walls);
    if (free_cells == 0) continue;
    CellMask markers = 0;
    for (int c = 0; c < kCells; ++c) {
      if (!has_cell(walls, c) && rng.bernoulli(config.marker_prob)) markers = with_cell(markers, c);
    }
    // Avatar on the k-th free cell.
    std::size_t k = rng.below(static_cast<std::size_t>(free_cells));
    int cell = 0;
    for (int c = 0; c < kCells; ++c) {
      if (has_cell(walls, c)) continue;
      if (k == 0) {
        cell = c;
        break;
      }
      --k;
    }
    task.walls = walls;
    task.initial = GridConfig{cell, static_cast<Direction>(rng.below(4)), markers};
    placed = true;
  }
  if (!placed) throw GenerationError("generate_karel_task: could not place avatar (all cells walled)");

  const int length = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(config.max_traj_len)));
  KarelState state = initial_state(task);
  CellMask touched = 0;
  for (int i = 0; i + 1 < length; ++i) {
    bool stepped = false;
    for (int attempt = 0; attempt < kActionRetries; ++attempt) {
      const auto action = static_cast<KarelAction>(rng.below(kKarelActions - 1));
      const KarelStepResult r = karel_step(task, state, action, config.horizon);
      if (r.next.crashed) continue;
      if (action == KarelAction::kPickMarker || action == KarelAction::kPutMarker) {
        task.metadata.uses_marker_action = true;
        touched = with_cell(touched, state.avatar_cell);
      }
      state = r.next;
      task.witness.push_back(action);
      stepped = true;
      break;
    }
    if (!stepped) throw GenerationError("generate_karel_task: action retries exhausted");
  }
  task.witness.push_back(KarelAction::kFinish);
  task.target = GridConfig{state.avatar_cell, state.avatar_dir, state.current_markers};

  task.metadata.traj_length = length;
  task.metadata.num_walls = popcount(task.walls);
  const CellMask untouched_kept =
      static_cast<CellMask>(task.initial.markers & task.target.markers & ~touched);
  task.metadata.num_distractor_markers = popcount(untouched_kept);
  return task;
}

KarelPool generate_karel_pool(std::size_t count, const KarelGeneratorConfig& config,
                              RngSeed seed) {
  Rng rng(seed);
  KarelPool pool;
  pool.horizon = config.horizon;
  pool.tasks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pool.tasks.push_back(generate_karel_task(config, rng));
  return pool;
}

std::string_view to_string(KarelAction action) {
  return kActionNames.at(static_cast<std::size_t>(action));
}

std::string_view to_string(Direction dir) { return kDirectionNames.at(static_cast<std::size_t>(dir)); }

KarelAction karel_action_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (kActionNames[i] == name) return static_cast<KarelAction>(i);
  }
  throw ContractError("unknown Karel action: " + std::string(name));
}

Direction direction_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kDirectionNames.size(); ++i) {
    if (kDirectionNames[i] == name) return static_cast<Direction>(i);
  }
  throw ContractError("unknown direction: " + std::string(name));
}

nlohmann::json to_json(const KarelPool& pool) {
  nlohmann::json tasks = nlohmann::json::array();
  for (std::size_t i = 0; i < pool.tasks.size(); ++i) {
    const KarelTask& t = pool.tasks[i];
    nlohmann::json witness = nlohmann::json::array();
    for (KarelAction a : t.witness) witness.push_back(std::string(to_string(a)));
    tasks.push_back({
        {"id", i},
        {"walls", mask_to_json(t.walls)},
        {"initial", config_to_json(t.initial)},
        {"target", config_to_json(t.target)},
        {"metadata",
         {{"traj_length", t.metadata.traj_length},
          {"uses_marker_action", t.metadata.uses_marker_action},
          {"num_distractor_markers", t.metadata.num_distractor_markers},
          {"num_walls", t.metadata.num_walls}}},
        {"witness", witness},
    });
  }
  return {{"grid_size", kGridSide}, {"horizon", pool.horizon}, {"tasks", tasks}};
}

KarelPool karel_pool_from_json(const nlohmann::json& j) {
  if (j.at("grid_size").get<int>() != kGridSide) {
    throw ContractError("karel pool: only grid_size 4 is supported");
  }
  KarelPool pool;
  pool.horizon = j.value("horizon", kDefaultHorizon);
  const auto& tasks = j.at("tasks");
  if (tasks.empty()) throw ContractError("karel pool: no tasks");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& jt = tasks[i];
    if (jt.at("id").get<std::size_t>() != i) throw ContractError("karel pool: ids must be 0..N-1 in order");
    KarelTask t;
    t.walls = mask_from_json(jt.at("walls"));
    t.initial = config_from_json(jt.at("initial"));
    t.target = config_from_json(jt.at("target"));
    const auto& m = jt.at("metadata");
    t.metadata.traj_length = m.at("traj_length").get<int>();
    t.metadata.uses_marker_action = m.at("uses_marker_action").get<bool>();
    t.metadata.num_distractor_markers = m.at("num_distractor_markers").get<int>();
    t.metadata.num_walls = m.at("num_walls").get<int>();
    if (jt.contains("witness")) {
      for (const auto& a : jt.at("witness")) t.witness.push_back(karel_action_from_string(a.get<std::string>()));
    }
    t.validate();
    pool.tasks.push_back(std::move(t));
  }
  return pool;
}

void save_karel_pool(const KarelPool& pool, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(pool).dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

KarelPool load_karel_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed karel pool " + path.string() + ": " + e.what());
  }
  return karel_pool_from_json(j);
}

}  // namespace procurl::envs
