#include "procurl/harness/training.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <memory>

#include "procurl/harness/session.hpp"
#include "procurl/teachers.hpp"

namespace procurl::harness {

namespace {

// Stream ids under the run seed.
constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kRefreshStreamBase = std::uint64_t{1} << 32;
constexpr std::uint64_t kEvalStreamBase = std::uint64_t{2} << 32;
constexpr std::uint64_t kHeldOutStreamBase = std::uint64_t{3} << 32;

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

EvalResult evaluate_uniform(const pos::RolloutFn& rollout, std::size_t pool_size,
                            std::size_t episodes_per_task, std::uint64_t seed) {
  if (episodes_per_task < 1) throw ContractError("evaluate_uniform: episodes_per_task must be >= 1");
  std::vector<double> per_task(pool_size, 0.0);
  std::vector<std::size_t> steps(pool_size, 0);
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(pool_size);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      const auto k = static_cast<std::size_t>(i);
      Rng rng(derive_seed(seed, k));
      double total = 0.0;
      for (std::size_t e = 0; e < episodes_per_task; ++e) {
        const RolloutOutcome o = rollout(TaskId{k}, rng);
        total += o.total_reward;
        steps[k] += o.steps;
      }
      per_task[k] = total / static_cast<double>(episodes_per_task);
    } catch (...) {
#pragma omp critical(procurl_eval_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  EvalResult out{mean_of(per_task), 0};
  for (std::size_t s : steps) out.steps += s;
  return out;
}

EvalResult evaluate_uniform_serial(const pos::RolloutFn& rollout, std::size_t pool_size,
                                   std::size_t episodes_per_task, std::uint64_t seed) {
  if (episodes_per_task < 1) throw ContractError("evaluate_uniform: episodes_per_task must be >= 1");
  std::vector<double> per_task(pool_size, 0.0);
  EvalResult out;
  for (std::size_t k = 0; k < pool_size; ++k) {
    Rng rng(derive_seed(seed, k));
    double total = 0.0;
    for (std::size_t e = 0; e < episodes_per_task; ++e) {
      const RolloutOutcome o = rollout(TaskId{k}, rng);
      total += o.total_reward;
      out.steps += o.steps;
    }
    per_task[k] = total / static_cast<double>(episodes_per_task);
  }
  out.mean_reward = mean_of(per_task);
  return out;
}

double evaluate_uniform_exact(const envs::BanditInstance& env, const students::SoftmaxPolicyTable& policy) {
  if (policy.num_states() != env.num_tasks()) throw ContractError("evaluate_uniform_exact: size mismatch");
  double sum = 0.0;
  for (std::size_t s = 0; s < env.num_tasks(); ++s) sum += env.p_rand()[s] * students::policy_prob(policy, s)[0];
  return sum / static_cast<double>(env.num_tasks());
}

RunResult run_training(const ExperimentConfig& config, const teachers::TeacherConfig& teacher,
                       std::uint64_t seed) {
  using teachers::PosSource;
  config.validate();
  teacher.validate();
  const auto t0 = std::chrono::steady_clock::now();

  std::unique_ptr<Session> session = make_session(config.environment, config.student);
  const std::size_t n = session->pool_size();

  std::shared_ptr<const envs::KarelPool> held_out;
  if (config.eval_pool) held_out = std::make_shared<const envs::KarelPool>(resolve_karel_pool(*config.eval_pool));

  const PosSource source = teacher.pos_source;
  if (source == PosSource::kCritic && !session->has_critic()) {
    throw ConfigError(teacher.label(default_teacher_beta(config.environment.kind)) + " needs a learner with a critic");
  }
  if (source == PosSource::kExact && !session->has_exact_pos()) {
    throw ConfigError(teacher.label(default_teacher_beta(config.environment.kind)) + ": exact PoS is not available for this environment");
  }

  teachers::PoSTable pos = teachers::PoSTable::zeros(n);
  if (teacher.pos_star_mode == teachers::PosStarMode::kProvided) {
    auto star = session->known_pos_star();
    if (!star) throw ConfigError("pos_star_mode 'provided' needs an environment with known PoS*");
    pos.pos_star = *star;
  }

  pos::PoSRefreshPolicy refresh;
  refresh.n_pos = config.refresh.n_pos;
  refresh.c_rollouts = config.refresh.c_rollouts;
  if (source == PosSource::kRollouts) refresh.budget_multiplier = config.refresh.budget_multiplier;
  refresh.planned_student_steps = config.total_student_steps;
  refresh.rollout_step_bound = session->rollout_step_bound();
  refresh.validate();

  RunResult run;
  run.strategy = teacher.label(default_teacher_beta(config.environment.kind));
  run.seed = seed;
  run.metadata_fields = session->metadata_fields();
  for (std::size_t i = 0; i < n; ++i) run.task_metadata.push_back(session->task_metadata(TaskId{i}));

  Rng rng(derive_seed(seed, kTrainStream));
  pos::StepLedger& ledger = run.ledger;
  std::size_t episode = 0;
  std::optional<TaskId> last_task;

  auto emit = [&](std::size_t checkpoint) {
    MetricsRecord rec;
    rec.checkpoint = checkpoint;
    rec.student_steps = ledger.student_steps;
    rec.teacher_steps = ledger.teacher_steps;
    rec.episode_index = episode;
    rec.selected_task = last_task;
    if (last_task) rec.selected_task_metadata = run.task_metadata[last_task->index];
    const std::uint64_t k = run.records.size();
    std::optional<double> exact = config.eval_exact ? session->exact_uniform_performance() : std::nullopt;
    if (exact) {
      rec.train_pool_mean_reward = *exact;
    } else {
      const EvalResult e = evaluate_uniform(session->rollout_fn(), n, config.eval_episodes_per_task,
                                            derive_seed(seed, kEvalStreamBase + k));
      rec.train_pool_mean_reward = e.mean_reward;
      rec.eval_steps += e.steps;
    }
    if (held_out) {
      const EvalResult e = evaluate_uniform(karel_rollout_on(*session, held_out), held_out->tasks.size(),
                                            config.eval_episodes_per_task,
                                            derive_seed(seed, kHeldOutStreamBase + k));
      rec.eval_pool_mean_reward = e.mean_reward;
      rec.eval_steps += e.steps;
    }
    if (config.checkpoint_snapshots) rec.snapshot = session->snapshot();
    rec.wall_clock_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    run.records.push_back(std::move(rec));
  };

  const std::size_t total = config.total_student_steps;
  std::size_t next_checkpoint = 0;
  auto emit_due = [&] {
    while (next_checkpoint <= total && ledger.student_steps >= next_checkpoint) {
      emit(next_checkpoint);
      if (next_checkpoint == total) {
        next_checkpoint = total + 1;
      } else {
        next_checkpoint = std::min(next_checkpoint + config.eval_every, total);
      }
    }
  };
  emit_due();

  while (ledger.student_steps < total) {
    if (source == PosSource::kExact) pos.pos_t = session->exact_pos();
    const std::vector<double> scores = teachers::strategy_scores(teacher, pos, rng);
    const TaskId task = teachers::select_task(teacher, scores, rng);

    if (source == PosSource::kExact && teacher.strategy == teachers::Strategy::kProcurlArgmax) {
      ++run.argmax_checks;
      const double chosen = teachers::curriculum_score(pos.pos_t[task.index], pos.pos_star[task.index]);
      for (std::size_t i = 0; i < n; ++i) {
        if (teachers::curriculum_score(pos.pos_t[i], pos.pos_star[i]) > chosen) {
          ++run.argmax_violations;
          break;
        }
      }
    }

    const std::size_t steps = session->train_episode(task, rng);
    ledger.charge_student(steps);
    run.charged_episode_steps += steps;
    ++episode;
    last_task = task;
    run.selections.push_back({ledger.student_steps, task});

    if ((source == PosSource::kRollouts || source == PosSource::kCritic) && pos::should_refresh(ledger, refresh, n)) {
      std::vector<double> previous = pos.pos_t;
      if (source == PosSource::kRollouts) {
        const pos::PosRefreshResult r = pos::refresh_pos_mc(session->rollout_fn(), n, refresh.c_rollouts,
                                                            derive_seed(seed, kRefreshStreamBase + ledger.refresh_count));
        pos.pos_t = r.pos;
        ledger.record_refresh(r.steps);
        run.charged_episode_steps += r.steps;
      } else {
        pos.pos_t = session->critic_pos(config.normalizer);
        ledger.record_refresh(0);
      }
      pos.prev_pos = std::move(previous);
    }
    emit_due();
  }
  emit_due();

  run.final_snapshot = session->snapshot();
  return run;
}

std::vector<RunResult> run_benchmark(const ExperimentConfig& config) {
  config.validate();
  const auto strategies = config.strategy_list();
  const std::size_t n_seeds = config.seeds.size();
  std::vector<RunResult> runs(strategies.size() * n_seeds);
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(runs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      const auto k = static_cast<std::size_t>(i);
      runs[k] = run_training(config, strategies[k / n_seeds], config.seeds[k % n_seeds]);
    } catch (...) {
#pragma omp critical(procurl_benchmark_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return runs;
}

nlohmann::json to_json(const RunResult& run) {
  using nlohmann::json;
  json records = json::array();
  for (const auto& r : run.records) {
    json jr = {{"checkpoint", r.checkpoint},
               {"student_steps", r.student_steps},
               {"teacher_steps", r.teacher_steps},
               {"eval_steps", r.eval_steps},
               {"episode_index", r.episode_index},
               {"selected_task", r.selected_task ? json(r.selected_task->index) : json(nullptr)},
               {"selected_task_metadata", r.selected_task_metadata},
               {"train_pool_mean_reward", r.train_pool_mean_reward},
               {"eval_pool_mean_reward", r.eval_pool_mean_reward ? json(*r.eval_pool_mean_reward) : json(nullptr)},
               {"wall_clock_ms", r.wall_clock_ms}};
    if (r.snapshot) jr["snapshot"] = *r.snapshot;
    records.push_back(std::move(jr));
  }
  json selections = json::array();
  for (const auto& s : run.selections) selections.push_back({s.student_steps, s.task.index});
  return {{"strategy", run.strategy},
          {"seed", run.seed},
          {"ledger",
           {{"student_steps", run.ledger.student_steps},
            {"teacher_steps", run.ledger.teacher_steps},
            {"refresh_count", run.ledger.refresh_count}}},
          {"charged_episode_steps", run.charged_episode_steps},
          {"argmax_checks", run.argmax_checks},
          {"argmax_violations", run.argmax_violations},
          {"metadata_fields", run.metadata_fields},
          {"task_metadata", run.task_metadata},
          {"records", records},
          {"selections", selections},
          {"final_snapshot", run.final_snapshot}};
}

RunResult run_result_from_json(const nlohmann::json& j) {
  RunResult run;
  try {
    run.strategy = j.at("strategy").get<std::string>();
    run.seed = j.at("seed").get<std::uint64_t>();
    const auto& l = j.at("ledger");
    run.ledger.student_steps = l.at("student_steps").get<std::size_t>();
    run.ledger.teacher_steps = l.at("teacher_steps").get<std::size_t>();
    run.ledger.refresh_count = l.at("refresh_count").get<std::size_t>();
    run.charged_episode_steps = j.value("charged_episode_steps", std::size_t{0});
    run.argmax_checks = j.value("argmax_checks", std::size_t{0});
    run.argmax_violations = j.value("argmax_violations", std::size_t{0});
    run.metadata_fields = j.at("metadata_fields").get<std::vector<std::string>>();
    run.task_metadata = j.at("task_metadata").get<std::vector<std::vector<double>>>();
    for (const auto& jr : j.at("records")) {
      MetricsRecord r;
      r.checkpoint = jr.at("checkpoint").get<std::size_t>();
      r.student_steps = jr.at("student_steps").get<std::size_t>();
      r.teacher_steps = jr.at("teacher_steps").get<std::size_t>();
      r.eval_steps = jr.at("eval_steps").get<std::size_t>();
      r.episode_index = jr.at("episode_index").get<std::size_t>();
      if (!jr.at("selected_task").is_null()) r.selected_task = TaskId{jr.at("selected_task").get<std::size_t>()};
      r.selected_task_metadata = jr.at("selected_task_metadata").get<std::vector<double>>();
      r.train_pool_mean_reward = jr.at("train_pool_mean_reward").get<double>();
      if (!jr.at("eval_pool_mean_reward").is_null()) r.eval_pool_mean_reward = jr.at("eval_pool_mean_reward").get<double>();
      r.wall_clock_ms = jr.at("wall_clock_ms").get<double>();
      if (jr.contains("snapshot")) r.snapshot = jr.at("snapshot");
      run.records.push_back(std::move(r));
    }
    for (const auto& s : j.at("selections")) {
      run.selections.push_back({s.at(0).get<std::size_t>(), TaskId{s.at(1).get<std::size_t>()}});
    }
    run.final_snapshot = j.at("final_snapshot");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed run file: ") + e.what());
  }
  return run;
}

}  // namespace procurl::harness
