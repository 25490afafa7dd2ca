#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "procurl/harness/config.hpp"
#include "procurl/harness/report.hpp"
#include "procurl/harness/session.hpp"
#include "procurl/harness/training.hpp"

using namespace procurl;
using namespace procurl::harness;
using nlohmann::json;

namespace {

json bandit_json(const std::string& strategy, std::size_t steps = 1000) {
  return {{"environment", {{"kind", "bandit"}, {"num_tasks", 20}, {"p_min", 0.05}, {"p_max", 0.95}}},
          {"teacher", {{"strategy", strategy}}},
          {"refresh", {{"n_pos", 100}, {"c_rollouts", 20}}},
          {"total_student_steps", steps},
          {"eval_every", 100},
          {"trend_window", 50}};
}

ExperimentConfig parse(const json& j) { return experiment_config_from_json(j); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("procurl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void check_same_metrics(const RunResult& a, const RunResult& b) {
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].student_steps == b.records[i].student_steps);
    CHECK(a.records[i].teacher_steps == b.records[i].teacher_steps);
    CHECK(a.records[i].train_pool_mean_reward == b.records[i].train_pool_mean_reward);
    CHECK(a.records[i].selected_task == b.records[i].selected_task);
  }
  CHECK(a.selections.size() == b.selections.size());
  CHECK(a.final_snapshot == b.final_snapshot);
}

}  // namespace

TEST_CASE("config parses every environment form") {
  auto c = parse(bandit_json("ProCuRL-env"));
  CHECK(c.environment.kind == EnvKind::kBandit);
  CHECK(c.environment.p_rand.size() == 20);
  CHECK(c.teacher.beta == 20.0);

  auto a = parse({{"environment", {{"kind", "abstract"}, {"targets", {0.5, 1.0}}, {"initial_theta", 0.1}}},
                  {"teacher", {{"strategy", "Easy"}, {"pos_source", "exact"}}}});
  CHECK(a.environment.targets == std::vector<double>{0.5, 1.0});
  CHECK(a.environment.initial_theta == 0.1);

  auto k = parse({{"environment", {{"kind", "karel"}, {"generate", {{"count", 5}, {"seed", 3}}}}},
                  {"teacher", {{"strategy", "ProCuRL-val"}}}});
  CHECK(k.environment.kind == EnvKind::kKarel);
  CHECK(k.teacher.beta == 10.0);
  CHECK(resolve_karel_pool(k.environment).tasks.size() == 5);
}

TEST_CASE("config rejects unknown keys at every level") {
  auto j = bandit_json("IID");
  j["extra"] = 1;
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = bandit_json("IID");
  j["environment"]["colour"] = "red";
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = bandit_json("IID");
  j["refresh"]["n_pso"] = 3;
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = bandit_json("IID");
  j["teacher"]["betta"] = 3;
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = bandit_json("IID");
  j["student"] = {{"lr", 0.1}};
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = bandit_json("IID");
  j["environment"] = {{"kind", "maze"}};
  CHECK_THROWS_AS(parse(j), ConfigError);
}

TEST_CASE("config invariants") {
  auto j = bandit_json("IID");
  j["seeds"] = json::array();
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = bandit_json("IID", 50);
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = bandit_json("IID");
  j["eval_every"] = 0;
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = bandit_json("IID");
  j["strategies"] = {{{"strategy", "IID"}}, {{"strategy", "IID"}}};
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = bandit_json("IID");
  j["environment"]["p_rand"] = {0.5, 1.5};
  CHECK_THROWS_AS(parse(j), ConfigError);
  j = {{"environment", {{"kind", "karel"}, {"generate", {{"count", 5}}}, {"pool_file", "x.json"}}},
       {"teacher", {{"strategy", "IID"}}}};
  CHECK_THROWS_AS(parse(j), ConfigError);
}

TEST_CASE("config round trips through json") {
  auto j = bandit_json("ProCuRL-env");
  j["refresh"]["budget_multiplier"] = 2.0;
  j["seeds"] = {3, 4};
  const auto c = parse(j);
  const auto again = parse(to_json(c));
  CHECK(to_json(again) == to_json(c));
}

TEST_CASE("config file resolves pool paths relative to itself") {
  const auto dir = scratch("cfgpath");
  envs::save_karel_pool(envs::generate_karel_pool(4, {}, RngSeed{1}), dir / "pool.json");
  {
    std::ofstream out(dir / "cfg.json");
    out << json{{"environment", {{"kind", "karel"}, {"pool_file", "pool.json"}}},
                {"teacher", {{"strategy", "IID"}}},
                {"total_student_steps", 100}}
               .dump();
  }
  const auto c = load_experiment_config(dir / "cfg.json");
  CHECK(resolve_karel_pool(c.environment).tasks.size() == 4);
  CHECK_THROWS_AS(load_experiment_config(dir / "missing.json"), IoError);
  {
    std::ofstream out(dir / "bad.json");
    out << "{not json";
  }
  CHECK_THROWS(load_experiment_config(dir / "bad.json"));
}

TEST_CASE("zero budget gives one record and the initial snapshot") {
  const auto c = parse(bandit_json("IID", 0));
  const auto run = run_training(c, 0);
  REQUIRE(run.records.size() == 1);
  CHECK(run.records[0].student_steps == 0);
  CHECK(run.selections.empty());
  const auto fresh = make_session(c.environment, c.student);
  CHECK(run.final_snapshot == fresh->snapshot());
}

TEST_CASE("env ledger arithmetic on the bandit") {
  const auto run = run_training(parse(bandit_json("ProCuRL-env")), 0);
  CHECK(run.ledger.student_steps == 1000);
  CHECK(run.ledger.refresh_count == 10);
  CHECK(run.ledger.teacher_steps == 4000);
  CHECK(run.ledger.teacher_steps == run.ledger.refresh_count * 20 * 20);
  CHECK(run.ledger.total_steps() == run.charged_episode_steps);
}

TEST_CASE("value-based teacher spends no teacher steps") {
  const auto run = run_training(parse(bandit_json("ProCuRL-val")), 1);
  CHECK(run.ledger.teacher_steps == 0);
  CHECK(run.ledger.student_steps == 1000);
  CHECK(run.records.back().teacher_steps == 0);
}

TEST_CASE("budgeted env run stays within its multiplier") {
  auto j = bandit_json("ProCuRL-env");
  j["refresh"] = {{"n_pos", 10}, {"c_rollouts", 20}, {"budget_multiplier", 2.0}};
  const auto run = run_training(parse(j), 2);
  CHECK(run.ledger.total_steps() <= 2 * run.ledger.student_steps);
  CHECK(run.ledger.refresh_count == 2);
}

TEST_CASE("ledger conservation on karel") {
  json j = {{"environment", {{"kind", "karel"}, {"generate", {{"count", 12}, {"seed", 4}}}}},
            {"teacher", {{"strategy", "ProCuRL-env"}}},
            {"refresh", {{"n_pos", 200}, {"c_rollouts", 3}}},
            {"total_student_steps", 1000},
            {"eval_every", 500},
            {"eval_episodes_per_task", 2}};
  const auto run = run_training(parse(j), 3);
  CHECK(run.ledger.student_steps >= 1000);
  CHECK(run.ledger.refresh_count >= 1);
  CHECK(run.ledger.total_steps() == run.charged_episode_steps);
  CHECK(run.ledger.teacher_steps <= run.ledger.refresh_count * 12 * 3 * 32);
}

TEST_CASE("record counters never decrease") {
  for (const char* s : {"ProCuRL-env", "IID", "ProCuRL-val"}) {
    const auto run = run_training(parse(bandit_json(s)), 5);
    CHECK(run.records.size() == 11);
    for (std::size_t i = 1; i < run.records.size(); ++i) {
      CHECK(run.records[i].student_steps >= run.records[i - 1].student_steps);
      CHECK(run.records[i].teacher_steps >= run.records[i - 1].teacher_steps);
      CHECK(run.records[i].episode_index >= run.records[i - 1].episode_index);
      CHECK(run.records[i].checkpoint > run.records[i - 1].checkpoint);
    }
    CHECK(run.records.back().checkpoint == 1000);
  }
}

TEST_CASE("exact argmax picks are never beaten") {
  auto j = bandit_json("ProCuRL-argmax");
  j["teacher"]["pos_source"] = "exact";
  const auto run = run_training(parse(j), 6);
  CHECK(run.argmax_checks == 1000);
  CHECK(run.argmax_violations == 0);
  j["teacher"]["pos_star_mode"] = "provided";
  const auto run2 = run_training(parse(j), 6);
  CHECK(run2.argmax_checks == 1000);
  CHECK(run2.argmax_violations == 0);
}

TEST_CASE("training is deterministic given the seed") {
  const auto c = parse(bandit_json("ProCuRL-env"));
  check_same_metrics(run_training(c, 9), run_training(c, 9));
  const auto other = run_training(c, 10);
  CHECK(other.final_snapshot != run_training(c, 9).final_snapshot);
}

TEST_CASE("strategy and source mismatches are configuration errors") {
  json j = {{"environment", {{"kind", "abstract"}, {"targets", {0.5, 1.0}}}},
            {"teacher", {{"strategy", "ProCuRL-val"}}},
            {"total_student_steps", 100}};
  CHECK_THROWS_AS(run_training(parse(j), 0), ConfigError);
  j = {{"environment", {{"kind", "karel"}, {"generate", {{"count", 3}}}}},
       {"teacher", {{"strategy", "Easy"}, {"pos_source", "exact"}}},
       {"total_student_steps", 100}};
  CHECK_THROWS_AS(run_training(parse(j), 0), ConfigError);
  j = {{"environment", {{"kind", "karel"}, {"generate", {{"count", 3}}}}},
       {"teacher", {{"strategy", "ProCuRL-softmax"}, {"pos_star_mode", "provided"}}},
       {"total_student_steps", 100}};
  CHECK_THROWS_AS(run_training(parse(j), 0), ConfigError);
}

TEST_CASE("uniform evaluation examples") {
  const envs::BanditInstance env({0.2, 0.8});
  students::SoftmaxPolicyTable policy(2, 2, 0.1);
  policy.at(0, 0) = policy.at(1, 0) = 60.0;
  CHECK(evaluate_uniform_exact(env, policy) == doctest::Approx(0.5).epsilon(1e-12));

  const envs::BanditInstance zero({0.0, 0.0, 0.0});
  students::SoftmaxPolicyTable p3(3, 2, 0.1);
  const pos::RolloutFn fn = [&](TaskId t, Rng& rng) { return summarize(rollout_bandit(zero, p3, t, rng)); };
  CHECK(evaluate_uniform(fn, 3, 20, 1).mean_reward == 0.0);
  CHECK_THROWS_AS(evaluate_uniform(fn, 3, 0, 1), ContractError);
}

TEST_CASE("stochastic evaluation agrees with the closed form") {
  const auto env = envs::BanditInstance::linspace(10, 0.1, 0.9);
  students::SoftmaxPolicyTable policy(10, 2, 0.1);
  for (std::size_t s = 0; s < 10; ++s) policy.at(s, 0) = 0.3 * static_cast<double>(s) - 1.0;
  const pos::RolloutFn fn = [&](TaskId t, Rng& rng) { return summarize(rollout_bandit(env, policy, t, rng)); };
  const std::size_t eps = 10000;
  const auto e = evaluate_uniform(fn, 10, eps, 17);
  const double exact = evaluate_uniform_exact(env, policy);
  // Mean of 10 independent task means: variance sums per task.
  double var = 0.0;
  for (std::size_t s = 0; s < 10; ++s) {
    const double q = env.p_rand()[s] * students::policy_prob(policy, s)[0];
    var += q * (1 - q) / static_cast<double>(eps);
  }
  CHECK(std::abs(e.mean_reward - exact) <= 3.0 * std::sqrt(var) / 10.0);
  CHECK(e.steps == 10 * eps);
}

TEST_CASE("parallel evaluation equals serial") {
  const auto pool = envs::generate_karel_pool(30, {}, RngSeed{3});
  students::LinearActorCritic ac(envs::kObservationDim, envs::kKarelActions);
  Rng w(1);
  for (auto& x : ac.policy_weights()) x = w.uniform(-0.2, 0.2);
  const pos::RolloutFn fn = [&](TaskId t, Rng& rng) { return attempt_karel(pool, ac, t, rng); };
  const auto a = evaluate_uniform(fn, 30, 7, 5);
  const auto b = evaluate_uniform_serial(fn, 30, 7, 5);
  CHECK(a.mean_reward == b.mean_reward);
  CHECK(a.steps == b.steps);
}

TEST_CASE("evaluation leaves the student untouched") {
  json j = {{"environment", {{"kind", "karel"}, {"generate", {{"count", 8}, {"seed", 2}}}}},
            {"teacher", {{"strategy", "IID"}}},
            {"total_student_steps", 200},
            {"eval_every", 100}};
  const auto c = parse(j);
  auto session = make_session(c.environment, c.student);
  Rng rng(4);
  for (int i = 0; i < 20; ++i) session->train_episode(TaskId{static_cast<std::size_t>(i % 8)}, rng);
  const std::string before = session->snapshot().dump();
  evaluate_uniform(session->rollout_fn(), 8, 10, 3);
  CHECK(session->snapshot().dump() == before);
}

TEST_CASE("karel run with a held-out pool reports both means") {
  json j = {{"environment", {{"kind", "karel"}, {"generate", {{"count", 10}, {"seed", 1}}}}},
            {"eval_pool", {{"kind", "karel"}, {"generate", {{"count", 6}, {"seed", 2}}}}},
            {"teacher", {{"strategy", "ProCuRL-val"}}},
            {"total_student_steps", 400},
            {"eval_every", 200},
            {"eval_episodes_per_task", 3},
            {"checkpoint_snapshots", true}};
  const auto run = run_training(parse(j), 0);
  REQUIRE(run.records.size() == 3);
  for (const auto& r : run.records) {
    CHECK(r.eval_pool_mean_reward.has_value());
    CHECK(r.snapshot.has_value());
    CHECK(r.train_pool_mean_reward >= 0.0);
    CHECK(r.train_pool_mean_reward <= 1.0);
  }
  CHECK(run.metadata_fields.size() == 4);
  CHECK(run.ledger.teacher_steps == 0);
}

TEST_CASE("run result json round trip") {
  const auto run = run_training(parse(bandit_json("ProCuRL-env", 300)), 2);
  const auto back = run_result_from_json(to_json(run));
  CHECK(to_json(back).dump() == to_json(run).dump());
}

TEST_CASE("benchmark of one strategy and one seed equals the run") {
  auto c = parse(bandit_json("ProCuRL-env"));
  c.seeds = {4};
  const auto runs = run_benchmark(c);
  REQUIRE(runs.size() == 1);
  const auto solo = run_training(c, 4);
  check_same_metrics(runs[0], solo);
  const auto agg = aggregate(runs);
  REQUIRE(agg.size() == solo.records.size());
  for (std::size_t i = 0; i < agg.size(); ++i) {
    CHECK(agg[i].train_mean == solo.records[i].train_pool_mean_reward);
    CHECK(agg[i].train_median == solo.records[i].train_pool_mean_reward);
    CHECK(agg[i].train_stderr == 0.0);
    CHECK(agg[i].teacher_steps == static_cast<double>(solo.records[i].teacher_steps));
  }
}

TEST_CASE("repeated benchmarks aggregate identically") {
  auto j = bandit_json("IID");
  j["seeds"] = {0, 1, 2};
  const auto c = parse(j);
  const auto a = aggregate(run_benchmark(c));
  const auto b = aggregate(run_benchmark(c));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].train_mean == b[i].train_mean);
    CHECK(a[i].train_stderr == b[i].train_stderr);
    CHECK(a[i].total_steps == b[i].total_steps);
  }
}

TEST_CASE("env spends more total steps than val") {
  auto j = bandit_json("IID");
  j.erase("teacher");
  j["strategies"] = {{{"strategy", "ProCuRL-env"}}, {{"strategy", "ProCuRL-val"}}};
  j["seeds"] = {0, 1};
  const auto runs = run_benchmark(parse(j));
  REQUIRE(runs.size() == 4);
  CHECK(runs[0].strategy == "ProCuRL-env");
  CHECK(runs[2].strategy == "ProCuRL-val");
  const auto agg = aggregate(runs);
  CHECK(agg.front().strategy == "ProCuRL-env");
  CHECK(agg.back().strategy == "ProCuRL-val");
  CHECK(agg[10].total_steps > agg.back().total_steps);
  CHECK(agg.back().total_steps == agg.back().student_steps);
}

TEST_CASE("parallel benchmark equals sequential runs") {
  auto j = bandit_json("IID");
  j.erase("teacher");
  j["strategies"] = {{{"strategy", "ProCuRL-env"}}, {{"strategy", "Hard"}, {"pos_source", "exact"}}};
  j["seeds"] = {7, 8};
  const auto c = parse(j);
  const auto runs = run_benchmark(c);
  std::size_t k = 0;
  for (const auto& t : c.strategy_list()) {
    for (auto seed : c.seeds) check_same_metrics(runs[k++], run_training(c, t, seed));
  }
}

TEST_CASE("report files have a fixed schema and are reproducible") {
  auto j = bandit_json("IID");
  j.erase("teacher");
  j["strategies"] = {{{"strategy", "ProCuRL-env"}}, {{"strategy", "IID"}}};
  j["seeds"] = {0, 1};
  const auto runs = run_benchmark(parse(j));
  const auto d1 = scratch("report1");
  const auto d2 = scratch("report2");
  emit_report(runs, ReportFormat::kCsv, d1, 50);
  emit_report(runs, ReportFormat::kCsv, d2, 50);
  emit_report(runs, ReportFormat::kJson, d1, 50);
  emit_report(runs, ReportFormat::kJson, d2, 50);
  const std::string bench = slurp(d1 / "benchmark.csv");
  CHECK(bench.rfind("run_id,strategy,seed,student_steps,teacher_steps,train_mean,eval_mean,wall_clock_ms\n", 0) == 0);
  CHECK(slurp(d1 / "summary.csv") == slurp(d2 / "summary.csv"));
  CHECK(slurp(d1 / "trend_0.csv") == slurp(d2 / "trend_0.csv"));
  CHECK(slurp(d1 / "trend_0.csv").rfind("step,window_mean_p_rand\n", 0) == 0);
  CHECK(std::filesystem::exists(d1 / "benchmark.json"));
}

TEST_CASE("trend windows") {
  const auto run = run_training(parse(bandit_json("ProCuRL-env")), 0);
  CHECK_THROWS_AS(curriculum_trend(run, 0), ContractError);
  const auto rows = curriculum_trend(run, 100);
  CHECK(rows.size() == 10);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double mean = 0.0;
    for (std::size_t k = i * 100; k < (i + 1) * 100; ++k) {
      mean += run.task_metadata[run.selections[k].task.index][0];
    }
    CHECK(rows[i].window_means[0] == doctest::Approx(mean / 100.0).epsilon(1e-12));
    CHECK(rows[i].step == (i + 1) * 100);
  }
  const auto dir = scratch("trend0");
  CHECK_THROWS_AS(emit_report({run}, ReportFormat::kCsv, dir, 0), ContractError);
}

TEST_CASE("report to an unwritable place is an io error") {
  const auto run = run_training(parse(bandit_json("IID", 100)), 0);
  const auto dir = scratch("unwritable");
  { std::ofstream(dir / "file") << "x"; }
  CHECK_THROWS_AS(emit_report({run}, ReportFormat::kCsv, dir / "file" / "sub", 10), IoError);
  CHECK_THROWS_AS(write_run_files(run, 0, dir / "file" / "sub"), IoError);
  CHECK_THROWS_AS(emit_report({}, ReportFormat::kCsv, dir, 10), ContractError);
}

TEST_CASE("runs reload from their json files") {
  auto j = bandit_json("IID", 200);
  j["seeds"] = {0, 1};
  const auto runs = run_benchmark(parse(j));
  const auto dir = scratch("reload");
  for (std::size_t i = 0; i < runs.size(); ++i) write_run_files(runs[i], i, dir);
  const auto back = load_runs(dir);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < runs.size(); ++i) CHECK(to_json(back[i]).dump() == to_json(runs[i]).dump());
  CHECK_THROWS_AS(load_runs(scratch("empty")), IoError);
}
