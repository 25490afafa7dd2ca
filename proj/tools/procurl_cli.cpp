#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "procurl/envs/karel.hpp"
#include "procurl/harness/config.hpp"
#include "procurl/harness/report.hpp"
#include "procurl/harness/training.hpp"
#include "procurl/theory.hpp"

namespace {

using namespace procurl;

enum ExitCode { kOk = 0, kFailed = 1, kBadInput = 2, kIo = 3 };

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

int verify_theorems(const std::string& setting, std::size_t samples, std::uint64_t seed, const std::string& out,
                    double eta, const std::vector<double>& alphas, const std::vector<double>& betas) {
  const theory::TheoremKind kind = theory::theorem_kind_from_string(setting);
  const auto grid = theory::standard_grid();
  std::vector<theory::TheoremParams> runs;
  if (kind == theory::TheoremKind::kBandit) {
    theory::TheoremParams p;
    p.kind = kind;
    p.eta = eta;
    p.n_samples = samples;
    runs.push_back(p);
  } else {
    for (double a : alphas) {
      for (double b : betas) {
        theory::TheoremParams p;
        p.kind = kind;
        p.alpha = a;
        p.beta = b;
        p.n_samples = samples;
        runs.push_back(p);
      }
    }
  }
  nlohmann::json reports = nlohmann::json::array();
  bool ok = true;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto report = theory::verify_theorem(runs[i], grid, derive_seed(seed, i));
    ok = ok && report.all_pass();
    reports.push_back(theory::to_json(report));
    std::size_t passed = 0;
    std::size_t checked = 0;
    for (const auto& pt : report.points) {
      if (pt.skipped) continue;
      ++checked;
      passed += pt.pass ? 1 : 0;
    }
    std::printf("%s eta=%g alpha=%g beta=%g: %zu/%zu points pass\n", setting.c_str(), runs[i].eta, runs[i].alpha,
                runs[i].beta, passed, checked);
  }
  write_json(out, {{"setting", setting}, {"seed", seed}, {"all_pass", ok}, {"reports", reports}});
  return ok ? kOk : kFailed;
}

int generate_karel(std::size_t count, std::uint64_t seed, int max_traj_len, double wall_prob, double marker_prob,
                   const std::string& out) {
  envs::KarelGeneratorConfig cfg;
  cfg.max_traj_len = max_traj_len;
  cfg.wall_prob = wall_prob;
  cfg.marker_prob = marker_prob;
  const auto pool = envs::generate_karel_pool(count, cfg, RngSeed{seed});
  envs::save_karel_pool(pool, out);
  std::printf("wrote %zu tasks to %s\n", pool.tasks.size(), out.c_str());
  return kOk;
}

int train(const std::string& config_path, std::uint64_t seed, const std::string& out) {
  const auto config = harness::load_experiment_config(config_path);
  const auto run = harness::run_training(config, seed);
  harness::write_run_files(run, 0, out);
  harness::emit_report({run}, harness::ReportFormat::kCsv, out, config.trend_window);
  const auto& last = run.records.back();
  std::printf("%s seed=%llu student_steps=%zu teacher_steps=%zu train_mean=%.6f\n", run.strategy.c_str(),
              static_cast<unsigned long long>(seed), last.student_steps, last.teacher_steps,
              last.train_pool_mean_reward);
  return kOk;
}

int benchmark(const std::string& config_path, const std::string& out) {
  const auto config = harness::load_experiment_config(config_path);
  const auto runs = harness::run_benchmark(config);
  for (std::size_t id = 0; id < runs.size(); ++id) harness::write_run_files(runs[id], id, out);
  harness::emit_report(runs, harness::ReportFormat::kCsv, out, config.trend_window);
  harness::emit_report(runs, harness::ReportFormat::kJson, out, config.trend_window);
  for (const auto& a : harness::aggregate(runs)) {
    if (a.checkpoint != config.total_student_steps) continue;
    std::printf("%-28s mean=%.4f stderr=%.4f median=%.4f steps=%.0f\n", a.strategy.c_str(), a.train_mean,
                a.train_stderr, a.train_median, a.total_steps);
  }
  return kOk;
}

int report(const std::string& in, const std::string& format, const std::string& out, std::size_t window) {
  const auto fmt = harness::report_format_from_string(format);
  const auto runs = harness::load_runs(in);
  for (const auto& path : harness::emit_report(runs, fmt, out.empty() ? in : out, window)) {
    std::printf("%s\n", path.string().c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curriculum selection experiments"};
  app.require_subcommand(1);

  auto* vt = app.add_subcommand("verify-theorems", "Monte-Carlo check of the expected-improvement closed forms");
  std::string setting;
  std::size_t samples = 20000;
  std::uint64_t seed = 0;
  std::string out;
  double eta = 0.1;
  std::vector<double> alphas{1.0, 0.5};
  std::vector<double> betas{0.0, 0.1};
  vt->add_option("--setting", setting)->required()->check(CLI::IsMember({"bandit", "abstract"}));
  vt->add_option("--samples", samples)->check(CLI::PositiveNumber);
  vt->add_option("--seed", seed);
  vt->add_option("--out", out)->required();
  vt->add_option("--eta", eta);
  vt->add_option("--alpha", alphas);
  vt->add_option("--beta", betas);

  auto* gk = app.add_subcommand("generate-karel", "Generate a Karel task pool");
  std::size_t count = 100;
  int max_traj_len = 6;
  double wall_prob = 0.1;
  double marker_prob = 0.2;
  gk->add_option("--count", count)->required();
  gk->add_option("--seed", seed);
  gk->add_option("--max-traj-len", max_traj_len);
  gk->add_option("--wall-prob", wall_prob);
  gk->add_option("--marker-prob", marker_prob);
  gk->add_option("--out", out)->required();

  auto* tr = app.add_subcommand("train", "Train one student under one teacher");
  std::string config;
  tr->add_option("--config", config)->required();
  tr->add_option("--seed", seed);
  tr->add_option("--out", out)->required();

  auto* bm = app.add_subcommand("benchmark", "Run every strategy over every seed");
  bm->add_option("--config", config)->required();
  bm->add_option("--out", out)->required();

  auto* rp = app.add_subcommand("report", "Aggregate run_<id>.json files");
  std::string in;
  std::string format = "csv";
  std::size_t window = 500;
  rp->add_option("--in", in)->required();
  rp->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  rp->add_option("--out", out);
  rp->add_option("--trend-window", window);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*vt) return verify_theorems(setting, samples, seed, out, eta, alphas, betas);
    if (*gk) return generate_karel(count, seed, max_traj_len, wall_prob, marker_prob, out);
    if (*tr) return train(config, seed, out);
    if (*bm) return benchmark(config, out);
    if (*rp) return report(in, format, out, window);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  }
  return kBadInput;
}
