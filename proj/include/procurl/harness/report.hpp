#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "procurl/harness/training.hpp"

namespace procurl::harness {

/// Cross-seed statistics of one strategy at one checkpoint.
struct AggregateRow {
  std::string strategy;
  std::size_t checkpoint = 0;
  std::size_t n_seeds = 0;
  double train_mean = 0.0;
  double train_stderr = 0.0;
  double train_median = 0.0;
  std::optional<double> eval_mean;
  double student_steps = 0.0;
  double teacher_steps = 0.0;
  double total_steps = 0.0;
  double wall_clock_ms = 0.0;
};

/// Strategies in first-appearance order, checkpoints in record order.
std::vector<AggregateRow> aggregate(const std::vector<RunResult>& runs);

/// Final-checkpoint median of train_pool_mean_reward per strategy.
double final_median(const std::vector<RunResult>& runs, std::string_view strategy);

struct TrendRow {
  std::size_t step = 0;
  std::vector<double> window_means;
};

/// Means of selected-task metadata over consecutive, non-overlapping
/// windows of `window` selections; a trailing partial window is dropped.
std::vector<TrendRow> curriculum_trend(const RunResult& run, std::size_t window);

enum class ReportFormat { kCsv, kJson };
ReportFormat report_format_from_string(std::string_view name);

inline constexpr std::string_view kBenchmarkCsvHeader =
    "run_id,strategy,seed,student_steps,teacher_steps,train_mean,eval_mean,wall_clock_ms";

/// Writes run_<id>.json and run_<id>.csv.
std::vector<std::filesystem::path> write_run_files(const RunResult& run, std::size_t run_id,
                                                   const std::filesystem::path& out_dir);

/// csv: benchmark.csv, summary.csv, trend_<id>.csv per run.
/// json: benchmark.json holding the same content.
std::vector<std::filesystem::path> emit_report(const std::vector<RunResult>& runs, ReportFormat format,
                                               const std::filesystem::path& out_dir, std::size_t trend_window);

/// Reads every run_<id>.json in `dir`, ordered by id.
std::vector<RunResult> load_runs(const std::filesystem::path& dir);

}  // namespace procurl::harness
