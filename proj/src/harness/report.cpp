#include "procurl/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace procurl::harness {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::vector<std::string> strategy_order(const std::vector<RunResult>& runs) {
  std::vector<std::string> order;
  for (const auto& r : runs) {
    if (std::find(order.begin(), order.end(), r.strategy) == order.end()) order.push_back(r.strategy);
  }
  return order;
}

std::string trend_csv(const RunResult& run, std::size_t window) {
  std::ostringstream out;
  out << "step";
  for (const auto& f : run.metadata_fields) out << ",window_mean_" << f;
  out << '\n';
  for (const auto& row : curriculum_trend(run, window)) {
    out << row.step;
    for (double v : row.window_means) out << ',' << num(v);
    out << '\n';
  }
  return out.str();
}

nlohmann::json aggregate_json(const AggregateRow& a) {
  return {{"strategy", a.strategy},
          {"checkpoint", a.checkpoint},
          {"n_seeds", a.n_seeds},
          {"train_mean", a.train_mean},
          {"train_stderr", a.train_stderr},
          {"train_median", a.train_median},
          {"eval_mean", a.eval_mean ? nlohmann::json(*a.eval_mean) : nlohmann::json(nullptr)},
          {"student_steps", a.student_steps},
          {"teacher_steps", a.teacher_steps},
          {"total_steps", a.total_steps},
          {"wall_clock_ms", a.wall_clock_ms}};
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<RunResult>& runs) {
  std::vector<AggregateRow> rows;
  for (const auto& strategy : strategy_order(runs)) {
    std::vector<const RunResult*> group;
    std::size_t max_records = 0;
    for (const auto& r : runs) {
      if (r.strategy != strategy) continue;
      group.push_back(&r);
      max_records = std::max(max_records, r.records.size());
    }
    for (std::size_t k = 0; k < max_records; ++k) {
      AggregateRow row;
      row.strategy = strategy;
      std::vector<double> train;
      std::vector<double> eval;
      for (const RunResult* r : group) {
        if (k >= r->records.size()) continue;
        const MetricsRecord& rec = r->records[k];
        row.checkpoint = rec.checkpoint;
        train.push_back(rec.train_pool_mean_reward);
        if (rec.eval_pool_mean_reward) eval.push_back(*rec.eval_pool_mean_reward);
        row.student_steps += static_cast<double>(rec.student_steps);
        row.teacher_steps += static_cast<double>(rec.teacher_steps);
        row.wall_clock_ms += rec.wall_clock_ms;
      }
      const auto n = static_cast<double>(train.size());
      row.n_seeds = train.size();
      double sum = 0.0;
      for (double v : train) sum += v;
      row.train_mean = sum / n;
      double ss = 0.0;
      for (double v : train) ss += (v - row.train_mean) * (v - row.train_mean);
      row.train_stderr = train.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
      row.train_median = median(train);
      if (!eval.empty()) {
        double es = 0.0;
        for (double v : eval) es += v;
        row.eval_mean = es / static_cast<double>(eval.size());
      }
      row.student_steps /= n;
      row.teacher_steps /= n;
      row.total_steps = row.student_steps + row.teacher_steps;
      row.wall_clock_ms /= n;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

double final_median(const std::vector<RunResult>& runs, std::string_view strategy) {
  std::vector<double> finals;
  for (const auto& r : runs) {
    if (r.strategy == strategy && !r.records.empty()) finals.push_back(r.records.back().train_pool_mean_reward);
  }
  if (finals.empty()) throw ContractError("final_median: no runs for strategy " + std::string(strategy));
  return median(finals);
}

std::vector<TrendRow> curriculum_trend(const RunResult& run, std::size_t window) {
  if (window == 0) throw ContractError("curriculum_trend: window must be positive");
  std::vector<TrendRow> rows;
  const std::size_t fields = run.metadata_fields.size();
  for (std::size_t start = 0; start + window <= run.selections.size(); start += window) {
    TrendRow row;
    row.window_means.assign(fields, 0.0);
    for (std::size_t i = start; i < start + window; ++i) {
      const auto& meta = run.task_metadata.at(run.selections[i].task.index);
      for (std::size_t f = 0; f < fields; ++f) row.window_means[f] += meta[f];
    }
    for (double& v : row.window_means) v /= static_cast<double>(window);
    row.step = run.selections[start + window - 1].student_steps;
    rows.push_back(std::move(row));
  }
  return rows;
}

ReportFormat report_format_from_string(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw ConfigError("unknown report format: " + std::string(name));
}

std::vector<std::filesystem::path> write_run_files(const RunResult& run, std::size_t run_id,
                                                   const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  const auto json_path = out_dir / ("run_" + std::to_string(run_id) + ".json");
  write_file(json_path, to_json(run).dump(1) + "\n");

  std::ostringstream csv;
  csv << "checkpoint,student_steps,teacher_steps,eval_steps,episode_index,selected_task,train_mean,eval_mean";
  for (const auto& f : run.metadata_fields) csv << ",task_" << f;
  csv << ",wall_clock_ms\n";
  for (const auto& r : run.records) {
    csv << r.checkpoint << ',' << r.student_steps << ',' << r.teacher_steps << ',' << r.eval_steps << ','
        << r.episode_index << ',' << (r.selected_task ? std::to_string(r.selected_task->index) : std::string()) << ','
        << num(r.train_pool_mean_reward) << ',' << opt_num(r.eval_pool_mean_reward);
    for (std::size_t f = 0; f < run.metadata_fields.size(); ++f) {
      csv << ',' << (f < r.selected_task_metadata.size() ? num(r.selected_task_metadata[f]) : std::string());
    }
    csv << ',' << num(r.wall_clock_ms) << '\n';
  }
  const auto csv_path = out_dir / ("run_" + std::to_string(run_id) + ".csv");
  write_file(csv_path, csv.str());
  return {json_path, csv_path};
}

std::vector<std::filesystem::path> emit_report(const std::vector<RunResult>& runs, ReportFormat format,
                                               const std::filesystem::path& out_dir, std::size_t trend_window) {
  if (runs.empty()) throw ContractError("emit_report: no runs");
  if (trend_window == 0) throw ContractError("emit_report: trend window must be positive");
  ensure_dir(out_dir);
  const std::vector<AggregateRow> agg = aggregate(runs);
  std::vector<std::filesystem::path> written;

  if (format == ReportFormat::kCsv) {
    std::ostringstream bench;
    bench << kBenchmarkCsvHeader << '\n';
    for (std::size_t id = 0; id < runs.size(); ++id) {
      for (const auto& r : runs[id].records) {
        bench << id << ',' << runs[id].strategy << ',' << runs[id].seed << ',' << r.student_steps << ','
              << r.teacher_steps << ',' << num(r.train_pool_mean_reward) << ',' << opt_num(r.eval_pool_mean_reward)
              << ',' << num(r.wall_clock_ms) << '\n';
      }
    }
    written.push_back(out_dir / "benchmark.csv");
    write_file(written.back(), bench.str());

    std::ostringstream summary;
    summary << "strategy,checkpoint,n_seeds,train_mean,train_stderr,train_median,eval_mean,student_steps,"
               "teacher_steps,total_steps,wall_clock_ms\n";
    for (const auto& a : agg) {
      summary << a.strategy << ',' << a.checkpoint << ',' << a.n_seeds << ',' << num(a.train_mean) << ','
              << num(a.train_stderr) << ',' << num(a.train_median) << ',' << opt_num(a.eval_mean) << ','
              << num(a.student_steps) << ',' << num(a.teacher_steps) << ',' << num(a.total_steps) << ','
              << num(a.wall_clock_ms) << '\n';
    }
    written.push_back(out_dir / "summary.csv");
    write_file(written.back(), summary.str());

    for (std::size_t id = 0; id < runs.size(); ++id) {
      written.push_back(out_dir / ("trend_" + std::to_string(id) + ".csv"));
      write_file(written.back(), trend_csv(runs[id], trend_window));
    }
    return written;
  }

  nlohmann::json jruns = nlohmann::json::array();
  nlohmann::json jtrends = nlohmann::json::array();
  for (std::size_t id = 0; id < runs.size(); ++id) {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : runs[id].records) {
      recs.push_back({{"student_steps", r.student_steps},
                      {"teacher_steps", r.teacher_steps},
                      {"train_mean", r.train_pool_mean_reward},
                      {"eval_mean", r.eval_pool_mean_reward ? nlohmann::json(*r.eval_pool_mean_reward) : nlohmann::json(nullptr)},
                      {"wall_clock_ms", r.wall_clock_ms}});
    }
    jruns.push_back({{"run_id", id}, {"strategy", runs[id].strategy}, {"seed", runs[id].seed}, {"records", recs}});
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& t : curriculum_trend(runs[id], trend_window)) rows.push_back({{"step", t.step}, {"window_means", t.window_means}});
    jtrends.push_back({{"run_id", id}, {"fields", runs[id].metadata_fields}, {"rows", rows}});
  }
  nlohmann::json jsum = nlohmann::json::array();
  for (const auto& a : agg) jsum.push_back(aggregate_json(a));
  written.push_back(out_dir / "benchmark.json");
  write_file(written.back(), nlohmann::json{{"runs", jruns}, {"summary", jsum}, {"trends", jtrends}}.dump(1) + "\n");
  return written;
}

std::vector<RunResult> load_runs(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::map<std::size_t, std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("run_", 0) != 0 || entry.path().extension() != ".json") continue;
    const std::string id = name.substr(4, name.size() - 4 - 5);
    if (id.empty() || !std::all_of(id.begin(), id.end(), [](char c) { return c >= '0' && c <= '9'; })) continue;
    files[std::stoul(id)] = entry.path();
  }
  if (files.empty()) throw IoError("no run_<id>.json files in " + dir.string());
  std::vector<RunResult> runs;
  for (const auto& [id, path] : files) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw IoError("malformed " + path.string() + ": " + e.what());
    }
    runs.push_back(run_result_from_json(j));
  }
  return runs;
}

}  // namespace procurl::harness
