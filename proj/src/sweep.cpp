#include "fjam/sweep.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "fjam/records.hpp"

namespace fjam {

bool SweepResult::all_ok() const {
  for (const auto& r : runs)
    if (!r.ok) return false;
  return true;
}

std::string run_stem(Algorithm algo, std::uint64_t seed) {
  return to_string(algo) + "_seed" + std::to_string(seed);
}

namespace {

void execute(const RunConfig& cfg, RunOutcome& out, std::mutex& log_mutex, std::ostream* log) {
  const auto say = [&](const std::string& msg) {
    if (!log) return;
    std::lock_guard lock(log_mutex);
    *log << msg << std::endl;
  };
  const std::string stem = run_stem(out.algorithm, out.seed);
  out.csv = std::filesystem::path(cfg.run.output_dir) / (stem + ".csv");
  out.checkpoint = std::filesystem::path(cfg.run.output_dir) / (stem + ".ckpt");

  std::ofstream csv(out.csv, std::ios::binary);
  if (!csv) {
    out.error = "cannot write '" + out.csv.string() + "'";
    say("[" + stem + "] failed: " + out.error);
    return;
  }
  write_csv_header(csv);

  AgentConfig agent_cfg = cfg.agent;
  agent_cfg.train.seed = out.seed;
  const auto start = std::chrono::steady_clock::now();
  say("[" + stem + "] started");
  try {
    RunResult res = train(out.algorithm, agent_cfg, cfg.scenario, cfg.env, [&](const RunRecord& r) {
      csv << csv_row(r) << '\n';
      csv.flush();
      ++out.episodes_completed;
    });
    out.stats = res.stats;
    out.last_channel = res.last_channel;
    std::ofstream ckpt(out.checkpoint, std::ios::binary);
    if (!ckpt) throw std::runtime_error("cannot write '" + out.checkpoint.string() + "'");
    res.agent->save(ckpt);
    out.agent = std::move(res.agent);
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (out.ok)
    say("[" + stem + "] done in " + std::to_string(static_cast<long>(secs)) + " s");
  else
    say("[" + stem + "] failed after " + std::to_string(out.episodes_completed) +
        " episodes: " + out.error);
}

}  // namespace

SweepResult run_sweep(const RunConfig& cfg, std::ostream* log) {
  validate(cfg);
  std::filesystem::create_directories(cfg.run.output_dir);

  SweepResult result;
  for (Algorithm a : cfg.run.algorithms)
    for (std::uint64_t s : cfg.run.seeds) {
      RunOutcome o;
      o.algorithm = a;
      o.seed = s;
      result.runs.push_back(std::move(o));
    }

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < result.runs.size(); i = next++)
      execute(cfg, result.runs[i], log_mutex, log);
  };
  const std::size_t n_workers = std::min<std::size_t>(cfg.run.workers, result.runs.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Partial CSVs of failed runs are merged too so the sweep stays analyzable.
  std::vector<RunRecord> merged;
  for (const auto& run : result.runs) {
    if (!std::filesystem::exists(run.csv)) continue;
    auto rows = read_csv(run.csv);
    merged.insert(merged.end(), rows.begin(), rows.end());
  }
  result.merged_csv = std::filesystem::path(cfg.run.output_dir) / "merged.csv";
  write_csv(result.merged_csv, merged);

  result.summary_csv = std::filesystem::path(cfg.run.output_dir) / "summary.csv";
  std::ofstream summary(result.summary_csv, std::ios::binary);
  summary << "algorithm,seed,status,episodes,env_steps,updates,clamp_events,"
             "acting_denoiser_evaluations,error\n";
  for (const auto& run : result.runs) {
    std::string err = run.error;
    for (char& c : err)
      if (c == ',' || c == '\n' || c == '\r') c = ' ';
    summary << to_string(run.algorithm) << ',' << run.seed << ',' << (run.ok ? "ok" : "failed")
            << ',' << run.episodes_completed << ',' << run.stats.env_steps << ','
            << run.stats.updates << ',' << run.stats.clamp_events << ','
            << run.stats.acting_denoiser_evaluations << ',' << err << '\n';
  }
  return result;
}

}  // namespace fjam
