#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fjam/config.hpp"
#include "fjam/format.hpp"
#include "fjam/gradcheck.hpp"
#include "fjam/oracle.hpp"
#include "fjam/records.hpp"
#include "fjam/sweep.hpp"

namespace {

fjam::RunConfig config_or_default(const std::string& path) {
  return path.empty() ? fjam::parse_config("") : fjam::load_config(path);
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& algos,
              const std::vector<std::uint64_t>& seeds, const std::string& out, std::size_t workers,
              bool freeze, std::size_t episodes) {
  fjam::RunConfig cfg = config_or_default(config_path);
  if (!algos.empty()) {
    cfg.run.algorithms.clear();
    for (const auto& a : algos) cfg.run.algorithms.push_back(fjam::algorithm_from_string(a));
  }
  if (!seeds.empty()) cfg.run.seeds = seeds;
  if (!out.empty()) cfg.run.output_dir = out;
  if (workers) cfg.run.workers = workers;
  if (freeze) cfg.env.freeze_channel = true;
  if (episodes) cfg.agent.train.episodes = episodes;
  fjam::validate(cfg);

  const fjam::SweepResult res = fjam::run_sweep(cfg, &std::cerr);
  const auto records = fjam::read_csv(res.merged_csv);
  if (!records.empty()) fjam::write_comparison(std::cout, fjam::compare(records));
  std::cout << "merged: " << res.merged_csv.string() << "\nsummary: " << res.summary_csv.string()
            << '\n';
  for (const auto& r : res.runs)
    if (!r.ok)
      std::cerr << "run " << fjam::run_stem(r.algorithm, r.seed) << " failed: " << r.error << '\n';
  return res.all_ok() ? 0 : 1;
}

int cmd_oracle(const std::string& config_path, std::size_t resolution, std::uint64_t seed,
               const std::string& checkpoint, std::size_t draws) {
  const fjam::RunConfig cfg = config_or_default(config_path);
  const std::size_t r = resolution ? resolution : cfg.run.oracle_resolution;
  const fjam::ChannelRealization ch = fjam::initial_channel(cfg.scenario, seed);
  const fjam::OracleResult best =
      fjam::grid_search(ch, cfg.scenario, cfg.env.reward_weight, r, cfg.run.oracle_budget);
  std::cout << "resolution,evaluations,best_reward";
  for (std::size_t a = 0; a < best.best_allocation.size(); ++a) std::cout << ",p_" << a;
  if (!checkpoint.empty()) std::cout << ",policy_reward,ratio";
  std::cout << '\n'
            << best.resolution << ',' << best.evaluations << ','
            << fjam::format_double(best.best_reward);
  for (std::size_t a = 0; a < best.best_allocation.size(); ++a)
    std::cout << ',' << fjam::format_double(best.best_allocation[a]);
  if (!checkpoint.empty()) {
    std::ifstream in(checkpoint);
    if (!in) throw std::runtime_error("cannot read checkpoint '" + checkpoint + "'");
    const auto agent = fjam::load_agent(in);
    const fjam::PolicyGap gap = fjam::policy_gap(*agent, ch, cfg.scenario, cfg.env, r, draws);
    std::cout << ',' << fjam::format_double(gap.mean_policy_reward) << ','
              << (gap.degenerate() ? std::string("degenerate") : fjam::format_double(*gap.ratio));
  }
  std::cout << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative friendly-jamming power control: training, comparison and oracle tools"};
  app.require_subcommand(1);

  std::string config_path, out, csv;
  std::vector<std::string> algos;
  std::vector<std::uint64_t> seeds;
  std::size_t workers = 0, episodes = 0, resolution = 0, draws = 100;
  std::uint64_t seed = 1;
  bool freeze = false;

  auto* train = app.add_subcommand("train", "Train the configured (algorithm, seed) runs");
  train->add_option("--config", config_path, "INI config file (defaults when omitted)");
  train->add_option("--algos", algos, "Algorithms: moe_gdm, gdm, ddpg")->delimiter(',');
  train->add_option("--seeds", seeds, "Seeds")->delimiter(',');
  train->add_option("--out", out, "Output directory");
  train->add_option("--workers", workers, "Parallel runs");
  train->add_flag("--freeze-channel", freeze, "Keep one channel realization for the whole run");
  train->add_option("--episodes", episodes, "Override the episode count");

  auto* compare = app.add_subcommand("compare", "Summarize a merged CSV");
  compare->add_option("--csv", csv, "Merged CSV")->required();

  auto* scatter = app.add_subcommand("scatter", "Emit (algorithm, sr, see) points");
  scatter->add_option("--csv", csv, "Merged CSV")->required();
  scatter->add_option("--out", out, "Output file (stdout when omitted)");

  auto* oracle = app.add_subcommand("oracle", "Grid-search optimum on a frozen channel");
  oracle->add_option("--config", config_path, "INI config file");
  oracle->add_option("--resolution", resolution, "Grid points per axis");
  oracle->add_option("--seed", seed, "Run seed whose initial channel is used");
  std::string checkpoint;
  oracle->add_option("--checkpoint", checkpoint, "Agent checkpoint to score against the optimum");
  oracle->add_option("--draws", draws, "Policy actions to average");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  std::size_t gc_draws = 10;
  std::uint64_t gc_seed = 0;
  gradcheck->add_option("--draws", gc_draws, "Random parameter draws per check");
  gradcheck->add_option("--seed", gc_seed, "Seed");

  auto* config = app.add_subcommand("config", "Print the effective configuration");
  config->add_option("--config", config_path, "INI config file");
  bool dump = false;
  config->add_flag("--dump", dump, "Write every key with its value");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(config_path, algos, seeds, out, workers, freeze, episodes);
    if (*compare) {
      fjam::write_comparison(std::cout, fjam::compare(fjam::read_csv(std::filesystem::path(csv))));
      return 0;
    }
    if (*scatter) {
      const auto points = fjam::scatter(fjam::read_csv(std::filesystem::path(csv)));
      if (out.empty()) {
        fjam::write_scatter(std::cout, points);
      } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write '" + out + "'");
        fjam::write_scatter(f, points);
      }
      return 0;
    }
    if (*oracle) return cmd_oracle(config_path, resolution, seed, checkpoint, draws);
    if (*gradcheck) {
      fjam::GradcheckOptions opts;
      opts.draws = gc_draws;
      opts.seed = gc_seed;
      const auto report = fjam::run_gradcheck(opts);
      fjam::write_report(std::cout, report);
      return report.passed() ? 0 : 1;
    }
    if (*config) {
      std::cout << fjam::dump_config(config_or_default(config_path));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
