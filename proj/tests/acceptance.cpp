// End-to-end acceptance: one PASS/FAIL line per criterion, exit code 0 only if
// all pass. Tolerances and experiment sizes are fixed here on purpose.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fjam/channel.hpp"
#include "fjam/config.hpp"
#include "fjam/format.hpp"
#include "fjam/gradcheck.hpp"
#include "fjam/oracle.hpp"
#include "fjam/records.hpp"
#include "fjam/rng.hpp"
#include "fjam/secrecy.hpp"
#include "fjam/sweep.hpp"

namespace fs = std::filesystem;
using namespace fjam;

namespace {

constexpr std::size_t kFinalWindow = 200;     // episodes averaged for the ordering
constexpr double kMoeMargin = 1.05;           // MoE-GDM >= margin * GDM
constexpr double kOracleRatio = 0.90;         // frozen-channel policy vs grid optimum
constexpr std::size_t kOracleResolution = 21;
constexpr std::size_t kPolicyDraws = 100;
constexpr double kGradcheckSeconds = 60.0;
constexpr double kUnitSeconds = 30.0;
constexpr double kExact = 1e-12;
constexpr std::uint64_t kRerunSeed = 1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
  return out;
}

// summary.csv rows keyed by "<algorithm>_seed<seed>".
std::map<std::string, std::map<std::string, std::string>> read_summary(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  const auto header = split(line, ',');
  std::map<std::string, std::map<std::string, std::string>> out;
  while (std::getline(in, line)) {
    const auto fields = split(line, ',');
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = i < fields.size() ? fields[i] : "";
    out[row["algorithm"] + "_seed" + row["seed"]] = row;
  }
  return out;
}

// Runs a sweep unless `reuse` is set and a complete one already sits in `dir`.
fs::path sweep_into(RunConfig cfg, const fs::path& dir, bool reuse) {
  cfg.run.output_dir = dir.string();
  const fs::path summary = dir / "summary.csv";
  if (reuse && fs::exists(summary)) {
    bool complete = true;
    for (const auto& [key, row] : read_summary(summary)) complete = complete && row.at("status") == "ok";
    if (complete) {
      std::cerr << "reusing " << dir.string() << '\n';
      return dir;
    }
  }
  fs::remove_all(dir);
  run_sweep(cfg, &std::cerr);
  return dir;
}

double final_mean(const std::vector<RunRecord>& rows, const std::string& algo) {
  std::map<std::uint64_t, std::vector<double>> by_seed;
  for (const RunRecord& r : rows)
    if (r.algorithm == algo) by_seed[r.seed].push_back(r.mean_reward);
  if (by_seed.empty()) return std::nan("");
  double total = 0.0;
  for (const auto& [seed, rewards] : by_seed) {
    const std::size_t n = std::min(kFinalWindow, rewards.size());
    double s = 0.0;
    for (std::size_t i = rewards.size() - n; i < rewards.size(); ++i) s += rewards[i];
    total += s / static_cast<double>(n);
  }
  return total / static_cast<double>(by_seed.size());
}

Outcome ordering(const fs::path& sweep) {
  const auto rows = read_csv(sweep / "merged.csv");
  const double moe = final_mean(rows, "moe_gdm");
  const double gdm = final_mean(rows, "gdm");
  const double ddpg = final_mean(rows, "ddpg");
  std::ostringstream d;
  d << "moe_gdm " << format_fixed(moe, 3) << ", gdm " << format_fixed(gdm, 3) << ", ddpg "
    << format_fixed(ddpg, 3) << ", moe/gdm " << format_fixed(moe / gdm, 3) << " (need >= "
    << kMoeMargin << " and gdm > ddpg)";
  return {moe >= kMoeMargin * gdm && moe > gdm && gdm > ddpg, d.str()};
}

Outcome oracle_proximity(const RunConfig& base, const fs::path& dir) {
  RunConfig cfg = base;
  cfg.env.freeze_channel = true;
  cfg.run.algorithms = {Algorithm::kGdm};
  cfg.run.seeds = {kRerunSeed};
  cfg.run.output_dir = dir.string();
  fs::remove_all(dir);
  const SweepResult res = run_sweep(cfg, &std::cerr);
  if (!res.all_ok() || !res.runs.front().agent) return {false, "frozen-channel run failed"};
  const RunOutcome& run = res.runs.front();
  const auto t0 = std::chrono::steady_clock::now();
  const PolicyGap gap = policy_gap(*run.agent, run.last_channel, cfg.scenario, cfg.env,
                                   kOracleResolution, kPolicyDraws);
  const double oracle_seconds = seconds_since(t0);
  if (gap.degenerate()) return {false, "grid optimum is zero; ratio undefined"};
  std::ostringstream d;
  d << "policy " << format_fixed(gap.mean_policy_reward, 3) << " / grid optimum "
    << format_fixed(gap.best_reward, 3) << " = " << format_fixed(*gap.ratio, 4) << " (need >= "
    << kOracleRatio << "), policy+oracle " << format_fixed(oracle_seconds, 2) << " s";
  return {*gap.ratio >= kOracleRatio, d.str()};
}

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  const GradcheckReport report = run_gradcheck();
  const double secs = seconds_since(t0);
  double worst_net = 0.0, worst_chain = 0.0;
  std::size_t min_draws = SIZE_MAX;
  for (const auto& e : report.entries) {
    (e.tolerance == kChainTolerance ? worst_chain : worst_net) =
        std::max(e.tolerance == kChainTolerance ? worst_chain : worst_net, e.max_relative_error);
    min_draws = std::min(min_draws, e.draws);
  }
  std::ostringstream d;
  d << report.entries.size() << " checks, worst network " << format_sci(worst_net, 2)
    << ", worst chain " << format_sci(worst_chain, 2) << ", >= " << min_draws << " draws, "
    << format_fixed(secs, 1) << " s";
  return {report.passed() && min_draws >= 10 && secs < kGradcheckSeconds, d.str()};
}

// Channel and secrecy examples with exact expected values, plus fading statistics.
Outcome propagation_metrics() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  auto near = [](double a, double b) { return std::abs(a - b) <= kExact * std::max(1.0, std::abs(b)); };

  ScenarioConfig s;
  s.path_loss_exponent = 3.0;
  s.ref_distance = 1.0;
  s.ref_gain = 1e-3;
  expect(near(path_loss(1.0, s), 1e-3), "path_loss(1)");
  expect(near(path_loss(10.0, s), 1e-6), "path_loss(10)");
  ScenarioConfig sq = s;
  sq.path_loss_exponent = 2.0;
  sq.ref_gain = 1.0;
  expect(near(path_loss(2.0, sq), 0.25), "path_loss(2, alpha 2)");
  bool threw = false;
  try {
    path_loss(0.5, s);
  } catch (const std::domain_error&) {
    threw = true;
  }
  expect(threw, "path_loss below reference distance");

  expect(shannon_capacity(0.0) == 0.0, "capacity(0)");
  expect(near(shannon_capacity(1.0), 1.0), "capacity(1)");
  expect(near(shannon_capacity(3.0), 2.0), "capacity(3)");

  // One AP, unit gain and noise.
  ScenarioConfig one;
  one.ap_positions = {{0, 0}};
  one.user_positions = {{1, 0}};
  one.user_to_ap = {0};
  one.noise_power = 1.0;
  ChannelRealization unit;
  unit.gains = Eigen::MatrixXd::Ones(1, 1);
  const std::vector<double> p1{1.0};
  expect(near(sinr(0, 0, p1, unit, one), 1.0), "sinr single link");
  // Signal 2 over interference 1 plus noise 1.
  ScenarioConfig two = one;
  two.ap_positions = {{0, 0}, {5, 0}};
  two.user_positions = {{1, 0}, {4, 0}};
  two.user_to_ap = {0, 1};
  ChannelRealization g2;
  g2.gains = Eigen::MatrixXd::Ones(2, 2);
  const std::vector<double> p2{2.0, 1.0};
  expect(near(sinr(0, 0, p2, g2, two), 1.0), "sinr 2/(1+1)");

  const std::vector<double> eves{0.5, 0.3};
  expect(near(secrecy_rate_from(2.0, eves), 1.5), "secrecy 2 - 0.5");
  const std::vector<double> strong{2.0, 0.1};
  expect(secrecy_rate_from(1.0, strong) == 0.0, "secrecy clamped");
  expect(near(secure_ee_from(1.5, 0.5), 3.0), "secure EE 1.5/0.5");
  expect(secure_ee_from(1.5, 0.0) == 0.0, "secure EE at zero power");

  const ScenarioConfig def = ScenarioConfig::default_scenario();
  Rng rng(7);
  const ChannelRealization ch = realize_channel(def, rng);
  const PowerAllocation silent(std::vector<double>(def.n_aps(), 0.0));
  expect(evaluate_secrecy(silent, ch, def, 1.0).reward == 0.0, "all powers zero");

  ScenarioConfig link;
  link.ap_positions = {{0, 0}};
  link.user_positions = {{10, 0}};
  link.user_to_ap = {0};
  Rng nofade_rng(0);
  const ChannelRealization lch = realize_channel(link, nofade_rng, Fading::kNone);
  const double g = path_loss(10.0, link);
  const double closed = std::log2(1.0 + link.p_max * g / link.noise_power) * (1.0 + 1.0 / link.p_max);
  expect(near(evaluate_secrecy(PowerAllocation({link.p_max}), lch, link, 1.0).reward, closed),
         "single link closed form");

  Rng nf(3);
  const ChannelRealization flat = realize_channel(def, nf, Fading::kNone);
  const ChannelRealization pl = path_loss_matrix(def);
  expect(flat.gains == pl.gains, "unit fading equals path loss");
  Rng ra(11), rb(11);
  expect(realize_channel(def, ra).gains == realize_channel(def, rb).gains, "seeded realizations");

  // Unit-mean exponential fading over 1e6 draws.
  Rng fr(2024);
  const std::size_t n = 1'000'000;
  double sum = 0.0, sumsq = 0.0;
  std::size_t below = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = sample_small_scale(fr);
    sum += h;
    sumsq += h * h;
    below += h <= 1.0;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  const double cdf = static_cast<double>(below) / n;
  expect(std::abs(mean - 1.0) <= 0.01, "fading mean " + format_fixed(mean, 4));
  expect(std::abs(var - 1.0) <= 0.02, "fading variance " + format_fixed(var, 4));
  expect(std::abs(cdf - (1.0 - std::exp(-1.0))) <= 0.005, "fading CDF(1) " + format_fixed(cdf, 4));

  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "mean " << format_fixed(mean, 4) << ", var " << format_fixed(var, 4) << ", CDF(1) "
    << format_fixed(cdf, 4) << ", " << format_fixed(secs, 1) << " s";
  for (const auto& f : failures) d << "; failed: " << f;
  return {failures.empty() && secs < kUnitSeconds, d.str()};
}

Outcome determinism(const RunConfig& base, const fs::path& sweep, const fs::path& dir) {
  RunConfig cfg = base;
  cfg.run.algorithms = {Algorithm::kMoeGdm};
  cfg.run.seeds = {kRerunSeed};
  cfg.run.output_dir = dir.string();
  fs::remove_all(dir);
  run_sweep(cfg, &std::cerr);
  const std::string stem = run_stem(Algorithm::kMoeGdm, kRerunSeed);
  const std::string first = slurp(sweep / (stem + ".csv"));
  const std::string second = slurp(dir / (stem + ".csv"));
  return {!first.empty() && first == second,
          stem + ".csv rerun: " + std::to_string(second.size()) + " bytes vs " +
              std::to_string(first.size()) + (first == second ? ", identical" : ", different")};
}

// Episode columns that must agree: everything but the algorithm name and the
// expert histogram, which only the mixture fills.
std::vector<std::string> trajectory(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> out;
  while (std::getline(in, line)) {
    const auto f = split(line, ',');
    if (f.size() >= 6) out.push_back(f[1] + "," + f[2] + "," + f[3] + "," + f[4] + "," + f[5]);
  }
  return out;
}

Outcome degeneracy(const RunConfig& base, const fs::path& sweep, const fs::path& dir) {
  RunConfig cfg = base;
  cfg.agent.moe.experts = 1;
  cfg.agent.moe.load_balance = 0.0;
  cfg.run.algorithms = {Algorithm::kMoeGdm};
  cfg.run.seeds = {kRerunSeed};
  cfg.run.output_dir = dir.string();
  fs::remove_all(dir);
  run_sweep(cfg, &std::cerr);
  const auto mixture = trajectory(dir / (run_stem(Algorithm::kMoeGdm, kRerunSeed) + ".csv"));
  const auto plain = trajectory(sweep / (run_stem(Algorithm::kGdm, kRerunSeed) + ".csv"));
  std::size_t first_diff = 0;
  while (first_diff < std::min(mixture.size(), plain.size()) && mixture[first_diff] == plain[first_diff])
    ++first_diff;
  const bool same = !plain.empty() && mixture == plain;
  std::ostringstream d;
  d << mixture.size() << " vs " << plain.size() << " episodes";
  if (!same) d << ", first difference at row " << first_diff;
  else d << ", reward columns identical";
  return {same, d.str()};
}

Outcome constraint_safety(const fs::path& sweep) {
  std::uint64_t clamps = 0, steps = 0;
  for (const auto& [key, row] : read_summary(sweep / "summary.csv")) {
    clamps += std::stoull(row.at("clamp_events"));
    steps += std::stoull(row.at("env_steps"));
  }
  return {clamps == 0 && steps > 0,
          std::to_string(clamps) + " clamp events over " + std::to_string(steps) + " steps"};
}

Outcome compute_parity(const RunConfig& cfg, const fs::path& sweep) {
  const auto summary = read_summary(sweep / "summary.csv");
  bool ok = true;
  std::ostringstream d;
  for (std::uint64_t seed : cfg.run.seeds) {
    const auto& moe = summary.at(run_stem(Algorithm::kMoeGdm, seed));
    const auto& gdm = summary.at(run_stem(Algorithm::kGdm, seed));
    const std::uint64_t me = std::stoull(moe.at("acting_denoiser_evaluations"));
    const std::uint64_t ms = std::stoull(moe.at("env_steps"));
    const std::uint64_t ge = std::stoull(gdm.at("acting_denoiser_evaluations"));
    const std::uint64_t gs = std::stoull(gdm.at("env_steps"));
    // Integer cross-multiplication keeps the per-action comparison exact.
    ok = ok && ms > 0 && gs > 0 && me * gs == ge * ms;
    d << "seed " << seed << ": " << me << "/" << ms << " vs " << ge << "/" << gs << "; ";
  }
  d << "(denoiser evaluations / actions, moe_gdm vs gdm)";
  return {ok, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string out = "acceptance_runs";
  std::string config;
  bool reuse = false;
  std::vector<int> only;
  app.add_option("--out", out, "Working directory for training outputs");
  app.add_option("--config", config, "Config file (defaults when omitted)");
  app.add_flag("--reuse", reuse, "Reuse a complete default sweep already in --out");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = config.empty() ? parse_config("") : load_config(config);
    const fs::path root(out);
    fs::create_directories(root);
    const std::set<int> selected(only.begin(), only.end());
    auto wanted = [&](int c) { return selected.empty() || selected.count(c) > 0; };
    const bool need_sweep = wanted(1) || wanted(5) || wanted(6) || wanted(7) || wanted(8);
    const fs::path sweep = need_sweep ? sweep_into(cfg, root / "sweep", reuse) : fs::path();

    const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, [&] { return ordering(sweep); }},
        {2, [&] { return oracle_proximity(cfg, root / "frozen"); }},
        {3, [&] { return gradients(); }},
        {4, [&] { return propagation_metrics(); }},
        {5, [&] { return determinism(cfg, sweep, root / "rerun"); }},
        {6, [&] { return degeneracy(cfg, sweep, root / "single_expert"); }},
        {7, [&] { return constraint_safety(sweep); }},
        {8, [&] { return compute_parity(cfg, sweep); }},
    };
    const std::map<int, std::string> names = {
        {1, "ordering"},     {2, "oracle proximity"}, {3, "gradient suite"},
        {4, "propagation and metrics"}, {5, "determinism"}, {6, "mixture degeneracy"},
        {7, "constraint safety"},       {8, "compute parity"}};
    bool all = true;
    std::vector<std::string> lines;
    for (const auto& [id, fn] : criteria) {
      if (!wanted(id)) continue;
      Outcome o;
      try {
        o = fn();
      } catch (const std::exception& e) {
        o = {false, std::string("error: ") + e.what()};
      }
      all = all && o.pass;
      const std::string line = "criterion " + std::to_string(id) + " (" + names.at(id) +
                               "): " + (o.pass ? "PASS" : "FAIL") + " - " + o.detail;
      std::cout << line << std::endl;
      lines.push_back(line);
    }
    std::cout << "\nsummary\n";
    for (const auto& l : lines) std::cout << l << '\n';
    return all ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return 2;
  }
}
