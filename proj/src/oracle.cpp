#include "fjam/oracle.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace fjam {

OracleResult grid_search(const ChannelRealization& ch, const ScenarioConfig& cfg, double weight,
                         std::size_t resolution, std::uint64_t budget) {
  if (resolution < 2) throw std::invalid_argument("resolution: must be >= 2");
  const std::size_t n = cfg.n_aps();
  std::uint64_t points = 1;
  for (std::size_t a = 0; a < n; ++a) {
    if (points > budget / resolution)
      throw BudgetError("grid of " + std::to_string(resolution) + "^" + std::to_string(n) +
                        " points exceeds the evaluation budget of " + std::to_string(budget));
    points *= resolution;
  }

  const double step = cfg.p_max / static_cast<double>(resolution - 1);
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> watts(n, 0.0);
  OracleResult best;
  best.resolution = resolution;
  bool have_best = false;
  double best_total = 0.0;
  for (std::uint64_t i = 0; i < points; ++i) {
    for (std::size_t a = 0; a < n; ++a)
      watts[a] = idx[a] + 1 == resolution ? cfg.p_max : step * static_cast<double>(idx[a]);
    PowerAllocation p(watts);
    const double r = evaluate_secrecy(p, ch, cfg, weight).reward;
    const double total = p.total();
    if (!have_best || r > best.best_reward || (r == best.best_reward && total < best_total)) {
      best.best_reward = r;
      best.best_allocation = std::move(p);
      best_total = total;
      have_best = true;
    }
    ++best.evaluations;
    // Odometer with the first AP as the most significant digit.
    for (std::size_t a = n; a-- > 0;) {
      if (++idx[a] < resolution) break;
      idx[a] = 0;
    }
  }
  return best;
}

PolicyGap policy_gap(const Agent& agent, const ChannelRealization& ch, const ScenarioConfig& cfg,
                     const EnvConfig& env_cfg, std::size_t resolution, std::size_t draws,
                     std::uint64_t seed) {
  EnvConfig frozen = env_cfg;
  frozen.freeze_channel = true;
  Environment env(cfg, frozen);
  env.set_channel(ch);
  Rng rng(seed);
  EnvState state = env.reset(rng);
  double total = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto [action, expert] = agent.act(state.features(), rng);
    StepResult res = env.step(state, std::span<const double>(action.data(), action.size()), rng);
    total += res.reward;
    state = std::move(res.next_state);
  }
  PolicyGap gap;
  gap.mean_policy_reward = draws ? total / static_cast<double>(draws) : 0.0;
  gap.best_reward = grid_search(ch, cfg, env_cfg.reward_weight, resolution).best_reward;
  if (gap.best_reward > 0.0) gap.ratio = gap.mean_policy_reward / gap.best_reward;
  return gap;
}

PolicyGap allocation_gap(std::span<const double> action, const ChannelRealization& ch,
                         const ScenarioConfig& cfg, double weight, std::size_t resolution) {
  PolicyGap gap;
  gap.mean_policy_reward =
      evaluate_secrecy(PowerAllocation::from_normalized(action, cfg.p_max), ch, cfg, weight).reward;
  gap.best_reward = grid_search(ch, cfg, weight, resolution).best_reward;
  if (gap.best_reward > 0.0) gap.ratio = gap.mean_policy_reward / gap.best_reward;
  return gap;
}

}  // namespace fjam
