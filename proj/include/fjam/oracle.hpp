#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "fjam/channel.hpp"
#include "fjam/env.hpp"
#include "fjam/secrecy.hpp"
#include "fjam/trainer.hpp"

namespace fjam {

inline constexpr std::uint64_t kDefaultEvaluationBudget = 10'000'000;

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleResult {
  PowerAllocation best_allocation;
  double best_reward = 0.0;
  std::size_t resolution = 0;
  std::uint64_t evaluations = 0;
};

// Exhaustive search over {0, p_max/(R-1), ..., p_max}^n_aps on a fixed channel.
// Ties go to the lower total power, then to the lexicographically smaller point.
OracleResult grid_search(const ChannelRealization& ch, const ScenarioConfig& cfg, double weight,
                         std::size_t resolution,
                         std::uint64_t budget = kDefaultEvaluationBudget);

struct PolicyGap {
  double mean_policy_reward = 0.0;
  double best_reward = 0.0;
  std::optional<double> ratio;  // empty when best_reward == 0 (degenerate scenario)
  bool degenerate() const { return !ratio.has_value(); }
};

// Mean reward of `draws` greedy actions on the frozen channel, each conditioned
// on the previous action, relative to the grid optimum.
PolicyGap policy_gap(const Agent& agent, const ChannelRealization& ch, const ScenarioConfig& cfg,
                     const EnvConfig& env_cfg, std::size_t resolution, std::size_t draws = 100,
                     std::uint64_t seed = 0);

// Same, for a fixed normalized action (self-comparison and baselines).
PolicyGap allocation_gap(std::span<const double> action, const ChannelRealization& ch,
                         const ScenarioConfig& cfg, double weight, std::size_t resolution);

}  // namespace fjam
