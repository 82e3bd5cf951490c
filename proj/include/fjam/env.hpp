#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fjam/channel.hpp"
#include "fjam/rng.hpp"
#include "fjam/secrecy.hpp"

namespace fjam {

inline constexpr double kGainFloor = 1e-15;

struct EnvConfig {
  std::size_t episode_length = 100;
  bool freeze_channel = false;  // keep the first realized channel for the whole run
  double norm_mu = 0.0;         // log10-gain centering constant
  double norm_sigma = 1.0;      // log10-gain scale constant
  double reward_weight = 1.0;   // weight on the secure-EE sum

  // Normalization constants from the analytic path-loss range of `scenario`.
  static EnvConfig defaults_for(const ScenarioConfig& scenario);
  static EnvConfig defaults() { return defaults_for(ScenarioConfig::default_scenario()); }

  bool operator==(const EnvConfig&) const = default;
};

// (log10(max(g, floor)) - mu) / sigma, row-major over (AP, receiver).
std::vector<double> normalize_gains(const ChannelRealization& ch, double mu, double sigma);

struct EnvState {
  std::vector<double> normalized_gains;
  std::vector<double> prev_action;  // normalized, in [0,1]
  std::size_t step_index = 0;

  std::size_t dim() const { return normalized_gains.size() + prev_action.size(); }
  // Flat learner input: gains then previous action.
  Eigen::VectorXd features() const;
  bool operator==(const EnvState&) const = default;
};

struct StepResult {
  EnvState next_state;
  double reward = 0.0;
  bool done = false;
  SecrecyMetrics metrics;
};

class Environment {
 public:
  Environment(ScenarioConfig scenario, EnvConfig config, Fading fading = Fading::kRayleigh);

  EnvState reset(Rng& rng);

  // Rewards `action` (normalized, clamped into [0,1]) on the current channel,
  // then redraws the fading for the next state unless the channel is frozen.
  StepResult step(const EnvState& state, std::span<const double> action, Rng& rng);

  const ChannelRealization& channel() const { return channel_; }
  // Replaces the current channel; with freeze_channel it persists across resets.
  void set_channel(ChannelRealization ch);

  std::size_t state_dim() const;
  std::size_t action_dim() const { return scenario_.n_aps(); }
  std::uint64_t clamp_events() const { return clamp_events_; }

  const ScenarioConfig& scenario() const { return scenario_; }
  const EnvConfig& config() const { return config_; }

 private:
  EnvState observe(std::vector<double> prev_action, std::size_t step_index) const;

  ScenarioConfig scenario_;
  EnvConfig config_;
  Fading fading_;
  ChannelRealization channel_;
  bool has_channel_ = false;
  std::uint64_t clamp_events_ = 0;
};

}  // namespace fjam
