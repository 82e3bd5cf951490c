#include "fjam/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fjam {

EnvConfig EnvConfig::defaults_for(const ScenarioConfig& scenario) {
  const ChannelRealization ch = path_loss_matrix(scenario);
  const double lo = std::log10(ch.gains.minCoeff());
  const double hi = std::log10(ch.gains.maxCoeff());
  EnvConfig cfg;
  cfg.norm_mu = 0.5 * (lo + hi);
  cfg.norm_sigma = hi > lo ? 0.5 * (hi - lo) : 1.0;
  return cfg;
}

std::vector<double> normalize_gains(const ChannelRealization& ch, double mu, double sigma) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(ch.gains.size()));
  for (Eigen::Index a = 0; a < ch.gains.rows(); ++a)
    for (Eigen::Index r = 0; r < ch.gains.cols(); ++r)
      out.push_back((std::log10(std::max(ch.gains(a, r), kGainFloor)) - mu) / sigma);
  return out;
}

Eigen::VectorXd EnvState::features() const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(dim()));
  std::size_t i = 0;
  for (double g : normalized_gains) x(static_cast<Eigen::Index>(i++)) = g;
  for (double a : prev_action) x(static_cast<Eigen::Index>(i++)) = a;
  return x;
}

Environment::Environment(ScenarioConfig scenario, EnvConfig config, Fading fading)
    : scenario_(std::move(scenario)), config_(config), fading_(fading) {
  scenario_.validate();
  if (config_.episode_length == 0) throw std::invalid_argument("episode_length: must be > 0");
  if (!(config_.norm_sigma > 0.0)) throw std::invalid_argument("norm_sigma: must be > 0");
}

std::size_t Environment::state_dim() const {
  return scenario_.n_aps() * scenario_.n_receivers() + scenario_.n_aps();
}

void Environment::set_channel(ChannelRealization ch) {
  channel_ = std::move(ch);
  has_channel_ = true;
}

EnvState Environment::observe(std::vector<double> prev_action, std::size_t step_index) const {
  EnvState s;
  s.normalized_gains = normalize_gains(channel_, config_.norm_mu, config_.norm_sigma);
  s.prev_action = std::move(prev_action);
  s.step_index = step_index;
  return s;
}

EnvState Environment::reset(Rng& rng) {
  if (!(config_.freeze_channel && has_channel_)) {
    channel_ = realize_channel(scenario_, rng, fading_);
    has_channel_ = true;
  }
  return observe(std::vector<double>(action_dim(), 0.0), 0);
}

StepResult Environment::step(const EnvState& state, std::span<const double> action, Rng& rng) {
  if (action.size() != action_dim())
    throw std::invalid_argument("step: action has wrong dimension");
  std::vector<double> applied(action.begin(), action.end());
  for (double& a : applied) {
    if (!(a >= 0.0 && a <= 1.0)) {
      ++clamp_events_;
      a = std::isnan(a) ? 0.0 : std::clamp(a, 0.0, 1.0);
    }
  }
  StepResult out;
  out.metrics = evaluate_secrecy(PowerAllocation::from_normalized(applied, scenario_.p_max),
                                 channel_, scenario_, config_.reward_weight);
  out.reward = out.metrics.reward;
  out.done = state.step_index + 1 >= config_.episode_length;
  if (!config_.freeze_channel) channel_ = realize_channel(scenario_, rng, fading_);
  out.next_state = observe(std::move(applied), state.step_index + 1);
  return out;
}

}  // namespace fjam
