#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fjam/channel.hpp"

namespace fjam {

// Below this transmit power (W) secure EE is defined as zero.
inline constexpr double kZeroPowerThreshold = 1e-9;

// Per-AP transmit powers in watts, each within [0, p_max].
class PowerAllocation {
 public:
  PowerAllocation() = default;
  explicit PowerAllocation(std::vector<double> watts) : watts_(std::move(watts)) {}

  // Scales a normalized action in [0,1]^n by p_max.
  static PowerAllocation from_normalized(std::span<const double> action, double p_max);

  std::span<const double> watts() const { return watts_; }
  double operator[](std::size_t ap) const { return watts_[ap]; }
  std::size_t size() const { return watts_.size(); }
  double total() const;

  // Throws std::invalid_argument if the length or any entry violates [0, p_max].
  void validate(const ScenarioConfig& cfg) const;

 private:
  std::vector<double> watts_;
};

struct SecrecyMetrics {
  std::vector<double> user_capacity;  // per user
  Eigen::MatrixXd eve_capacity;       // (eavesdropper, user)
  std::vector<double> secrecy_rate;   // per user, >= 0
  std::vector<double> secure_ee;      // per AP, >= 0
  double sr_sum = 0.0;
  double see_sum = 0.0;
  double reward = 0.0;  // sr_sum + weight * see_sum
};

// max(0, C_user - max_e C_eve); with no eavesdroppers C_eve = 0.
double secrecy_rate_from(double user_capacity, std::span<const double> eve_capacities);

// C_s / p, or 0 when p <= kZeroPowerThreshold.
double secure_ee_from(double secrecy_rate, double power);

double secrecy_rate(std::size_t user, const PowerAllocation& p, const ChannelRealization& ch,
                    const ScenarioConfig& cfg);

// Sum of the secrecy rates of the users served by `ap`, per watt of its power.
double secure_ee(std::size_t ap, const PowerAllocation& p, const ChannelRealization& ch,
                 const ScenarioConfig& cfg);

SecrecyMetrics evaluate_secrecy(const PowerAllocation& p, const ChannelRealization& ch,
                                const ScenarioConfig& cfg, double weight);

inline double reward(const PowerAllocation& p, const ChannelRealization& ch,
                     const ScenarioConfig& cfg, double weight) {
  return evaluate_secrecy(p, ch, cfg, weight).reward;
}

}  // namespace fjam
