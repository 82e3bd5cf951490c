#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fjam/rng.hpp"

namespace fjam {

struct Position {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Position&) const = default;
};

double distance(const Position& a, const Position& b);

// Static description of the friendly-jamming deployment. Receivers are
// indexed users first, then eavesdroppers.
struct ScenarioConfig {
  std::vector<Position> ap_positions;
  std::vector<Position> user_positions;
  std::vector<Position> eve_positions;
  std::vector<std::size_t> user_to_ap;  // serving AP of each user
  double p_max = 1.0;                   // W, per AP
  double noise_power = 1e-7;            // W
  double path_loss_exponent = 3.0;
  double ref_distance = 1.0;  // m
  double ref_gain = 1e-3;     // linear gain at ref_distance

  std::size_t n_aps() const { return ap_positions.size(); }
  std::size_t n_users() const { return user_positions.size(); }
  std::size_t n_eves() const { return eve_positions.size(); }
  std::size_t n_receivers() const { return n_users() + n_eves(); }
  const Position& receiver_position(std::size_t r) const;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  // 3 APs, 3 users (10 m from their AP), 2 eavesdroppers.
  static ScenarioConfig default_scenario();

  bool operator==(const ScenarioConfig&) const = default;
};

// Linear power gains, rows = APs, columns = receivers (users then eves).
struct ChannelRealization {
  Eigen::MatrixXd gains;

  double gain(std::size_t ap, std::size_t receiver) const { return gains(ap, receiver); }
  std::size_t n_aps() const { return static_cast<std::size_t>(gains.rows()); }
  std::size_t n_receivers() const { return static_cast<std::size_t>(gains.cols()); }
};

enum class Fading {
  kRayleigh,
  kNone,  // every small-scale factor fixed to 1
};

// g0 * (d / d0)^-alpha. Throws std::domain_error when d < d0.
double path_loss(double d, const ScenarioConfig& cfg);

// |h|^2 for h ~ CN(0, 1): unit-mean exponential.
double sample_small_scale(Rng& rng);

ChannelRealization path_loss_matrix(const ScenarioConfig& cfg);
ChannelRealization realize_channel(const ScenarioConfig& cfg, Rng& rng,
                                   Fading fading = Fading::kRayleigh);

// Serving AP's received power over interference from every other AP plus noise.
double sinr(std::size_t receiver, std::size_t serving_ap, std::span<const double> powers,
            const ChannelRealization& ch, const ScenarioConfig& cfg);

// log2(1 + s). Throws std::domain_error for s < 0.
double shannon_capacity(double s);

}  // namespace fjam
