#include "fjam/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fjam {

double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

const Position& ScenarioConfig::receiver_position(std::size_t r) const {
  return r < n_users() ? user_positions.at(r) : eve_positions.at(r - n_users());
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument(key + ": " + why);
  };
  if (ap_positions.empty()) fail("ap_positions", "at least one AP required");
  if (user_positions.empty()) fail("user_positions", "at least one user required");
  if (user_to_ap.size() != user_positions.size())
    fail("user_to_ap", "needs one entry per user");
  for (std::size_t ap : user_to_ap)
    if (ap >= n_aps()) fail("user_to_ap", "AP index " + std::to_string(ap) + " out of range");
  if (!(p_max > 0.0) || !std::isfinite(p_max)) fail("p_max", "must be > 0");
  if (!(noise_power > 0.0) || !std::isfinite(noise_power)) fail("noise_power", "must be > 0");
  if (!(path_loss_exponent >= 2.0) || !std::isfinite(path_loss_exponent))
    fail("path_loss_exponent", "must be >= 2");
  if (!(ref_distance > 0.0)) fail("ref_distance", "must be > 0");
  if (!(ref_gain > 0.0)) fail("ref_gain", "must be > 0");
  for (std::size_t a = 0; a < n_aps(); ++a) {
    for (std::size_t r = 0; r < n_receivers(); ++r) {
      if (distance(ap_positions[a], receiver_position(r)) < ref_distance)
        fail(r < n_users() ? "user_positions" : "eve_positions",
             "receiver " + std::to_string(r) + " closer than ref_distance to AP " +
                 std::to_string(a));
    }
  }
}

ScenarioConfig ScenarioConfig::default_scenario() {
  ScenarioConfig cfg;
  cfg.ap_positions = {{0.0, 0.0}, {60.0, 0.0}, {0.0, 60.0}};
  cfg.user_positions = {{10.0, 0.0}, {70.0, 0.0}, {0.0, 70.0}};
  cfg.eve_positions = {{20.0, 20.0}, {40.0, 10.0}};
  cfg.user_to_ap = {0, 1, 2};
  return cfg;
}

double path_loss(double d, const ScenarioConfig& cfg) {
  if (!(d >= cfg.ref_distance))
    throw std::domain_error("path_loss: distance " + std::to_string(d) +
                            " below ref_distance");
  return cfg.ref_gain * std::pow(d / cfg.ref_distance, -cfg.path_loss_exponent);
}

double sample_small_scale(Rng& rng) {
  const double re = rng.normal();
  const double im = rng.normal();
  return 0.5 * (re * re + im * im);
}

ChannelRealization path_loss_matrix(const ScenarioConfig& cfg) {
  ChannelRealization ch;
  ch.gains.resize(static_cast<Eigen::Index>(cfg.n_aps()),
                  static_cast<Eigen::Index>(cfg.n_receivers()));
  for (std::size_t a = 0; a < cfg.n_aps(); ++a)
    for (std::size_t r = 0; r < cfg.n_receivers(); ++r)
      ch.gains(a, r) = path_loss(distance(cfg.ap_positions[a], cfg.receiver_position(r)), cfg);
  return ch;
}

ChannelRealization realize_channel(const ScenarioConfig& cfg, Rng& rng, Fading fading) {
  ChannelRealization ch = path_loss_matrix(cfg);
  if (fading == Fading::kNone) return ch;
  // Row-major draw order so the stream layout does not depend on Eigen storage.
  for (Eigen::Index a = 0; a < ch.gains.rows(); ++a)
    for (Eigen::Index r = 0; r < ch.gains.cols(); ++r) ch.gains(a, r) *= sample_small_scale(rng);
  return ch;
}

double sinr(std::size_t receiver, std::size_t serving_ap, std::span<const double> powers,
            const ChannelRealization& ch, const ScenarioConfig& cfg) {
  double interference = 0.0;
  for (std::size_t a = 0; a < powers.size(); ++a)
    if (a != serving_ap) interference += powers[a] * ch.gain(a, receiver);
  return powers[serving_ap] * ch.gain(serving_ap, receiver) / (interference + cfg.noise_power);
}

double shannon_capacity(double s) {
  if (s < 0.0) throw std::domain_error("shannon_capacity: negative SINR");
  return std::log2(1.0 + s);
}

}  // namespace fjam
