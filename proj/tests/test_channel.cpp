#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fjam/channel.hpp"
#include "fjam/rng.hpp"
#include "helpers.hpp"

using namespace fjam;

namespace {

ScenarioConfig single_link(double p_max = 1.0, double noise = 1.0) {
  ScenarioConfig s;
  s.ap_positions = {{0, 0}};
  s.user_positions = {{1, 0}};
  s.user_to_ap = {0};
  s.p_max = p_max;
  s.noise_power = noise;
  return s;
}

}  // namespace

TEST_CASE("path loss at the reference distance equals the reference gain") {
  ScenarioConfig cfg = ScenarioConfig::default_scenario();
  CHECK(path_loss(1.0, cfg) == 1e-3);
}

TEST_CASE("path loss over a decade falls by the exponent") {
  ScenarioConfig cfg = ScenarioConfig::default_scenario();
  CHECK(testing::close(path_loss(10.0, cfg), 1e-6));
  cfg.path_loss_exponent = 2.0;
  cfg.ref_gain = 1.0;
  CHECK(testing::close(path_loss(2.0, cfg), 0.25));
}

TEST_CASE("path loss rejects distances inside the reference radius") {
  ScenarioConfig cfg = ScenarioConfig::default_scenario();
  CHECK_THROWS_AS(path_loss(0.5, cfg), std::domain_error);
}

TEST_CASE("path loss is positive and strictly decreasing") {
  ScenarioConfig cfg = ScenarioConfig::default_scenario();
  for (double alpha : {2.0, 2.5, 3.0, 4.0}) {
    cfg.path_loss_exponent = alpha;
    double prev = path_loss(1.0, cfg);
    for (double d = 1.5; d < 500.0; d *= 1.5) {
      const double g = path_loss(d, cfg);
      CHECK(g > 0.0);
      CHECK(g < prev);
      prev = g;
    }
  }
}

TEST_CASE("small-scale fading is unit-mean exponential") {
  Rng rng(2024);
  const int n = 1'000'000;
  double sum = 0.0, sum_sq = 0.0;
  int below_one = 0;
  for (int i = 0; i < n; ++i) {
    const double g = sample_small_scale(rng);
    REQUIRE(g >= 0.0);
    sum += g;
    sum_sq += g * g;
    below_one += g <= 1.0;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean - 1.0) <= 0.01);
  CHECK(std::abs(var - 1.0) <= 0.02);
  CHECK(std::abs(static_cast<double>(below_one) / n - (1.0 - std::exp(-1.0))) <= 0.005);
}

TEST_CASE("unit fading reproduces the path-loss matrix") {
  const ScenarioConfig cfg = ScenarioConfig::default_scenario();
  Rng rng(1);
  const ChannelRealization ch = realize_channel(cfg, rng, Fading::kNone);
  const ChannelRealization pl = path_loss_matrix(cfg);
  REQUIRE(ch.gains.rows() == 3);
  REQUIRE(ch.gains.cols() == 5);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t r = 0; r < 5; ++r) {
      const double d = distance(cfg.ap_positions[a], cfg.receiver_position(r));
      CHECK(ch.gain(a, r) == path_loss(d, cfg));
      CHECK(pl.gain(a, r) == path_loss(d, cfg));
    }
}

TEST_CASE("average realized gain matches path loss") {
  const ScenarioConfig cfg = ScenarioConfig::default_scenario();
  Rng rng(99);
  const int n = 200'000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(3, 5);
  for (int i = 0; i < n; ++i) acc += realize_channel(cfg, rng).gains;
  acc /= n;
  const Eigen::MatrixXd pl = path_loss_matrix(cfg).gains;
  for (Eigen::Index a = 0; a < 3; ++a)
    for (Eigen::Index r = 0; r < 5; ++r) CHECK(std::abs(acc(a, r) / pl(a, r) - 1.0) <= 0.01);
}

TEST_CASE("identical seeds give identical channels") {
  const ScenarioConfig cfg = ScenarioConfig::default_scenario();
  Rng a(7), b(7), c(8);
  const auto ca = realize_channel(cfg, a);
  CHECK(ca.gains == realize_channel(cfg, b).gains);
  CHECK(ca.gains != realize_channel(cfg, c).gains);
}

TEST_CASE("sinr without interference is the SNR") {
  const ScenarioConfig cfg = single_link();
  ChannelRealization ch;
  ch.gains = Eigen::MatrixXd::Constant(1, 1, 1.0);
  const std::vector<double> p{1.0};
  CHECK(sinr(0, 0, p, ch, cfg) == 1.0);
}

TEST_CASE("sinr divides signal by interference plus noise") {
  ScenarioConfig cfg = single_link(2.0, 1.0);
  cfg.ap_positions.push_back({5, 5});
  ChannelRealization ch;
  ch.gains = Eigen::MatrixXd::Ones(2, 1);
  const std::vector<double> p{2.0, 1.0};
  CHECK(sinr(0, 0, p, ch, cfg) == 1.0);
}

TEST_CASE("sinr on a fixed three-AP channel matches a scalar evaluation") {
  const ScenarioConfig cfg = ScenarioConfig::default_scenario();
  const ChannelRealization ch = testing::fixed_channel();
  const std::vector<double> p{0.8, 0.3, 0.55};
  const double noise = cfg.noise_power;
  // receiver 1 (user 1) served by AP 1
  const double user1 = 0.3 * 1.2e-6 / (0.8 * 3.0e-9 + 0.55 * 1.0e-9 + noise);
  CHECK(testing::close(sinr(1, 1, p, ch, cfg), user1));
  // eavesdropper 0 (receiver 3) listening to AP 2
  const double eve0 = 0.55 * 2.5e-8 / (0.8 * 4.0e-8 + 0.3 * 6.0e-9 + noise);
  CHECK(testing::close(sinr(3, 2, p, ch, cfg), eve0));
  // eavesdropper 1 (receiver 4) listening to AP 0
  const double eve1 = 0.8 * 1.0e-8 / (0.3 * 3.0e-8 + 0.55 * 7.0e-9 + noise);
  CHECK(testing::close(sinr(4, 0, p, ch, cfg), eve1));
}

TEST_CASE("sinr is invariant to jointly scaling powers and noise") {
  ScenarioConfig cfg = ScenarioConfig::default_scenario();
  const ChannelRealization ch = testing::fixed_channel();
  const std::vector<double> p{0.8, 0.3, 0.55};
  for (double c : {0.01, 0.5, 3.0, 1e4}) {
    ScenarioConfig scaled = cfg;
    scaled.noise_power = c * cfg.noise_power;
    const std::vector<double> cp{c * p[0], c * p[1], c * p[2]};
    for (std::size_t r = 0; r < 5; ++r)
      for (std::size_t a = 0; a < 3; ++a)
        CHECK(testing::close(sinr(r, a, cp, ch, scaled), sinr(r, a, p, ch, cfg), 1e-12));
  }
}

TEST_CASE("raising an interferer never raises sinr") {
  const ScenarioConfig cfg = ScenarioConfig::default_scenario();
  const ChannelRealization ch = testing::fixed_channel();
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t serving = 0; serving < 3; ++serving)
      for (std::size_t other = 0; other < 3; ++other) {
        if (other == serving) continue;
        std::vector<double> p{0.4, 0.4, 0.4};
        double prev = sinr(r, serving, p, ch, cfg);
        for (double q = 0.5; q <= 1.0; q += 0.1) {
          p[other] = q;
          const double s = sinr(r, serving, p, ch, cfg);
          CHECK(s <= prev);
          prev = s;
        }
      }
}

TEST_CASE("shannon capacity") {
  CHECK(shannon_capacity(0.0) == 0.0);
  CHECK(shannon_capacity(1.0) == 1.0);
  CHECK(shannon_capacity(3.0) == 2.0);
  CHECK_THROWS_AS(shannon_capacity(-0.1), std::domain_error);
  double prev = 0.0;
  for (double s = 0.1; s < 1e6; s *= 3.0) {
    CHECK(shannon_capacity(s) > prev);
    prev = shannon_capacity(s);
  }
}

TEST_CASE("scenario validation names the offending field") {
  ScenarioConfig cfg = ScenarioConfig::default_scenario();
  CHECK_NOTHROW(cfg.validate());
  cfg.p_max = -1.0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("p_max"), std::invalid_argument);
  cfg = ScenarioConfig::default_scenario();
  cfg.path_loss_exponent = 1.5;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("path_loss_exponent"),
                       std::invalid_argument);
  cfg = ScenarioConfig::default_scenario();
  cfg.eve_positions[0] = cfg.ap_positions[1];
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ScenarioConfig::default_scenario();
  cfg.user_to_ap = {0, 1};
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("user_to_ap"), std::invalid_argument);
}

TEST_CASE("default scenario layout") {
  const ScenarioConfig cfg = ScenarioConfig::default_scenario();
  CHECK(cfg.n_aps() == 3);
  CHECK(cfg.n_users() == 3);
  CHECK(cfg.n_eves() == 2);
  for (std::size_t u = 0; u < 3; ++u)
    CHECK(distance(cfg.user_positions[u], cfg.ap_positions[cfg.user_to_ap[u]]) == 10.0);
}
