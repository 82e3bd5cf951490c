#include <doctest.h>

#include <algorithm>
#include <vector>

#include "fjam/oracle.hpp"
#include "fjam/rng.hpp"
#include "fjam/trainer.hpp"

using namespace fjam;

namespace {

ScenarioConfig single_link() {
  ScenarioConfig s;
  s.ap_positions = {{0, 0}};
  s.user_positions = {{10, 0}};
  s.user_to_ap = {0};
  return s;
}

ScenarioConfig eve_dominated() {
  ScenarioConfig s = single_link();
  s.eve_positions = {{2, 0}};
  return s;
}

ChannelRealization unit_fading(const ScenarioConfig& s) {
  Rng rng(0);
  return realize_channel(s, rng, Fading::kNone);
}

}  // namespace

TEST_CASE("single link without the EE term wants full power") {
  const ScenarioConfig s = single_link();
  const OracleResult r = grid_search(unit_fading(s), s, 0.0, 11);
  REQUIRE(r.best_allocation.size() == 1);
  CHECK(r.best_allocation[0] == s.p_max);
  CHECK(r.evaluations == 11);
}

TEST_CASE("a closer eavesdropper makes every allocation worthless") {
  const ScenarioConfig s = eve_dominated();
  const ChannelRealization ch = unit_fading(s);
  const OracleResult r = grid_search(ch, s, 1.0, 21);
  CHECK(r.best_reward == 0.0);
  CHECK(r.best_allocation[0] == 0.0);
  const std::vector<double> half{0.5};
  const PolicyGap gap = allocation_gap(half, ch, s, 1.0, 21);
  CHECK(gap.degenerate());
}

TEST_CASE("default grid matches a direct enumeration") {
  const ScenarioConfig s = ScenarioConfig::default_scenario();
  const ChannelRealization ch = initial_channel(s, 1);
  const OracleResult r = grid_search(ch, s, 1.0, 21);
  CHECK(r.evaluations == 9261);

  double best = -1.0;
  std::vector<double> arg;
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j)
      for (int k = 0; k <= 20; ++k) {
        const std::vector<double> w{i / 20.0, j / 20.0, k / 20.0};
        const double v = evaluate_secrecy(PowerAllocation(w), ch, s, 1.0).reward;
        if (v > best) {
          best = v;
          arg = w;
        }
      }
  CHECK(r.best_reward == best);
  for (std::size_t a = 0; a < 3; ++a) CHECK(r.best_allocation[a] == doctest::Approx(arg[a]).epsilon(1e-15));
}

TEST_CASE("nested grids never get worse") {
  const ScenarioConfig s = ScenarioConfig::default_scenario();
  const ChannelRealization ch = initial_channel(s, 2);
  const double r5 = grid_search(ch, s, 1.0, 5).best_reward;
  const double r11 = grid_search(ch, s, 1.0, 11).best_reward;
  const double r21 = grid_search(ch, s, 1.0, 21).best_reward;
  CHECK(r11 >= r5);
  CHECK(r21 >= r11);
}

TEST_CASE("budget and resolution limits") {
  const ScenarioConfig s = ScenarioConfig::default_scenario();
  const ChannelRealization ch = initial_channel(s, 1);
  CHECK_THROWS_AS(grid_search(ch, s, 1.0, 21, 9260), BudgetError);
  CHECK_NOTHROW(grid_search(ch, s, 1.0, 21, 9261));
  CHECK_THROWS_AS(grid_search(ch, s, 1.0, 1), std::invalid_argument);
}

TEST_CASE("allocation gap of the optimum is one and of silence is zero") {
  const ScenarioConfig s = ScenarioConfig::default_scenario();
  const ChannelRealization ch = initial_channel(s, 3);
  const OracleResult r = grid_search(ch, s, 1.0, 11);
  std::vector<double> best(r.best_allocation.watts().begin(), r.best_allocation.watts().end());
  for (double& w : best) w /= s.p_max;
  const PolicyGap self = allocation_gap(best, ch, s, 1.0, 11);
  REQUIRE(!self.degenerate());
  CHECK(*self.ratio == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> zeros(3, 0.0);
  CHECK(*allocation_gap(zeros, ch, s, 1.0, 11).ratio == 0.0);
}

TEST_CASE("grid result does not depend on AP order") {
  ScenarioConfig s = ScenarioConfig::default_scenario();
  const ChannelRealization ch = initial_channel(s, 4);
  const double forward = grid_search(ch, s, 1.0, 11).best_reward;

  ScenarioConfig rev = s;
  std::reverse(rev.ap_positions.begin(), rev.ap_positions.end());
  for (std::size_t& a : rev.user_to_ap) a = s.n_aps() - 1 - a;
  ChannelRealization rch;
  rch.gains = ch.gains.colwise().reverse();
  CHECK(grid_search(rch, rev, 1.0, 11).best_reward == doctest::Approx(forward).epsilon(1e-12));
}
