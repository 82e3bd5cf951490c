#include <doctest.h>

#include <cmath>
#include <vector>

#include "fjam/env.hpp"
#include "fjam/secrecy.hpp"
#include "helpers.hpp"

using namespace fjam;

namespace {

std::span<const double> view(const std::vector<double>& v) { return {v.data(), v.size()}; }

}  // namespace

TEST_CASE("state dimension for the default scenario") {
  Environment env(ScenarioConfig::default_scenario(), EnvConfig::defaults());
  CHECK(env.state_dim() == 18);
  CHECK(env.action_dim() == 3);
  Rng rng(1);
  const EnvState s = env.reset(rng);
  CHECK(s.dim() == 18);
  CHECK(s.features().size() == 18);
  CHECK(s.step_index == 0);
  CHECK(s.prev_action == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("reset with a fixed seed is reproducible") {
  Environment a(ScenarioConfig::default_scenario(), EnvConfig::defaults());
  Environment b(ScenarioConfig::default_scenario(), EnvConfig::defaults());
  Rng ra(5), rb(5);
  CHECK(a.reset(ra) == b.reset(rb));
}

TEST_CASE("unit fading yields normalized path-loss features") {
  const ScenarioConfig cfg = ScenarioConfig::default_scenario();
  const EnvConfig ec = EnvConfig::defaults();
  Environment env(cfg, ec, Fading::kNone);
  Rng rng(1);
  const EnvState s = env.reset(rng);
  CHECK(s.normalized_gains == normalize_gains(path_loss_matrix(cfg), ec.norm_mu, ec.norm_sigma));
  // The default constants map the analytic gain range onto [-1, 1].
  for (double f : s.normalized_gains) {
    CHECK(f >= -1.0 - 1e-12);
    CHECK(f <= 1.0 + 1e-12);
  }
}

TEST_CASE("gain normalization") {
  ChannelRealization ch;
  ch.gains.resize(1, 3);
  const double mu = -7.0;
  ch.gains << std::pow(10.0, mu), 10.0 * std::pow(10.0, mu), 0.0;
  const auto unit = normalize_gains(ch, mu, 1.0);
  CHECK(std::abs(unit[0]) <= 1e-12);
  const auto f = normalize_gains(ch, mu, 2.5);
  CHECK(testing::close(f[1] - f[0], 1.0 / 2.5));
  CHECK(testing::close(f[2], (std::log10(kGainFloor) - mu) / 2.5));
}

TEST_CASE("zero action earns zero reward") {
  Environment env(ScenarioConfig::default_scenario(), EnvConfig::defaults());
  Rng rng(2);
  const EnvState s = env.reset(rng);
  const StepResult r = env.step(s, view({0.0, 0.0, 0.0}), rng);
  CHECK(r.reward == 0.0);
  CHECK(r.next_state.prev_action == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(r.next_state.step_index == 1);
}

TEST_CASE("reward is evaluated on the current channel") {
  const ScenarioConfig cfg = ScenarioConfig::default_scenario();
  EnvConfig ec = EnvConfig::defaults();
  Environment env(cfg, ec);
  Rng rng(3);
  EnvState s = env.reset(rng);
  for (int i = 0; i < 20; ++i) {
    const ChannelRealization current = env.channel();
    const std::vector<double> a{rng.uniform(), rng.uniform(), rng.uniform()};
    const StepResult r = env.step(s, view(a), rng);
    CHECK(r.reward == reward(PowerAllocation::from_normalized(a, cfg.p_max), current, cfg, 1.0));
    CHECK(env.channel().gains != current.gains);
    s = r.next_state;
  }
}

TEST_CASE("frozen channel, full power reward") {
  ScenarioConfig cfg = ScenarioConfig::default_scenario();
  cfg.p_max = 0.8;
  EnvConfig ec = EnvConfig::defaults();
  ec.freeze_channel = true;
  Environment env(cfg, ec);
  env.set_channel(testing::fixed_channel());
  Rng rng(4);
  const EnvState s = env.reset(rng);
  const StepResult r = env.step(s, view({1.0, 1.0, 1.0}), rng);
  CHECK(r.reward == reward(PowerAllocation({0.8, 0.8, 0.8}), testing::fixed_channel(), cfg, 1.0));
  CHECK(env.channel().gains == testing::fixed_channel().gains);
  env.reset(rng);
  CHECK(env.channel().gains == testing::fixed_channel().gains);
}

TEST_CASE("episodes end after the configured horizon") {
  EnvConfig ec = EnvConfig::defaults();
  ec.episode_length = 7;
  Environment env(ScenarioConfig::default_scenario(), ec);
  Rng rng(5);
  EnvState s = env.reset(rng);
  int steps = 0;
  bool done = false;
  while (!done) {
    REQUIRE(steps < 100);
    const StepResult r = env.step(s, view({0.5, 0.5, 0.5}), rng);
    done = r.done;
    CHECK(r.done == (s.step_index == ec.episode_length - 1));
    s = r.next_state;
    ++steps;
  }
  CHECK(steps == 7);
}

TEST_CASE("step is deterministic in state, action and stream") {
  Environment a(ScenarioConfig::default_scenario(), EnvConfig::defaults());
  Environment b(ScenarioConfig::default_scenario(), EnvConfig::defaults());
  Rng ra(9), rb(9);
  EnvState sa = a.reset(ra), sb = b.reset(rb);
  for (int i = 0; i < 10; ++i) {
    const std::vector<double> act{0.1 * i, 0.05 * i, 0.3};
    const StepResult x = a.step(sa, view(act), ra);
    const StepResult y = b.step(sb, view(act), rb);
    CHECK(x.reward == y.reward);
    CHECK(x.next_state == y.next_state);
    sa = x.next_state;
    sb = y.next_state;
  }
}

TEST_CASE("out-of-range actions are clamped and counted") {
  const ScenarioConfig cfg = ScenarioConfig::default_scenario();
  EnvConfig ec = EnvConfig::defaults();
  ec.freeze_channel = true;
  Environment env(cfg, ec);
  Rng rng(6);
  const EnvState s = env.reset(rng);
  CHECK(env.clamp_events() == 0);
  const StepResult r = env.step(s, view({1.5, -0.2, 0.5}), rng);
  CHECK(env.clamp_events() == 2);
  CHECK(r.next_state.prev_action == std::vector<double>{1.0, 0.0, 0.5});
  CHECK(r.reward == reward(PowerAllocation({1.0, 0.0, 0.5}), env.channel(), cfg, 1.0));
  env.step(s, view({0.0, 1.0, 0.25}), rng);
  CHECK(env.clamp_events() == 2);
  CHECK_THROWS_AS(env.step(s, view({0.5, 0.5}), rng), std::invalid_argument);
}
