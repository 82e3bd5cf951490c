#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fjam/channel.hpp"
#include "fjam/critic.hpp"
#include "fjam/diffusion.hpp"
#include "fjam/env.hpp"
#include "fjam/moe.hpp"
#include "fjam/nn.hpp"
#include "fjam/replay.hpp"
#include "fjam/rng.hpp"

namespace fjam {

enum class Algorithm { kMoeGdm, kGdm, kDdpg };

std::string to_string(Algorithm algo);
Algorithm algorithm_from_string(const std::string& name);

// Routed-expert columns in the CSV schema.
inline constexpr std::size_t kMaxLoggedExperts = 3;

struct NetworkConfig {
  std::vector<int> critic_hidden{64, 64};
  std::vector<int> denoiser_hidden{64, 64};
  std::vector<int> gate_hidden{32};
  std::vector<int> actor_hidden{64, 64};
  bool operator==(const NetworkConfig&) const = default;
};

struct DiffusionConfig {
  int steps = 5;
  double beta_min = 0.01;
  double beta_max = 0.7;
  int time_embed_dim = 8;
  double prior_scale = kDefaultPriorScale;
  DiffusionSchedule schedule() const {
    return DiffusionSchedule::linear(steps, beta_min, beta_max);
  }
  bool operator==(const DiffusionConfig&) const = default;
};

struct MoeConfig {
  std::size_t experts = 3;
  double load_balance = 0.01;
  bool fixed_routing = false;  // bypass the gate and always use fixed_expert
  std::size_t fixed_expert = 0;
  bool operator==(const MoeConfig&) const = default;
};

struct TrainConfig {
  std::size_t episodes = 2000;
  double gamma = 0.95;
  double tau = 0.005;
  std::size_t batch_size = 64;
  double lr_actor = 1e-4;
  double lr_critic = 1e-3;
  double lr_gate = 1e-4;
  std::size_t buffer_capacity = 100000;
  std::size_t warmup_steps = 1000;
  std::size_t updates_per_step = 1;
  double explore_sigma_start = 0.2;
  double explore_sigma_end = 0.02;
  std::uint64_t seed = 1;
  bool operator==(const TrainConfig&) const = default;
};

struct AgentConfig {
  NetworkConfig network;
  DiffusionConfig diffusion;
  MoeConfig moe;
  TrainConfig train;
};

// Throws std::invalid_argument naming the offending key.
void validate(const AgentConfig& cfg, std::size_t episode_length);

struct RunRecord {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::size_t episode = 0;
  double mean_reward = 0.0;
  double mean_sr_sum = 0.0;
  double mean_see_sum = 0.0;
  std::array<std::uint64_t, kMaxLoggedExperts> expert_histogram{};
  bool operator==(const RunRecord&) const = default;
};

// r if done, else r + gamma * q_next.
double td_target(double reward, bool done, double q_next, double gamma);
Eigen::RowVectorXd td_targets(const Eigen::RowVectorXd& rewards, const Eigen::RowVectorXd& dones,
                              const Eigen::RowVectorXd& q_next, double gamma);

struct LossAndGrads {
  double loss = 0.0;
  Params grads;
};

// mean_b (Q(s_b, a_b) - y_b)^2.
LossAndGrads critic_loss(const Net& critic, const Eigen::MatrixXd& states,
                         const Eigen::MatrixXd& actions, const Eigen::RowVectorXd& targets);

// Deterministic actor with a tanh head mapped to [0,1].
Eigen::MatrixXd ddpg_actions(const Net& actor, const Eigen::MatrixXd& states);
// -mean_b Q(s_b, actor(s_b)).
LossAndGrads ddpg_actor_loss(const Net& actor, const Eigen::MatrixXd& states,
                             const ActionValue& critic);

struct UpdateLosses {
  double critic = 0.0;
  double actor = 0.0;
  double gate = 0.0;
};

// One learner: online/target networks plus their optimizers.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual Algorithm algorithm() const = 0;
  // Normalized action in [0,1]^n before exploration noise; expert index for MoE.
  virtual std::pair<Eigen::VectorXd, std::optional<std::size_t>> act(const Eigen::VectorXd& state,
                                                                     Rng& rng) const = 0;
  // Critic, actor (and gate) step followed by target soft updates.
  virtual UpdateLosses update(const Batch& batch, Rng& rng) = 0;

  virtual bool parameters_finite() const = 0;
  // Per-sample denoiser evaluations issued so far by every diffusion policy the
  // agent owns (online and target); the trainer attributes deltas around act().
  virtual std::uint64_t denoiser_evaluations() const { return 0; }

  virtual void save(std::ostream& os) const = 0;
};

std::unique_ptr<Agent> make_agent(Algorithm algo, const AgentConfig& cfg, int state_dim,
                                  int action_dim);
// Reads a checkpoint written by Agent::save.
std::unique_ptr<Agent> load_agent(std::istream& is);

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::uint64_t seed, std::uint64_t step)
      : std::runtime_error(what + " (seed " + std::to_string(seed) + ", step " +
                           std::to_string(step) + ")"),
        seed_(seed),
        step_(step) {}
  std::uint64_t seed() const { return seed_; }
  std::uint64_t step() const { return step_; }

 private:
  std::uint64_t seed_;
  std::uint64_t step_;
};

struct RunStats {
  std::uint64_t env_steps = 0;
  std::uint64_t updates = 0;
  std::uint64_t clamp_events = 0;
  std::uint64_t acting_denoiser_evaluations = 0;
  std::uint64_t out_of_box_actions = 0;  // executed actions outside [0,1] (should stay 0)
};

struct RunResult {
  std::vector<RunRecord> records;
  RunStats stats;
  std::unique_ptr<Agent> agent;
  ChannelRealization last_channel;
};

// Linearly decayed exploration scale for global step `step` of `total`.
double exploration_sigma(const TrainConfig& cfg, std::uint64_t step, std::uint64_t total);

// Channel the environment starts from for a given run seed; with a frozen
// channel this is the realization every episode of that run sees.
ChannelRealization initial_channel(const ScenarioConfig& scenario, std::uint64_t seed);

// Runs every episode; emits one record per episode through `on_record`.
// Throws DivergenceError on non-finite losses or parameters.
RunResult train(Algorithm algo, const AgentConfig& cfg, const ScenarioConfig& scenario,
                const EnvConfig& env_cfg,
                const std::function<void(const RunRecord&)>& on_record = {});

}  // namespace fjam
