#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fjam/critic.hpp"
#include "fjam/nn.hpp"
#include "fjam/rng.hpp"

namespace fjam {

// Noise schedule indexed by t = 1..T; alpha_bar(0) = 1.
class DiffusionSchedule {
 public:
  DiffusionSchedule() = default;
  explicit DiffusionSchedule(std::vector<double> betas);

  // Betas evenly spaced from beta_min (t = 1) to beta_max (t = T).
  static DiffusionSchedule linear(int steps, double beta_min, double beta_max);

  int steps() const { return static_cast<int>(betas_.size()); }
  double beta(int t) const { return betas_.at(static_cast<std::size_t>(t - 1)); }
  double alpha(int t) const { return 1.0 - beta(t); }
  double alpha_bar(int t) const;

 private:
  std::vector<double> betas_;
  std::vector<double> alpha_bars_;
};

// sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * eps. Throws std::domain_error
// unless 1 <= t <= T.
Eigen::MatrixXd forward_diffuse(const Eigen::MatrixXd& x0, int t, const Eigen::MatrixXd& eps,
                                const DiffusionSchedule& sched);

// (x_t - beta / sqrt(1 - alpha_bar) * eps_hat) / sqrt(alpha).
Eigen::MatrixXd reverse_mean(const Eigen::MatrixXd& x_t, const Eigen::MatrixXd& eps_hat,
                             double alpha, double beta, double alpha_bar);
// Posterior-mean reverse update plus sigma_t * z with sigma_t^2 = beta_t.
Eigen::MatrixXd reverse_update(const Eigen::MatrixXd& x_t, const Eigen::MatrixXd& eps_hat, int t,
                               const DiffusionSchedule& sched, const Eigen::MatrixXd& z);

// Sinusoidal features of t / T.
Eigen::VectorXd time_embedding(int t, int steps, int dim);

// (tanh(x) + 1) / 2, mapping the chain output into [0, 1].
Eigen::MatrixXd squash(const Eigen::MatrixXd& x);

// Default standard deviation of the clean-action prior built into the denoiser.
inline constexpr double kDefaultPriorScale = 0.1;

// Every random draw of one reverse chain over a batch.
struct ChainNoise {
  Eigen::MatrixXd x_T;           // (action_dim, batch)
  std::vector<Eigen::MatrixXd> z;  // z[t] for t = 2..T; z[0], z[1] unused
};

// Per-step record of a reverse chain, enough to backpropagate through it.
struct ChainTape {
  std::vector<ForwardCache> caches;  // caches[t] for t = 1..T
  Eigen::MatrixXd x0;                // pre-squash output
  Eigen::MatrixXd actions;
};

// State-conditioned denoiser producing actions by reverse diffusion.
class DiffusionPolicy {
 public:
  DiffusionPolicy() = default;
  DiffusionPolicy(int state_dim, int action_dim, const std::vector<int>& hidden,
                  DiffusionSchedule schedule, int embed_dim = 8,
                  double prior_scale = kDefaultPriorScale);

  // Standard init with a zeroed output layer, so an untrained policy is the
  // exact denoiser of the prior and its samples stay near x0 = 0.
  void init(Rng& rng);

  // Predicted noise at step t: the network output plus c_t * x_t, where
  // c_t * x_t = E[eps | x_t] when the clean action is N(0, prior_scale^2).
  // The network learns a correction to that prior.
  Eigen::MatrixXd predict_noise(const Eigen::MatrixXd& x_t, int t, const Eigen::MatrixXd& states,
                                ForwardCache* cache = nullptr) const;

  // One reverse step; draws z from `rng` only when t > 1.
  Eigen::MatrixXd reverse_step(const Eigen::MatrixXd& x_t, int t, const Eigen::MatrixXd& states,
                               Rng& rng) const;

  ChainNoise draw_noise(Eigen::Index batch, Rng& rng) const;

  // Full reverse chain from x_T with the given draws; squashed actions.
  Eigen::MatrixXd run_chain(const Eigen::MatrixXd& states, const ChainNoise& noise,
                            ChainTape* tape = nullptr) const;

  // Accumulates denoiser gradients of sum <actions, grad_actions>.
  void backward_chain(const ChainTape& tape, const Eigen::MatrixXd& grad_actions,
                      Params& grads) const;

  Eigen::MatrixXd sample_actions(const Eigen::MatrixXd& states, Rng& rng) const;
  Eigen::VectorXd sample_action(const Eigen::VectorXd& state, Rng& rng) const;

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  int embed_dim() const { return embed_dim_; }
  double prior_scale() const { return prior_scale_; }
  const DiffusionSchedule& schedule() const { return schedule_; }
  Net& denoiser() { return denoiser_; }
  const Net& denoiser() const { return denoiser_; }

  // Number of per-sample denoiser evaluations so far (instrumentation).
  std::uint64_t denoiser_evaluations() const { return evaluations_; }

 private:
  double skip_coef(int t) const;

  int state_dim_ = 0;
  int action_dim_ = 0;
  int embed_dim_ = 8;
  double prior_scale_ = kDefaultPriorScale;
  DiffusionSchedule schedule_;
  Net denoiser_;
  mutable std::uint64_t evaluations_ = 0;
};

struct ActorLoss {
  double loss = 0.0;
  Params grads;
};

// -mean_b Q(s_b, a_b) for actions from the reparameterized chain, with
// gradients through every reverse step into the denoiser.
ActorLoss actor_loss(const Eigen::MatrixXd& states, const DiffusionPolicy& policy,
                     const ActionValue& critic, const ChainNoise& noise);
ActorLoss actor_loss(const Eigen::MatrixXd& states, const DiffusionPolicy& policy,
                     const ActionValue& critic, Rng& rng);

}  // namespace fjam
