#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fjam/critic.hpp"
#include "fjam/diffusion.hpp"
#include "fjam/nn.hpp"
#include "fjam/rng.hpp"

namespace fjam {

// Numerically stable softmax of one logit vector.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
// Index of the largest entry; ties go to the lowest index.
std::size_t argmax_lowest(const Eigen::VectorXd& values);

struct Routing {
  std::vector<std::size_t> expert;  // routed expert per column
  Eigen::MatrixXd probs;            // (K, batch)
};

// Gate over K independent diffusion experts sharing one schedule; each state is
// served by exactly one expert (top-1).
class MoEActor {
 public:
  MoEActor() = default;
  MoEActor(int state_dim, int action_dim, std::size_t experts, const std::vector<int>& gate_hidden,
           const std::vector<int>& denoiser_hidden, const DiffusionSchedule& schedule,
           int embed_dim = 8, double prior_scale = kDefaultPriorScale);

  Routing route(const Eigen::MatrixXd& states) const;

  // Action from the routed expert and that expert's index.
  std::pair<Eigen::VectorXd, std::size_t> sample_action(const Eigen::VectorXd& state,
                                                        Rng& rng) const;
  // Batched version; columns routed independently.
  Eigen::MatrixXd sample_actions(const Eigen::MatrixXd& states, Rng& rng,
                                 std::vector<std::size_t>* routed = nullptr) const;

  std::size_t expert_count() const { return experts_.size(); }
  Net& gate() { return gate_; }
  const Net& gate() const { return gate_; }
  DiffusionPolicy& expert(std::size_t k) { return experts_.at(k); }
  const DiffusionPolicy& expert(std::size_t k) const { return experts_.at(k); }

  // Routes every state to one expert regardless of the gate.
  void force_expert(std::optional<std::size_t> k) { forced_ = k; }
  std::optional<std::size_t> forced_expert() const { return forced_; }

  // Sum of the experts' denoiser evaluation counters; gate passes excluded.
  std::uint64_t denoiser_evaluations() const;

 private:
  Net gate_;
  std::vector<DiffusionPolicy> experts_;
  std::optional<std::size_t> forced_;
};

struct GateLoss {
  double loss = 0.0;
  Params grads;
};

// -mean_s sum_k softmax_k(s) Q_k(s) + lambda * sum_k (f_k - 1/K)^2 with
// f_k = mean_s softmax_k(s). `q` is (K, batch) and treated as constant.
GateLoss gate_loss(const Net& gate, const Eigen::MatrixXd& states, const Eigen::MatrixXd& q,
                   double load_balance);

struct MoEUpdate {
  std::vector<std::optional<Params>> expert_grads;  // engaged only for routed experts
  std::vector<std::size_t> routed_counts;
  double actor_loss = 0.0;  // batch-weighted mean over routed groups
  std::optional<GateLoss> gate;  // absent when K = 1 or the gate is bypassed
};

// Each state trains only its routed expert; the gate learns from the critic's
// value of every expert's action under shared per-state noise.
MoEUpdate moe_actor_update(const Eigen::MatrixXd& states, const MoEActor& actor,
                           const ActionValue& critic, double load_balance, Rng& rng);

}  // namespace fjam
