#include "fjam/moe.hpp"

#include <stdexcept>

namespace fjam {

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::ArrayXd e = (logits.array() - logits.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

std::size_t argmax_lowest(const Eigen::VectorXd& values) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i)
    if (values(i) > values(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
  return best;
}

MoEActor::MoEActor(int state_dim, int action_dim, std::size_t experts,
                   const std::vector<int>& gate_hidden, const std::vector<int>& denoiser_hidden,
                   const DiffusionSchedule& schedule, int embed_dim, double prior_scale) {
  if (experts < 1) throw std::invalid_argument("moe: at least one expert required");
  std::vector<int> widths{state_dim};
  widths.insert(widths.end(), gate_hidden.begin(), gate_hidden.end());
  widths.push_back(static_cast<int>(experts));
  gate_ = Net(widths, Activation::kRelu, Activation::kIdentity);
  for (std::size_t k = 0; k < experts; ++k)
    experts_.emplace_back(state_dim, action_dim, denoiser_hidden, schedule, embed_dim, prior_scale);
}

Routing MoEActor::route(const Eigen::MatrixXd& states) const {
  Routing r;
  const Eigen::MatrixXd logits = gate_.forward(states);
  r.probs.resize(logits.rows(), logits.cols());
  r.expert.resize(static_cast<std::size_t>(states.cols()));
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    r.probs.col(j) = softmax(logits.col(j));
    r.expert[static_cast<std::size_t>(j)] = forced_ ? *forced_ : argmax_lowest(logits.col(j));
  }
  return r;
}

std::pair<Eigen::VectorXd, std::size_t> MoEActor::sample_action(const Eigen::VectorXd& state,
                                                                Rng& rng) const {
  std::vector<std::size_t> routed;
  Eigen::MatrixXd a = sample_actions(Eigen::MatrixXd(state), rng, &routed);
  return {a.col(0), routed.front()};
}

namespace {

std::vector<std::vector<Eigen::Index>> group_by_expert(const std::vector<std::size_t>& routed,
                                                       std::size_t experts) {
  std::vector<std::vector<Eigen::Index>> groups(experts);
  for (std::size_t j = 0; j < routed.size(); ++j)
    groups.at(routed[j]).push_back(static_cast<Eigen::Index>(j));
  return groups;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(cols[i]);
  return out;
}

}  // namespace

Eigen::MatrixXd MoEActor::sample_actions(const Eigen::MatrixXd& states, Rng& rng,
                                         std::vector<std::size_t>* routed) const {
  const Routing r = route(states);
  const auto groups = group_by_expert(r.expert, experts_.size());
  Eigen::MatrixXd actions(experts_.front().action_dim(), states.cols());
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (groups[k].empty()) continue;
    const Eigen::MatrixXd a = experts_[k].sample_actions(gather(states, groups[k]), rng);
    for (std::size_t i = 0; i < groups[k].size(); ++i)
      actions.col(groups[k][i]) = a.col(static_cast<Eigen::Index>(i));
  }
  if (routed) *routed = r.expert;
  return actions;
}

std::uint64_t MoEActor::denoiser_evaluations() const {
  std::uint64_t n = 0;
  for (const DiffusionPolicy& e : experts_) n += e.denoiser_evaluations();
  return n;
}

GateLoss gate_loss(const Net& gate, const Eigen::MatrixXd& states, const Eigen::MatrixXd& q,
                   double load_balance) {
  ForwardCache cache;
  const Eigen::MatrixXd logits = gate.forward(states, &cache);
  if (q.rows() != logits.rows() || q.cols() != logits.cols())
    throw ShapeError("gate_loss: value matrix shape mismatch");
  const Eigen::Index experts = logits.rows();
  const double batch = static_cast<double>(logits.cols());
  Eigen::MatrixXd probs(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) probs.col(j) = softmax(logits.col(j));

  const Eigen::VectorXd freq = probs.rowwise().mean();
  const Eigen::VectorXd imbalance = freq.array() - 1.0 / static_cast<double>(experts);
  GateLoss out;
  out.loss = -(probs.array() * q.array()).sum() / batch + load_balance * imbalance.squaredNorm();

  // dL/dp then through the softmax Jacobian, column by column.
  Eigen::MatrixXd grad_probs = -q / batch;
  grad_probs.colwise() += (2.0 * load_balance / batch) * imbalance;
  Eigen::MatrixXd grad_logits(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const Eigen::VectorXd p = probs.col(j);
    const double inner = p.dot(grad_probs.col(j));
    grad_logits.col(j) = p.array() * (grad_probs.col(j).array() - inner);
  }
  out.grads = zeros_like(gate.params());
  gate.backward(cache, grad_logits, out.grads);
  return out;
}

MoEUpdate moe_actor_update(const Eigen::MatrixXd& states, const MoEActor& actor,
                           const ActionValue& critic, double load_balance, Rng& rng) {
  const std::size_t experts = actor.expert_count();
  const Routing r = actor.route(states);
  const auto groups = group_by_expert(r.expert, experts);

  MoEUpdate out;
  out.expert_grads.resize(experts);
  out.routed_counts.resize(experts);
  double weighted_loss = 0.0;
  for (std::size_t k = 0; k < experts; ++k) {
    out.routed_counts[k] = groups[k].size();
    if (groups[k].empty()) continue;
    ActorLoss l = actor_loss(gather(states, groups[k]), actor.expert(k), critic, rng);
    weighted_loss += l.loss * static_cast<double>(groups[k].size());
    out.expert_grads[k] = std::move(l.grads);
  }
  out.actor_loss = weighted_loss / static_cast<double>(states.cols());

  if (experts > 1 && !actor.forced_expert()) {
    const ChainNoise noise = actor.expert(0).draw_noise(states.cols(), rng);
    Eigen::MatrixXd q(static_cast<Eigen::Index>(experts), states.cols());
    for (std::size_t k = 0; k < experts; ++k)
      q.row(static_cast<Eigen::Index>(k)) = critic.value(states, actor.expert(k).run_chain(states, noise));
    out.gate = gate_loss(actor.gate(), states, q, load_balance);
  }
  return out;
}

}  // namespace fjam
