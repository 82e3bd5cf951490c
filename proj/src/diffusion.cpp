#include "fjam/diffusion.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fjam {

DiffusionSchedule::DiffusionSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  if (betas_.empty()) throw std::invalid_argument("diffusion: at least one step required");
  double prod = 1.0;
  for (std::size_t i = 0; i < betas_.size(); ++i) {
    if (!(betas_[i] > 0.0 && betas_[i] < 1.0))
      throw std::invalid_argument("diffusion: beta must lie in (0, 1)");
    if (i > 0 && !(betas_[i] > betas_[i - 1]))
      throw std::invalid_argument("diffusion: betas must be increasing");
    prod *= 1.0 - betas_[i];
    alpha_bars_.push_back(prod);
  }
}

DiffusionSchedule DiffusionSchedule::linear(int steps, double beta_min, double beta_max) {
  if (steps < 1) throw std::invalid_argument("diffusion: steps must be >= 1");
  std::vector<double> betas(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i)
    betas[static_cast<std::size_t>(i)] =
        steps == 1 ? beta_min : beta_min + (beta_max - beta_min) * i / (steps - 1);
  return DiffusionSchedule(std::move(betas));
}

double DiffusionSchedule::alpha_bar(int t) const {
  if (t == 0) return 1.0;
  return alpha_bars_.at(static_cast<std::size_t>(t - 1));
}

Eigen::MatrixXd forward_diffuse(const Eigen::MatrixXd& x0, int t, const Eigen::MatrixXd& eps,
                                const DiffusionSchedule& sched) {
  if (t < 1 || t > sched.steps())
    throw std::domain_error("forward_diffuse: step " + std::to_string(t) + " out of range");
  const double ab = sched.alpha_bar(t);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

Eigen::MatrixXd reverse_mean(const Eigen::MatrixXd& x_t, const Eigen::MatrixXd& eps_hat,
                             double alpha, double beta, double alpha_bar) {
  return (x_t - (beta / std::sqrt(1.0 - alpha_bar)) * eps_hat) / std::sqrt(alpha);
}

Eigen::MatrixXd reverse_update(const Eigen::MatrixXd& x_t, const Eigen::MatrixXd& eps_hat, int t,
                               const DiffusionSchedule& sched, const Eigen::MatrixXd& z) {
  if (t < 1 || t > sched.steps())
    throw std::domain_error("reverse_update: step " + std::to_string(t) + " out of range");
  const double beta = sched.beta(t);
  Eigen::MatrixXd out = reverse_mean(x_t, eps_hat, sched.alpha(t), beta, sched.alpha_bar(t));
  if (t > 1) out += std::sqrt(beta) * z;
  return out;
}

Eigen::VectorXd time_embedding(int t, int steps, int dim) {
  Eigen::VectorXd e(dim);
  const double tau = static_cast<double>(t) / steps;
  for (int i = 0; i < dim; ++i) {
    const double freq = 0.5 * std::numbers::pi * std::pow(2.0, i / 2);
    e(i) = (i % 2 == 0) ? std::sin(freq * tau) : std::cos(freq * tau);
  }
  return e;
}

Eigen::MatrixXd squash(const Eigen::MatrixXd& x) {
  return ((x.array().tanh() + 1.0) * 0.5).matrix();
}

DiffusionPolicy::DiffusionPolicy(int state_dim, int action_dim, const std::vector<int>& hidden,
                                 DiffusionSchedule schedule, int embed_dim, double prior_scale)
    : state_dim_(state_dim), action_dim_(action_dim), embed_dim_(embed_dim),
      prior_scale_(prior_scale), schedule_(std::move(schedule)) {
  if (!(prior_scale > 0.0)) throw std::invalid_argument("diffusion: prior_scale must be > 0");
  std::vector<int> widths{action_dim + embed_dim + state_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(action_dim);
  denoiser_ = Net(widths, Activation::kRelu, Activation::kIdentity);
}

Eigen::MatrixXd DiffusionPolicy::predict_noise(const Eigen::MatrixXd& x_t, int t,
                                               const Eigen::MatrixXd& states,
                                               ForwardCache* cache) const {
  if (x_t.rows() != action_dim_ || states.rows() != state_dim_ || x_t.cols() != states.cols())
    throw ShapeError("predict_noise: input shape mismatch");
  Eigen::MatrixXd in(action_dim_ + embed_dim_ + state_dim_, x_t.cols());
  in.topRows(action_dim_) = x_t;
  in.middleRows(action_dim_, embed_dim_).colwise() = time_embedding(t, schedule_.steps(), embed_dim_);
  in.bottomRows(state_dim_) = states;
  evaluations_ += static_cast<std::uint64_t>(x_t.cols());
  return denoiser_.forward(in, cache) + skip_coef(t) * x_t;
}

double DiffusionPolicy::skip_coef(int t) const {
  const double ab = schedule_.alpha_bar(t);
  return std::sqrt(1.0 - ab) / (ab * prior_scale_ * prior_scale_ + 1.0 - ab);
}

void DiffusionPolicy::init(Rng& rng) {
  denoiser_.init(rng);
  denoiser_.params().back().weight.setZero();
  denoiser_.params().back().bias.setZero();
}

Eigen::MatrixXd DiffusionPolicy::reverse_step(const Eigen::MatrixXd& x_t, int t,
                                              const Eigen::MatrixXd& states, Rng& rng) const {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(x_t.rows(), x_t.cols());
  if (t > 1)
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = rng.normal();
  return reverse_update(x_t, predict_noise(x_t, t, states), t, schedule_, z);
}

ChainNoise DiffusionPolicy::draw_noise(Eigen::Index batch, Rng& rng) const {
  auto gaussian = [&]() {
    Eigen::MatrixXd m(action_dim_, batch);
    for (Eigen::Index j = 0; j < batch; ++j)
      for (Eigen::Index i = 0; i < action_dim_; ++i) m(i, j) = rng.normal();
    return m;
  };
  ChainNoise noise;
  noise.x_T = gaussian();
  noise.z.resize(static_cast<std::size_t>(schedule_.steps()) + 1);
  for (int t = schedule_.steps(); t > 1; --t) noise.z[static_cast<std::size_t>(t)] = gaussian();
  return noise;
}

Eigen::MatrixXd DiffusionPolicy::run_chain(const Eigen::MatrixXd& states, const ChainNoise& noise,
                                           ChainTape* tape) const {
  const int steps = schedule_.steps();
  if (tape) tape->caches.assign(static_cast<std::size_t>(steps) + 1, ForwardCache{});
  Eigen::MatrixXd x = noise.x_T;
  const Eigen::MatrixXd no_noise;
  for (int t = steps; t >= 1; --t) {
    ForwardCache* cache = tape ? &tape->caches[static_cast<std::size_t>(t)] : nullptr;
    const Eigen::MatrixXd eps_hat = predict_noise(x, t, states, cache);
    x = reverse_update(x, eps_hat, t, schedule_, t > 1 ? noise.z[static_cast<std::size_t>(t)] : no_noise);
  }
  Eigen::MatrixXd actions = squash(x);
  if (tape) {
    tape->x0 = x;
    tape->actions = actions;
  }
  return actions;
}

void DiffusionPolicy::backward_chain(const ChainTape& tape, const Eigen::MatrixXd& grad_actions,
                                     Params& grads) const {
  const int steps = schedule_.steps();
  if (tape.caches.size() != static_cast<std::size_t>(steps) + 1)
    throw ShapeError("backward_chain: tape does not match schedule");
  // d a / d x0 = (1 - tanh^2) / 2 = 2u / (1 + u)^2 with u = exp(-2|x0|), exact even where a rounds to 0 or 1
  const Eigen::ArrayXXd u = (-2.0 * tape.x0.array().abs()).exp();
  Eigen::MatrixXd g = (grad_actions.array() * 2.0 * u / (1.0 + u).square()).matrix();
  for (int t = 1; t <= steps; ++t) {
    const double scale = 1.0 / std::sqrt(schedule_.alpha(t));
    const double eps_coef = schedule_.beta(t) / std::sqrt(1.0 - schedule_.alpha_bar(t));
    const Eigen::MatrixXd grad_eps = -scale * eps_coef * g;
    const Eigen::MatrixXd grad_in =
        denoiser_.backward(tape.caches[static_cast<std::size_t>(t)], grad_eps, grads);
    g = scale * g + grad_in.topRows(action_dim_) + skip_coef(t) * grad_eps;
  }
}

Eigen::MatrixXd DiffusionPolicy::sample_actions(const Eigen::MatrixXd& states, Rng& rng) const {
  return run_chain(states, draw_noise(states.cols(), rng));
}

Eigen::VectorXd DiffusionPolicy::sample_action(const Eigen::VectorXd& state, Rng& rng) const {
  return sample_actions(Eigen::MatrixXd(state), rng).col(0);
}

ActorLoss actor_loss(const Eigen::MatrixXd& states, const DiffusionPolicy& policy,
                     const ActionValue& critic, const ChainNoise& noise) {
  ChainTape tape;
  const Eigen::MatrixXd actions = policy.run_chain(states, noise, &tape);
  const double batch = static_cast<double>(states.cols());
  ActorLoss out;
  out.loss = -critic.value(states, actions).sum() / batch;
  out.grads = zeros_like(policy.denoiser().params());
  const Eigen::MatrixXd grad_actions = -critic.action_gradient(states, actions) / batch;
  policy.backward_chain(tape, grad_actions, out.grads);
  return out;
}

ActorLoss actor_loss(const Eigen::MatrixXd& states, const DiffusionPolicy& policy,
                     const ActionValue& critic, Rng& rng) {
  return actor_loss(states, policy, critic, policy.draw_noise(states.cols(), rng));
}

}  // namespace fjam
