#include "fjam/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "fjam/critic.hpp"
#include "fjam/diffusion.hpp"
#include "fjam/format.hpp"
#include "fjam/moe.hpp"
#include "fjam/rng.hpp"

namespace fjam {

bool GradcheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed(); });
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double central(double& slot, const std::function<double()>& f, double step) {
  const double saved = slot;
  slot = saved + step;
  const double plus = f();
  slot = saved - step;
  const double minus = f();
  slot = saved;
  return (plus - minus) / (2.0 * step);
}

template <typename Derived>
double check_block(Eigen::MatrixBase<Derived>& x, const Eigen::MatrixXd& grad,
                   const std::function<double()>& f, double step, double floor,
                   std::size_t* coordinates) {
  if (x.rows() != grad.rows() || x.cols() != grad.cols())
    throw ShapeError("gradcheck: gradient shape does not match parameters");
  double worst = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double numeric = central(x(i, j), f, step);
      worst = std::max(worst, relative_error(grad(i, j), numeric, floor));
      if (coordinates) ++*coordinates;
    }
  return worst;
}

// Random parameters with nonzero biases so every unit sees a generic offset.
void randomize(Net& net, Rng& rng) {
  net.init(rng);
  for (Layer& l : net.params())
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = 0.1 * rng.normal();
}

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

Eigen::MatrixXd uniform01(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform();
  return m;
}

std::vector<int> widths(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

class Accumulator {
 public:
  Accumulator(std::string name, double tol) { e_.name = std::move(name); e_.tolerance = tol; }
  void add(double err) { e_.max_relative_error = std::max(e_.max_relative_error, err); }
  std::size_t* coords() { return &e_.coordinates; }
  GradcheckEntry done(std::size_t draws) {
    e_.draws = draws;
    return e_;
  }

 private:
  GradcheckEntry e_;
};

// Scalar probe sum <G, net(X)> against backward() for parameters and input.
void check_net(const std::string& name, Net net, const GradcheckOptions& o, Rng& rng,
               GradcheckReport& report) {
  Accumulator params(name + " parameters", kNetworkTolerance);
  Accumulator input(name + " input", kNetworkTolerance);
  const auto b = static_cast<Eigen::Index>(o.batch);
  for (std::size_t d = 0; d < o.draws; ++d) {
    randomize(net, rng);
    Eigen::MatrixXd x = gaussian(net.input_dim(), b, rng);
    const Eigen::MatrixXd g = gaussian(net.output_dim(), b, rng);
    const auto f = [&] { return (g.array() * net.forward(x).array()).sum(); };
    ForwardCache cache;
    net.forward(x, &cache);
    Params grads = zeros_like(net.params());
    const Eigen::MatrixXd gx = net.backward(cache, g, grads);
    params.add(check_parameters(net.params(), grads, f, o.step, o.floor, params.coords()));
    input.add(check_matrix(x, gx, f, o.step, o.floor, input.coords()));
  }
  report.entries.push_back(params.done(o.draws));
  report.entries.push_back(input.done(o.draws));
}

}  // namespace

double check_parameters(Params& params, const Params& grads, const std::function<double()>& f,
                        double step, double floor, std::size_t* coordinates) {
  if (params.size() != grads.size()) throw ShapeError("gradcheck: layer count mismatch");
  double worst = 0.0;
  for (std::size_t l = 0; l < params.size(); ++l) {
    worst = std::max(worst, check_block(params[l].weight, grads[l].weight, f, step, floor,
                                        coordinates));
    Eigen::MatrixXd gb = grads[l].bias;
    Eigen::Map<Eigen::MatrixXd> bias(params[l].bias.data(), params[l].bias.size(), 1);
    worst = std::max(worst, check_block(bias, gb, f, step, floor, coordinates));
  }
  return worst;
}

double check_matrix(Eigen::MatrixXd& x, const Eigen::MatrixXd& grad,
                    const std::function<double()>& f, double step, double floor,
                    std::size_t* coordinates) {
  return check_block(x, grad, f, step, floor, coordinates);
}

GradcheckReport run_gradcheck(const GradcheckOptions& o) {
  const NetworkConfig& nc = o.agent.network;
  const DiffusionConfig& dc = o.agent.diffusion;
  const int sd = o.state_dim;
  const int ad = o.action_dim;
  const auto b = static_cast<Eigen::Index>(o.batch);
  const auto experts = static_cast<int>(o.agent.moe.experts);
  Rng rng(derive_seed(o.seed, 0));
  GradcheckReport report;

  const Net critic(widths(sd + ad, nc.critic_hidden, 1));
  const Net denoiser(widths(ad + dc.time_embed_dim + sd, nc.denoiser_hidden, ad));
  const Net gate(widths(sd, nc.gate_hidden, experts));
  const Net actor(widths(sd, nc.actor_hidden, ad), Activation::kRelu, Activation::kTanh);
  check_net("critic", critic, o, rng, report);
  check_net("denoiser", denoiser, o, rng, report);
  check_net("gate", gate, o, rng, report);
  check_net("ddpg actor", actor, o, rng, report);

  {
    Accumulator acc("diffusion actor chain", kChainTolerance);
    DiffusionPolicy policy(sd, ad, nc.denoiser_hidden, dc.schedule(), dc.time_embed_dim,
                           dc.prior_scale);
    Net q(widths(sd + ad, nc.critic_hidden, 1));
    for (std::size_t d = 0; d < o.draws; ++d) {
      randomize(policy.denoiser(), rng);
      randomize(q, rng);
      const Eigen::MatrixXd states = gaussian(sd, b, rng);
      const ChainNoise noise = policy.draw_noise(b, rng);
      const NetCritic qc(q);
      const ActorLoss l = actor_loss(states, policy, qc, noise);
      const auto f = [&] { return actor_loss(states, policy, qc, noise).loss; };
      acc.add(check_parameters(policy.denoiser().params(), l.grads, f, o.step, o.floor,
                               acc.coords()));
    }
    report.entries.push_back(acc.done(o.draws));
  }
  {
    Accumulator acc("critic loss", kNetworkTolerance);
    Net q = critic;
    for (std::size_t d = 0; d < o.draws; ++d) {
      randomize(q, rng);
      const Eigen::MatrixXd states = gaussian(sd, b, rng);
      const Eigen::MatrixXd actions = uniform01(ad, b, rng);
      const Eigen::RowVectorXd targets = gaussian(1, b, rng).row(0);
      const LossAndGrads l = critic_loss(q, states, actions, targets);
      const auto f = [&] { return critic_loss(q, states, actions, targets).loss; };
      acc.add(check_parameters(q.params(), l.grads, f, o.step, o.floor, acc.coords()));
    }
    report.entries.push_back(acc.done(o.draws));
  }
  {
    Accumulator acc("ddpg actor loss", kNetworkTolerance);
    Net a = actor;
    Net q = critic;
    for (std::size_t d = 0; d < o.draws; ++d) {
      randomize(a, rng);
      randomize(q, rng);
      const Eigen::MatrixXd states = gaussian(sd, b, rng);
      const NetCritic qc(q);
      const LossAndGrads l = ddpg_actor_loss(a, states, qc);
      const auto f = [&] { return ddpg_actor_loss(a, states, qc).loss; };
      acc.add(check_parameters(a.params(), l.grads, f, o.step, o.floor, acc.coords()));
    }
    report.entries.push_back(acc.done(o.draws));
  }
  {
    Accumulator acc("gate loss", kNetworkTolerance);
    Net g = gate;
    for (std::size_t d = 0; d < o.draws; ++d) {
      randomize(g, rng);
      const Eigen::MatrixXd states = gaussian(sd, b, rng);
      const Eigen::MatrixXd qv = gaussian(experts, b, rng);
      const double lb = 0.5;
      const GateLoss l = gate_loss(g, states, qv, lb);
      const auto f = [&] { return gate_loss(g, states, qv, lb).loss; };
      acc.add(check_parameters(g.params(), l.grads, f, o.step, o.floor, acc.coords()));
    }
    report.entries.push_back(acc.done(o.draws));
  }
  return report;
}

void write_report(std::ostream& os, const GradcheckReport& report) {
  for (const auto& e : report.entries)
    os << (e.passed() ? "PASS " : "FAIL ") << e.name << ": max relative error "
       << format_double(e.max_relative_error) << " (tolerance " << format_double(e.tolerance)
       << ", " << e.draws << " draws, " << e.coordinates << " coordinates)\n";
}

}  // namespace fjam
