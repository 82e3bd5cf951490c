#include "fjam/nn.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "fjam/format.hpp"

namespace fjam {

std::string to_string(Activation act) {
  switch (act) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

Params zeros_like(const Params& params) {
  Params out(params.size());
  for (std::size_t l = 0; l < params.size(); ++l) {
    out[l].weight = Eigen::MatrixXd::Zero(params[l].weight.rows(), params[l].weight.cols());
    out[l].bias = Eigen::VectorXd::Zero(params[l].bias.size());
  }
  return out;
}

void set_zero(Params& params) {
  for (Layer& l : params) {
    l.weight.setZero();
    l.bias.setZero();
  }
}

void add_scaled(Params& dst, const Params& src, double scale) {
  for (std::size_t l = 0; l < dst.size(); ++l) {
    dst[l].weight += scale * src[l].weight;
    dst[l].bias += scale * src[l].bias;
  }
}

bool all_finite(const Params& params) {
  for (const Layer& l : params)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

double max_abs_difference(const Params& a, const Params& b) {
  double d = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    d = std::max(d, (a[l].weight - b[l].weight).cwiseAbs().maxCoeff());
    d = std::max(d, (a[l].bias - b[l].bias).cwiseAbs().maxCoeff());
  }
  return d;
}

namespace {

void apply(Activation act, Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::kIdentity: break;
    case Activation::kRelu: z = z.cwiseMax(0.0); break;
    case Activation::kTanh: z = z.array().tanh().matrix(); break;
  }
}

// grad <- grad * act'(pre), given pre-activation and post-activation values.
void apply_derivative(Activation act, const Eigen::MatrixXd& pre, const Eigen::MatrixXd& post,
                      Eigen::MatrixXd& grad) {
  switch (act) {
    case Activation::kIdentity: break;
    case Activation::kRelu: grad = (pre.array() > 0.0).select(grad, 0.0); break;
    case Activation::kTanh: grad.array() *= 1.0 - post.array().square(); break;
  }
}

}  // namespace

Net::Net(std::vector<int> widths, Activation hidden, Activation output)
    : widths_(std::move(widths)), hidden_(hidden), output_(output) {
  if (widths_.size() < 2) throw ShapeError("network needs at least input and output widths");
  for (int w : widths_)
    if (w <= 0) throw ShapeError("layer widths must be positive");
  params_.resize(widths_.size() - 1);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    params_[l].weight = Eigen::MatrixXd::Zero(widths_[l + 1], widths_[l]);
    params_[l].bias = Eigen::VectorXd::Zero(widths_[l + 1]);
  }
}

void Net::init(Rng& rng) {
  for (Layer& layer : params_) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.weight.cols()));
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j)
        layer.weight(i, j) = rng.uniform(-bound, bound);
    layer.bias.setZero();
  }
}

std::size_t Net::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : params_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool Net::same_architecture(const Net& other) const {
  return widths_ == other.widths_ && hidden_ == other.hidden_ && output_ == other.output_;
}

Eigen::MatrixXd Net::forward(const Eigen::MatrixXd& x, ForwardCache* cache) const {
  if (x.rows() != input_dim())
    throw ShapeError("forward: input has " + std::to_string(x.rows()) + " rows, expected " +
                     std::to_string(input_dim()));
  if (cache) {
    cache->inputs.resize(params_.size());
    cache->pre.resize(params_.size());
  }
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < params_.size(); ++l) {
    Eigen::MatrixXd z = params_[l].weight * a;
    z.colwise() += params_[l].bias;
    if (cache) {
      cache->inputs[l] = std::move(a);
      cache->pre[l] = z;
    }
    apply(l + 1 == params_.size() ? output_ : hidden_, z);
    a = std::move(z);
  }
  if (cache) cache->output = a;
  return a;
}

Eigen::VectorXd Net::forward_one(const Eigen::VectorXd& x) const {
  return forward(Eigen::MatrixXd(x)).col(0);
}

Eigen::MatrixXd Net::backward(const ForwardCache& cache, const Eigen::MatrixXd& grad_output,
                              Params& grads) const {
  return backward_impl(cache, grad_output, &grads);
}

Eigen::MatrixXd Net::input_gradient(const ForwardCache& cache,
                                    const Eigen::MatrixXd& grad_output) const {
  return backward_impl(cache, grad_output, nullptr);
}

Eigen::MatrixXd Net::backward_impl(const ForwardCache& cache, const Eigen::MatrixXd& grad_output,
                                   Params* grads) const {
  if (cache.inputs.size() != params_.size() || cache.pre.size() != params_.size())
    throw ShapeError("backward: cache does not match network depth");
  if (grads && grads->size() != params_.size()) throw ShapeError("backward: gradient layout mismatch");
  if (grad_output.rows() != output_dim() || grad_output.cols() != cache.output.cols() ||
      cache.output.rows() != output_dim())
    throw ShapeError("backward: grad_output shape mismatch");
  Eigen::MatrixXd g = grad_output;
  for (std::size_t l = params_.size(); l-- > 0;) {
    const Eigen::MatrixXd& post = (l + 1 == params_.size()) ? cache.output : cache.inputs[l + 1];
    if (cache.inputs[l].rows() != params_[l].weight.cols() ||
        cache.pre[l].rows() != params_[l].weight.rows() || cache.pre[l].cols() != g.cols())
      throw ShapeError("backward: stale cache");
    apply_derivative(l + 1 == params_.size() ? output_ : hidden_, cache.pre[l], post, g);
    if (grads) {
      (*grads)[l].weight.noalias() += g * cache.inputs[l].transpose();
      (*grads)[l].bias += g.rowwise().sum();
    }
    g = params_[l].weight.transpose() * g;
  }
  return g;
}

void Net::save(std::ostream& os) const {
  os << "fjam-net 1\n";
  os << "widths";
  for (int w : widths_) os << ' ' << w;
  os << "\nactivation " << to_string(hidden_) << ' ' << to_string(output_) << '\n';
  for (std::size_t l = 0; l < params_.size(); ++l) {
    const Layer& layer = params_[l];
    os << "layer " << l << ' ' << layer.weight.rows() << ' ' << layer.weight.cols() << '\n';
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j)
        os << (j ? " " : "") << format_double(layer.weight(i, j));
      os << '\n';
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i)
      os << (i ? " " : "") << format_double(layer.bias(i));
    os << '\n';
  }
}

namespace {

std::string read_line(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("checkpoint: unexpected end of input");
  return line;
}

}  // namespace

Net Net::load(std::istream& is) {
  if (read_line(is) != "fjam-net 1") throw std::runtime_error("checkpoint: bad network header");
  std::istringstream widths_line(read_line(is));
  std::string tag;
  widths_line >> tag;
  if (tag != "widths") throw std::runtime_error("checkpoint: expected widths");
  std::vector<int> widths;
  for (int w; widths_line >> w;) widths.push_back(w);
  std::istringstream act_line(read_line(is));
  std::string hidden, output;
  act_line >> tag >> hidden >> output;
  if (tag != "activation") throw std::runtime_error("checkpoint: expected activation");
  Net net(widths, activation_from_string(hidden), activation_from_string(output));
  for (std::size_t l = 0; l < net.params_.size(); ++l) {
    std::istringstream header(read_line(is));
    std::size_t index = 0;
    Eigen::Index rows = 0, cols = 0;
    header >> tag >> index >> rows >> cols;
    Layer& layer = net.params_[l];
    if (tag != "layer" || index != l || rows != layer.weight.rows() || cols != layer.weight.cols())
      throw std::runtime_error("checkpoint: layer header mismatch at layer " + std::to_string(l));
    auto read_row = [&](Eigen::Index n) {
      std::istringstream row(read_line(is));
      std::vector<double> values;
      for (std::string tok; row >> tok;) values.push_back(parse_double(tok));
      if (static_cast<Eigen::Index>(values.size()) != n)
        throw std::runtime_error("checkpoint: wrong value count in layer " + std::to_string(l));
      return values;
    };
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto values = read_row(cols);
      for (Eigen::Index j = 0; j < cols; ++j) layer.weight(i, j) = values[static_cast<std::size_t>(j)];
    }
    const auto bias = read_row(rows);
    for (Eigen::Index i = 0; i < rows; ++i) layer.bias(i) = bias[static_cast<std::size_t>(i)];
  }
  return net;
}

Adam::Adam(const Params& like, AdamConfig config)
    : config_(config), m_(zeros_like(like)), v_(zeros_like(like)) {}

void Adam::step(Params& params, const Params& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw ShapeError("adam: parameter layout mismatch");
  ++steps_;
  // An all-zero gradient leaves parameters and moments untouched.
  bool any_nonzero = false;
  for (const Layer& g : grads)
    any_nonzero = any_nonzero || !g.weight.isZero(0.0) || !g.bias.isZero(0.0);
  if (!any_nonzero) return;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double lr = config_.lr;
  const double eps = config_.eps;
  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < params.size(); ++l) {
    update(params[l].weight, m_[l].weight, v_[l].weight, grads[l].weight);
    update(params[l].bias, m_[l].bias, v_[l].bias, grads[l].bias);
  }
}

void soft_update(Net& target, const Net& online, double tau) {
  if (!target.same_architecture(online)) throw ShapeError("soft_update: architecture mismatch");
  Params& t = target.params();
  const Params& o = online.params();
  for (std::size_t l = 0; l < t.size(); ++l) {
    t[l].weight = tau * o[l].weight + (1.0 - tau) * t[l].weight;
    t[l].bias = tau * o[l].bias + (1.0 - tau) * t[l].bias;
  }
}

}  // namespace fjam
