#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fjam/rng.hpp"

namespace fjam {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Activation { kIdentity, kRelu, kTanh };

std::string to_string(Activation act);
Activation activation_from_string(const std::string& name);

struct Layer {
  Eigen::MatrixXd weight;  // (out, in)
  Eigen::VectorXd bias;    // (out)
};

// Parameters and their gradients share this layout.
using Params = std::vector<Layer>;

Params zeros_like(const Params& params);
void set_zero(Params& params);
void add_scaled(Params& dst, const Params& src, double scale);
bool all_finite(const Params& params);
double max_abs_difference(const Params& a, const Params& b);

// Activations recorded by a batched forward pass. Column j belongs to sample j.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // input of each layer
  std::vector<Eigen::MatrixXd> pre;     // affine output of each layer
  Eigen::MatrixXd output;
};

// Fully connected network: affine layers, `hidden` nonlinearity between them,
// `output` nonlinearity on the last layer.
class Net {
 public:
  Net() = default;
  Net(std::vector<int> widths, Activation hidden = Activation::kRelu,
      Activation output = Activation::kIdentity);

  // He-style uniform fan-in init; biases zero.
  void init(Rng& rng);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, ForwardCache* cache = nullptr) const;
  Eigen::VectorXd forward_one(const Eigen::VectorXd& x) const;

  // Reverse mode for sum_j <output_j, grad_output_j>. Parameter gradients are
  // accumulated into `grads`; the input gradient is returned.
  Eigen::MatrixXd backward(const ForwardCache& cache, const Eigen::MatrixXd& grad_output,
                           Params& grads) const;
  // Input gradient only.
  Eigen::MatrixXd input_gradient(const ForwardCache& cache,
                                 const Eigen::MatrixXd& grad_output) const;

  const std::vector<int>& widths() const { return widths_; }
  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }
  std::size_t parameter_count() const;

  Params& params() { return params_; }
  const Params& params() const { return params_; }

  bool same_architecture(const Net& other) const;

  // Text checkpoint; see docs/checkpoint.md.
  void save(std::ostream& os) const;
  static Net load(std::istream& is);

 private:
  Eigen::MatrixXd backward_impl(const ForwardCache& cache, const Eigen::MatrixXd& grad_output,
                                Params* grads) const;

  std::vector<int> widths_;
  Activation hidden_ = Activation::kRelu;
  Activation output_ = Activation::kIdentity;
  Params params_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected adaptive-moment optimizer bound to one parameter layout.
class Adam {
 public:
  Adam() = default;
  Adam(const Params& like, AdamConfig config);

  void step(Params& params, const Params& grads);

  std::uint64_t step_count() const { return steps_; }
  const Params& first_moment() const { return m_; }
  const Params& second_moment() const { return v_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  Params m_;
  Params v_;
  std::uint64_t steps_ = 0;
};

// target <- tau * online + (1 - tau) * target.
void soft_update(Net& target, const Net& online, double tau);

}  // namespace fjam
