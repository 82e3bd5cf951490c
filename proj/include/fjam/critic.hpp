#pragma once

#include <Eigen/Dense>

#include "fjam/nn.hpp"

namespace fjam {

// Q(s, a) over batches; columns are samples.
class ActionValue {
 public:
  virtual ~ActionValue() = default;
  virtual Eigen::RowVectorXd value(const Eigen::MatrixXd& states,
                                   const Eigen::MatrixXd& actions) const = 0;
  // dQ/da per column.
  virtual Eigen::MatrixXd action_gradient(const Eigen::MatrixXd& states,
                                          const Eigen::MatrixXd& actions) const = 0;
};

// Stacks [states; actions] into one input matrix.
Eigen::MatrixXd critic_input(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions);

// A network critic reading [state; action] and emitting one scalar.
class NetCritic final : public ActionValue {
 public:
  explicit NetCritic(const Net& net) : net_(net) {}

  Eigen::RowVectorXd value(const Eigen::MatrixXd& states,
                           const Eigen::MatrixXd& actions) const override;
  Eigen::MatrixXd action_gradient(const Eigen::MatrixXd& states,
                                  const Eigen::MatrixXd& actions) const override;

 private:
  const Net& net_;
};

}  // namespace fjam
