#include "fjam/critic.hpp"

namespace fjam {

Eigen::MatrixXd critic_input(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) {
  if (states.cols() != actions.cols()) throw ShapeError("critic_input: batch size mismatch");
  Eigen::MatrixXd x(states.rows() + actions.rows(), states.cols());
  x.topRows(states.rows()) = states;
  x.bottomRows(actions.rows()) = actions;
  return x;
}

Eigen::RowVectorXd NetCritic::value(const Eigen::MatrixXd& states,
                                    const Eigen::MatrixXd& actions) const {
  return net_.forward(critic_input(states, actions)).row(0);
}

Eigen::MatrixXd NetCritic::action_gradient(const Eigen::MatrixXd& states,
                                           const Eigen::MatrixXd& actions) const {
  ForwardCache cache;
  net_.forward(critic_input(states, actions), &cache);
  const Eigen::MatrixXd grad_in =
      net_.input_gradient(cache, Eigen::MatrixXd::Ones(1, states.cols()));
  return grad_in.bottomRows(actions.rows());
}

}  // namespace fjam
