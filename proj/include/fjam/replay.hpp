#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "fjam/env.hpp"
#include "fjam/rng.hpp"

namespace fjam {

struct Transition {
  EnvState state;
  Eigen::VectorXd action;  // normalized, in [0,1]
  double reward = 0.0;
  EnvState next_state;
  bool done = false;
};

// Column-major minibatch.
struct Batch {
  Eigen::MatrixXd states;
  Eigen::MatrixXd actions;
  Eigen::RowVectorXd rewards;
  Eigen::MatrixXd next_states;
  Eigen::RowVectorXd dones;  // 1 for terminal transitions
};

// Fixed-capacity ring of flattened transitions; the oldest entry is overwritten first.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim);

  void push(const Eigen::VectorXd& state, const Eigen::VectorXd& action, double reward,
            const Eigen::VectorXd& next_state, bool done);
  void push(const Transition& t) {
    push(t.state.features(), t.action, t.reward, t.next_state.features(), t.done);
  }

  // Uniform with replacement over the filled region.
  Batch sample(std::size_t batch_size, Rng& rng) const;

  // Slot i of the ring as a single-column batch.
  Batch at(std::size_t slot) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t cursor() const { return cursor_; }

 private:
  Batch gather(const std::vector<std::size_t>& slots) const;

  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
  Eigen::MatrixXd states_;
  Eigen::MatrixXd actions_;
  Eigen::RowVectorXd rewards_;
  Eigen::MatrixXd next_states_;
  Eigen::RowVectorXd dones_;
};

}  // namespace fjam
