#include "fjam/replay.hpp"

#include <stdexcept>
#include <vector>

namespace fjam {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim)
    : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("buffer_capacity: must be > 0");
  const auto cap = static_cast<Eigen::Index>(capacity);
  states_.resize(static_cast<Eigen::Index>(state_dim), cap);
  actions_.resize(static_cast<Eigen::Index>(action_dim), cap);
  rewards_.resize(cap);
  next_states_.resize(static_cast<Eigen::Index>(state_dim), cap);
  dones_.resize(cap);
}

void ReplayBuffer::push(const Eigen::VectorXd& state, const Eigen::VectorXd& action,
                        double reward, const Eigen::VectorXd& next_state, bool done) {
  const auto c = static_cast<Eigen::Index>(cursor_);
  states_.col(c) = state;
  actions_.col(c) = action;
  rewards_(c) = reward;
  next_states_.col(c) = next_state;
  dones_(c) = done ? 1.0 : 0.0;
  cursor_ = (cursor_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

Batch ReplayBuffer::gather(const std::vector<std::size_t>& slots) const {
  const auto n = static_cast<Eigen::Index>(slots.size());
  Batch b;
  b.states.resize(states_.rows(), n);
  b.actions.resize(actions_.rows(), n);
  b.rewards.resize(n);
  b.next_states.resize(next_states_.rows(), n);
  b.dones.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto s = static_cast<Eigen::Index>(slots[static_cast<std::size_t>(j)]);
    b.states.col(j) = states_.col(s);
    b.actions.col(j) = actions_.col(s);
    b.rewards(j) = rewards_(s);
    b.next_states.col(j) = next_states_.col(s);
    b.dones(j) = dones_(s);
  }
  return b;
}

Batch ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (size_ == 0) throw std::logic_error("replay buffer is empty");
  std::vector<std::size_t> slots(batch_size);
  for (std::size_t& s : slots) s = rng.index(size_);
  return gather(slots);
}

Batch ReplayBuffer::at(std::size_t slot) const {
  if (slot >= size_) throw std::out_of_range("replay slot not filled");
  return gather({slot});
}

}  // namespace fjam
