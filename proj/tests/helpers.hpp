#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "fjam/channel.hpp"

namespace testing {

// Three APs, three users, two eavesdroppers with hand-picked gains; used as the
// fixed channel for the straight-line metric oracles.
inline fjam::ChannelRealization fixed_channel() {
  fjam::ChannelRealization ch;
  ch.gains.resize(3, 5);
  // users 0..2, eves 0..1
  ch.gains << 2.0e-6, 3.0e-9, 1.5e-9, 4.0e-8, 1.0e-8,  //
      5.0e-9, 1.2e-6, 2.0e-9, 6.0e-9, 3.0e-8,           //
      4.0e-9, 1.0e-9, 9.0e-7, 2.5e-8, 7.0e-9;
  return ch;
}

inline bool close(double a, double b, double rel = 1e-12) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace testing
