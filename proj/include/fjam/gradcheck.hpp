#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fjam/nn.hpp"
#include "fjam/trainer.hpp"

namespace fjam {

inline constexpr double kNetworkTolerance = 1e-4;
inline constexpr double kChainTolerance = 1e-3;

struct GradcheckOptions {
  std::size_t draws = 10;
  std::uint64_t seed = 0;
  double step = 1e-5;
  // Denominator floor so entries whose true gradient is ~0 are judged on
  // absolute error instead of amplifying finite-difference rounding.
  double floor = 1e-5;
  std::size_t batch = 4;
  int state_dim = 18;
  int action_dim = 3;
  AgentConfig agent;
};

struct GradcheckEntry {
  std::string name;
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  std::size_t draws = 0;
  std::size_t coordinates = 0;  // total coordinates compared over all draws
  bool passed() const { return max_relative_error <= tolerance; }
};

struct GradcheckReport {
  std::vector<GradcheckEntry> entries;
  bool passed() const;
};

// |analytic - numeric| / max(|analytic|, |numeric|, floor).
double relative_error(double analytic, double numeric, double floor);

// Central differences of `f` over every parameter, compared with `grads`;
// parameters are restored afterwards. Returns the worst relative error.
double check_parameters(Params& params, const Params& grads, const std::function<double()>& f,
                        double step, double floor, std::size_t* coordinates = nullptr);

// Same over the entries of `x`.
double check_matrix(Eigen::MatrixXd& x, const Eigen::MatrixXd& grad,
                    const std::function<double()>& f, double step, double floor,
                    std::size_t* coordinates = nullptr);

// Every network architecture the agents use, the composed diffusion actor
// chain, and the critic, DDPG actor and gate losses.
GradcheckReport run_gradcheck(const GradcheckOptions& opts = {});

void write_report(std::ostream& os, const GradcheckReport& report);

}  // namespace fjam
