#include "fjam/secrecy.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fjam {

PowerAllocation PowerAllocation::from_normalized(std::span<const double> action, double p_max) {
  std::vector<double> watts(action.size());
  std::transform(action.begin(), action.end(), watts.begin(),
                 [p_max](double a) { return a * p_max; });
  return PowerAllocation(std::move(watts));
}

double PowerAllocation::total() const {
  return std::accumulate(watts_.begin(), watts_.end(), 0.0);
}

void PowerAllocation::validate(const ScenarioConfig& cfg) const {
  if (watts_.size() != cfg.n_aps())
    throw std::invalid_argument("power allocation has " + std::to_string(watts_.size()) +
                                " entries for " + std::to_string(cfg.n_aps()) + " APs");
  for (std::size_t a = 0; a < watts_.size(); ++a)
    if (!(watts_[a] >= 0.0 && watts_[a] <= cfg.p_max))
      throw std::invalid_argument("power of AP " + std::to_string(a) + " outside [0, p_max]");
}

double secrecy_rate_from(double user_capacity, std::span<const double> eve_capacities) {
  double worst = 0.0;
  for (double c : eve_capacities) worst = std::max(worst, c);
  return std::max(0.0, user_capacity - worst);
}

double secure_ee_from(double secrecy_rate, double power) {
  return power > kZeroPowerThreshold ? secrecy_rate / power : 0.0;
}

namespace {

// Capacities of user u and of every eavesdropper listening to u's serving AP.
void link_capacities(std::size_t u, const PowerAllocation& p, const ChannelRealization& ch,
                     const ScenarioConfig& cfg, double& user_cap, std::vector<double>& eve_caps) {
  const std::size_t ap = cfg.user_to_ap[u];
  user_cap = shannon_capacity(sinr(u, ap, p.watts(), ch, cfg));
  eve_caps.resize(cfg.n_eves());
  for (std::size_t e = 0; e < cfg.n_eves(); ++e)
    eve_caps[e] = shannon_capacity(sinr(cfg.n_users() + e, ap, p.watts(), ch, cfg));
}

}  // namespace

double secrecy_rate(std::size_t user, const PowerAllocation& p, const ChannelRealization& ch,
                    const ScenarioConfig& cfg) {
  double user_cap = 0.0;
  std::vector<double> eve_caps;
  link_capacities(user, p, ch, cfg, user_cap, eve_caps);
  return secrecy_rate_from(user_cap, eve_caps);
}

double secure_ee(std::size_t ap, const PowerAllocation& p, const ChannelRealization& ch,
                 const ScenarioConfig& cfg) {
  double served_sr = 0.0;
  for (std::size_t u = 0; u < cfg.n_users(); ++u)
    if (cfg.user_to_ap[u] == ap) served_sr += secrecy_rate(u, p, ch, cfg);
  return secure_ee_from(served_sr, p[ap]);
}

SecrecyMetrics evaluate_secrecy(const PowerAllocation& p, const ChannelRealization& ch,
                                const ScenarioConfig& cfg, double weight) {
  SecrecyMetrics m;
  const std::size_t n_users = cfg.n_users();
  m.user_capacity.resize(n_users);
  m.eve_capacity.resize(static_cast<Eigen::Index>(cfg.n_eves()),
                        static_cast<Eigen::Index>(n_users));
  m.secrecy_rate.resize(n_users);
  std::vector<double> served_sr(cfg.n_aps(), 0.0);
  std::vector<double> eve_caps;
  for (std::size_t u = 0; u < n_users; ++u) {
    link_capacities(u, p, ch, cfg, m.user_capacity[u], eve_caps);
    for (std::size_t e = 0; e < eve_caps.size(); ++e)
      m.eve_capacity(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(u)) = eve_caps[e];
    m.secrecy_rate[u] = secrecy_rate_from(m.user_capacity[u], eve_caps);
    served_sr[cfg.user_to_ap[u]] += m.secrecy_rate[u];
    m.sr_sum += m.secrecy_rate[u];
  }
  m.secure_ee.resize(cfg.n_aps());
  for (std::size_t a = 0; a < cfg.n_aps(); ++a) {
    m.secure_ee[a] = secure_ee_from(served_sr[a], p[a]);
    m.see_sum += m.secure_ee[a];
  }
  m.reward = m.sr_sum + weight * m.see_sum;
  return m;
}

}  // namespace fjam
