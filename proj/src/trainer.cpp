#include "fjam/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "fjam/format.hpp"

namespace fjam {

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::kMoeGdm: return "moe_gdm";
    case Algorithm::kGdm: return "gdm";
    case Algorithm::kDdpg: return "ddpg";
  }
  return "gdm";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "moe_gdm") return Algorithm::kMoeGdm;
  if (name == "gdm") return Algorithm::kGdm;
  if (name == "ddpg") return Algorithm::kDdpg;
  throw std::invalid_argument("unknown algorithm '" + name + "' (expected moe_gdm, gdm or ddpg)");
}

void validate(const AgentConfig& cfg, std::size_t episode_length) {
  auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument(key + ": " + why);
  };
  const TrainConfig& t = cfg.train;
  if (!(t.gamma > 0.0 && t.gamma < 1.0)) fail("gamma", "must lie in (0, 1)");
  if (!(t.tau > 0.0 && t.tau <= 1.0)) fail("tau", "must lie in (0, 1]");
  if (t.batch_size == 0) fail("batch_size", "must be > 0");
  if (!(t.lr_actor > 0.0)) fail("lr_actor", "must be > 0");
  if (!(t.lr_critic > 0.0)) fail("lr_critic", "must be > 0");
  if (!(t.lr_gate > 0.0)) fail("lr_gate", "must be > 0");
  if (t.buffer_capacity == 0) fail("buffer_capacity", "must be > 0");
  if (t.updates_per_step == 0) fail("updates_per_step", "must be > 0");
  if (t.episodes > 0 && t.warmup_steps > t.episodes * episode_length)
    fail("warmup_steps", "exceeds the total number of environment steps");
  if (!(t.explore_sigma_start >= 0.0)) fail("explore_sigma_start", "must be >= 0");
  if (!(t.explore_sigma_end >= 0.0)) fail("explore_sigma_end", "must be >= 0");
  if (cfg.diffusion.steps < 1) fail("steps", "must be >= 1");
  if (!(cfg.diffusion.beta_min > 0.0 && cfg.diffusion.beta_max < 1.0 &&
        (cfg.diffusion.steps == 1 || cfg.diffusion.beta_max > cfg.diffusion.beta_min)))
    fail("beta_max", "need 0 < beta_min < beta_max < 1");
  if (cfg.diffusion.time_embed_dim < 1) fail("time_embed_dim", "must be >= 1");
  if (!(cfg.diffusion.prior_scale > 0.0)) fail("prior_scale", "must be > 0");
  if (cfg.moe.experts < 1 || cfg.moe.experts > kMaxLoggedExperts)
    fail("experts", "must lie in [1, " + std::to_string(kMaxLoggedExperts) + "]");
  if (!(cfg.moe.load_balance >= 0.0)) fail("load_balance", "must be >= 0");
  if (cfg.moe.fixed_expert >= cfg.moe.experts) fail("fixed_expert", "must be < experts");
  auto check_hidden = [&](const std::vector<int>& h, const std::string& key) {
    for (int w : h)
      if (w <= 0) fail(key, "widths must be positive");
  };
  check_hidden(cfg.network.critic_hidden, "critic_hidden");
  check_hidden(cfg.network.denoiser_hidden, "denoiser_hidden");
  check_hidden(cfg.network.gate_hidden, "gate_hidden");
  check_hidden(cfg.network.actor_hidden, "actor_hidden");
}

double td_target(double reward, bool done, double q_next, double gamma) {
  return done ? reward : reward + gamma * q_next;
}

Eigen::RowVectorXd td_targets(const Eigen::RowVectorXd& rewards, const Eigen::RowVectorXd& dones,
                              const Eigen::RowVectorXd& q_next, double gamma) {
  Eigen::RowVectorXd y(rewards.size());
  for (Eigen::Index j = 0; j < rewards.size(); ++j)
    y(j) = td_target(rewards(j), dones(j) != 0.0, q_next(j), gamma);
  return y;
}

LossAndGrads critic_loss(const Net& critic, const Eigen::MatrixXd& states,
                         const Eigen::MatrixXd& actions, const Eigen::RowVectorXd& targets) {
  ForwardCache cache;
  const Eigen::MatrixXd q = critic.forward(critic_input(states, actions), &cache);
  const double batch = static_cast<double>(states.cols());
  const Eigen::RowVectorXd err = q.row(0) - targets;
  LossAndGrads out;
  out.loss = err.squaredNorm() / batch;
  out.grads = zeros_like(critic.params());
  critic.backward(cache, (2.0 / batch) * err, out.grads);
  return out;
}

Eigen::MatrixXd ddpg_actions(const Net& actor, const Eigen::MatrixXd& states) {
  return ((actor.forward(states).array() + 1.0) * 0.5).matrix();
}

LossAndGrads ddpg_actor_loss(const Net& actor, const Eigen::MatrixXd& states,
                             const ActionValue& critic) {
  ForwardCache cache;
  const Eigen::MatrixXd head = actor.forward(states, &cache);
  const Eigen::MatrixXd actions = ((head.array() + 1.0) * 0.5).matrix();
  const double batch = static_cast<double>(states.cols());
  LossAndGrads out;
  out.loss = -critic.value(states, actions).sum() / batch;
  out.grads = zeros_like(actor.params());
  actor.backward(cache, (-0.5 / batch) * critic.action_gradient(states, actions), out.grads);
  return out;
}

namespace {

std::vector<int> with_ends(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

// Online critic, its target copy and optimizer.
struct CriticSet {
  Net online;
  Net target;
  Adam opt;

  CriticSet(int state_dim, int action_dim, const AgentConfig& cfg)
      : online(with_ends(state_dim + action_dim, cfg.network.critic_hidden, 1)) {
    Rng init(derive_seed(cfg.train.seed, streams::kCriticInit));
    online.init(init);
    target = online;
    opt = Adam(online.params(), AdamConfig{.lr = cfg.train.lr_critic});
  }

  double update(const Batch& b, const Eigen::MatrixXd& next_actions, double gamma) {
    const Eigen::RowVectorXd q_next = NetCritic(target).value(b.next_states, next_actions);
    const Eigen::RowVectorXd y = td_targets(b.rewards, b.dones, q_next, gamma);
    LossAndGrads l = critic_loss(online, b.states, b.actions, y);
    opt.step(online.params(), l.grads);
    return l.loss;
  }
};

void write_widths(std::ostream& os, const std::string& key, const std::vector<int>& w) {
  os << key;
  for (int v : w) os << ' ' << v;
  os << '\n';
}

class AgentBase : public Agent {
 public:
  AgentBase(const AgentConfig& cfg, int state_dim, int action_dim)
      : cfg_(cfg), state_dim_(state_dim), action_dim_(action_dim),
        critic_(state_dim, action_dim, cfg) {}

  bool parameters_finite() const override {
    for (const auto& [name, net] : const_cast<AgentBase*>(this)->named_nets())
      if (!all_finite(net->params())) return false;
    return true;
  }

  void save(std::ostream& os) const override {
    os << "fjam-agent 1\n";
    os << "algorithm " << to_string(algorithm()) << '\n';
    os << "dims " << state_dim_ << ' ' << action_dim_ << '\n';
    write_widths(os, "critic_hidden", cfg_.network.critic_hidden);
    write_widths(os, "denoiser_hidden", cfg_.network.denoiser_hidden);
    write_widths(os, "gate_hidden", cfg_.network.gate_hidden);
    write_widths(os, "actor_hidden", cfg_.network.actor_hidden);
    os << "diffusion " << cfg_.diffusion.steps << ' ' << format_double(cfg_.diffusion.beta_min)
       << ' ' << format_double(cfg_.diffusion.beta_max) << ' ' << cfg_.diffusion.time_embed_dim
       << ' ' << format_double(cfg_.diffusion.prior_scale) << '\n';
    os << "experts " << cfg_.moe.experts << ' ' << (cfg_.moe.fixed_routing ? 1 : 0) << ' '
       << cfg_.moe.fixed_expert << '\n';
    const auto nets = const_cast<AgentBase*>(this)->named_nets();
    os << "nets " << nets.size() << '\n';
    for (const auto& [name, net] : nets) {
      os << "net " << name << '\n';
      net->save(os);
    }
  }

  virtual std::vector<std::pair<std::string, Net*>> named_nets() = 0;

 protected:
  UpdateLosses check(UpdateLosses l) const {
    if (!std::isfinite(l.critic) || !std::isfinite(l.actor) || !std::isfinite(l.gate))
      throw std::runtime_error("non-finite loss");
    return l;
  }

  AgentConfig cfg_;
  int state_dim_;
  int action_dim_;
  CriticSet critic_;
};

class GdmAgent final : public AgentBase {
 public:
  GdmAgent(const AgentConfig& cfg, int state_dim, int action_dim)
      : AgentBase(cfg, state_dim, action_dim),
        policy_(state_dim, action_dim, cfg.network.denoiser_hidden, cfg.diffusion.schedule(),
                cfg.diffusion.time_embed_dim, cfg.diffusion.prior_scale) {
    Rng init(derive_seed(cfg.train.seed, streams::kActorInit));
    policy_.init(init);
    target_ = policy_;
    opt_ = Adam(policy_.denoiser().params(), AdamConfig{.lr = cfg.train.lr_actor});
  }

  Algorithm algorithm() const override { return Algorithm::kGdm; }

  std::pair<Eigen::VectorXd, std::optional<std::size_t>> act(const Eigen::VectorXd& state,
                                                             Rng& rng) const override {
    return {policy_.sample_action(state, rng), std::nullopt};
  }

  UpdateLosses update(const Batch& b, Rng& rng) override {
    UpdateLosses l;
    l.critic = critic_.update(b, target_.sample_actions(b.next_states, rng), cfg_.train.gamma);
    ActorLoss a = actor_loss(b.states, policy_, NetCritic(critic_.online), rng);
    opt_.step(policy_.denoiser().params(), a.grads);
    l.actor = a.loss;
    soft_update(critic_.target, critic_.online, cfg_.train.tau);
    soft_update(target_.denoiser(), policy_.denoiser(), cfg_.train.tau);
    return check(l);
  }

  std::uint64_t denoiser_evaluations() const override {
    return policy_.denoiser_evaluations() + target_.denoiser_evaluations();
  }

  std::vector<std::pair<std::string, Net*>> named_nets() override {
    return {{"critic", &critic_.online},
            {"critic_target", &critic_.target},
            {"denoiser", &policy_.denoiser()},
            {"denoiser_target", &target_.denoiser()}};
  }

 private:
  DiffusionPolicy policy_;
  DiffusionPolicy target_;
  Adam opt_;
};

class MoeGdmAgent final : public AgentBase {
 public:
  MoeGdmAgent(const AgentConfig& cfg, int state_dim, int action_dim)
      : AgentBase(cfg, state_dim, action_dim),
        actor_(state_dim, action_dim, cfg.moe.experts, cfg.network.gate_hidden,
               cfg.network.denoiser_hidden, cfg.diffusion.schedule(),
               cfg.diffusion.time_embed_dim, cfg.diffusion.prior_scale) {
    Rng gate_init(derive_seed(cfg.train.seed, streams::kGateInit));
    actor_.gate().init(gate_init);
    for (std::size_t k = 0; k < actor_.expert_count(); ++k) {
      Rng init(derive_seed(cfg.train.seed, streams::kActorInit + 100 * k));
      actor_.expert(k).init(init);
      expert_opts_.emplace_back(actor_.expert(k).denoiser().params(),
                                AdamConfig{.lr = cfg.train.lr_actor});
    }
    gate_opt_ = Adam(actor_.gate().params(), AdamConfig{.lr = cfg.train.lr_gate});
    if (cfg.moe.fixed_routing) actor_.force_expert(cfg.moe.fixed_expert);
    target_ = actor_;
  }

  Algorithm algorithm() const override { return Algorithm::kMoeGdm; }

  std::pair<Eigen::VectorXd, std::optional<std::size_t>> act(const Eigen::VectorXd& state,
                                                             Rng& rng) const override {
    auto [a, k] = actor_.sample_action(state, rng);
    return {std::move(a), k};
  }

  UpdateLosses update(const Batch& b, Rng& rng) override {
    UpdateLosses l;
    l.critic = critic_.update(b, target_.sample_actions(b.next_states, rng), cfg_.train.gamma);
    MoEUpdate u = moe_actor_update(b.states, actor_, NetCritic(critic_.online),
                                   cfg_.moe.load_balance, rng);
    for (std::size_t k = 0; k < actor_.expert_count(); ++k)
      if (u.expert_grads[k]) expert_opts_[k].step(actor_.expert(k).denoiser().params(), *u.expert_grads[k]);
    if (u.gate) {
      gate_opt_.step(actor_.gate().params(), u.gate->grads);
      l.gate = u.gate->loss;
    }
    l.actor = u.actor_loss;
    soft_update(critic_.target, critic_.online, cfg_.train.tau);
    soft_update(target_.gate(), actor_.gate(), cfg_.train.tau);
    for (std::size_t k = 0; k < actor_.expert_count(); ++k)
      soft_update(target_.expert(k).denoiser(), actor_.expert(k).denoiser(), cfg_.train.tau);
    return check(l);
  }

  std::uint64_t denoiser_evaluations() const override {
    return actor_.denoiser_evaluations() + target_.denoiser_evaluations();
  }

  std::vector<std::pair<std::string, Net*>> named_nets() override {
    std::vector<std::pair<std::string, Net*>> nets{{"critic", &critic_.online},
                                                   {"critic_target", &critic_.target},
                                                   {"gate", &actor_.gate()},
                                                   {"gate_target", &target_.gate()}};
    for (std::size_t k = 0; k < actor_.expert_count(); ++k) {
      nets.emplace_back("expert_" + std::to_string(k), &actor_.expert(k).denoiser());
      nets.emplace_back("expert_" + std::to_string(k) + "_target", &target_.expert(k).denoiser());
    }
    return nets;
  }

 private:
  MoEActor actor_;
  MoEActor target_;
  std::vector<Adam> expert_opts_;
  Adam gate_opt_;
};

class DdpgAgent final : public AgentBase {
 public:
  DdpgAgent(const AgentConfig& cfg, int state_dim, int action_dim)
      : AgentBase(cfg, state_dim, action_dim),
        actor_(with_ends(state_dim, cfg.network.actor_hidden, action_dim), Activation::kRelu,
               Activation::kTanh) {
    Rng init(derive_seed(cfg.train.seed, streams::kActorInit));
    actor_.init(init);
    target_ = actor_;
    opt_ = Adam(actor_.params(), AdamConfig{.lr = cfg.train.lr_actor});
  }

  Algorithm algorithm() const override { return Algorithm::kDdpg; }

  std::pair<Eigen::VectorXd, std::optional<std::size_t>> act(const Eigen::VectorXd& state,
                                                             Rng&) const override {
    return {ddpg_actions(actor_, Eigen::MatrixXd(state)).col(0), std::nullopt};
  }

  UpdateLosses update(const Batch& b, Rng&) override {
    UpdateLosses l;
    l.critic = critic_.update(b, ddpg_actions(target_, b.next_states), cfg_.train.gamma);
    LossAndGrads a = ddpg_actor_loss(actor_, b.states, NetCritic(critic_.online));
    opt_.step(actor_.params(), a.grads);
    l.actor = a.loss;
    soft_update(critic_.target, critic_.online, cfg_.train.tau);
    soft_update(target_, actor_, cfg_.train.tau);
    return check(l);
  }

  std::vector<std::pair<std::string, Net*>> named_nets() override {
    return {{"critic", &critic_.online},
            {"critic_target", &critic_.target},
            {"actor", &actor_},
            {"actor_target", &target_}};
  }

 private:
  Net actor_;
  Net target_;
  Adam opt_;
};

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

std::vector<std::string> expect_line(std::istream& is, const std::string& key) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("checkpoint: missing '" + key + "'");
  auto t = tokens(line);
  if (t.empty() || t.front() != key) throw std::runtime_error("checkpoint: expected '" + key + "'");
  t.erase(t.begin());
  return t;
}

std::vector<int> to_ints(const std::vector<std::string>& t) {
  std::vector<int> out;
  for (const auto& s : t) out.push_back(std::stoi(s));
  return out;
}

}  // namespace

std::unique_ptr<Agent> make_agent(Algorithm algo, const AgentConfig& cfg, int state_dim,
                                  int action_dim) {
  switch (algo) {
    case Algorithm::kMoeGdm: return std::make_unique<MoeGdmAgent>(cfg, state_dim, action_dim);
    case Algorithm::kGdm: return std::make_unique<GdmAgent>(cfg, state_dim, action_dim);
    case Algorithm::kDdpg: return std::make_unique<DdpgAgent>(cfg, state_dim, action_dim);
  }
  throw std::invalid_argument("unknown algorithm");
}

std::unique_ptr<Agent> load_agent(std::istream& is) {
  std::string header;
  std::getline(is, header);
  if (header != "fjam-agent 1") throw std::runtime_error("checkpoint: not an agent checkpoint");
  const auto algo_tok = expect_line(is, "algorithm");
  if (algo_tok.size() != 1) throw std::runtime_error("checkpoint: malformed algorithm line");
  const Algorithm algo = algorithm_from_string(algo_tok[0]);
  const auto dims = to_ints(expect_line(is, "dims"));
  if (dims.size() != 2) throw std::runtime_error("checkpoint: malformed dims line");
  AgentConfig cfg;
  cfg.network.critic_hidden = to_ints(expect_line(is, "critic_hidden"));
  cfg.network.denoiser_hidden = to_ints(expect_line(is, "denoiser_hidden"));
  cfg.network.gate_hidden = to_ints(expect_line(is, "gate_hidden"));
  cfg.network.actor_hidden = to_ints(expect_line(is, "actor_hidden"));
  const auto diff = expect_line(is, "diffusion");
  if (diff.size() != 5) throw std::runtime_error("checkpoint: malformed diffusion line");
  cfg.diffusion.steps = std::stoi(diff[0]);
  cfg.diffusion.beta_min = parse_double(diff[1]);
  cfg.diffusion.beta_max = parse_double(diff[2]);
  cfg.diffusion.time_embed_dim = std::stoi(diff[3]);
  cfg.diffusion.prior_scale = parse_double(diff[4]);
  const auto experts = expect_line(is, "experts");
  if (experts.size() != 3) throw std::runtime_error("checkpoint: malformed experts line");
  cfg.moe.experts = static_cast<std::size_t>(std::stoul(experts[0]));
  cfg.moe.fixed_routing = experts[1] == "1";
  cfg.moe.fixed_expert = static_cast<std::size_t>(std::stoul(experts[2]));

  auto agent = make_agent(algo, cfg, dims[0], dims[1]);
  auto* base = static_cast<AgentBase*>(agent.get());
  auto nets = base->named_nets();
  const auto count = expect_line(is, "nets");
  if (count.size() != 1 || std::stoul(count[0]) != nets.size())
    throw std::runtime_error("checkpoint: network count mismatch");
  for (auto& [name, net] : nets) {
    const auto tag = expect_line(is, "net");
    if (tag.size() != 1 || tag[0] != name)
      throw std::runtime_error("checkpoint: expected network '" + name + "'");
    Net loaded = Net::load(is);
    if (!loaded.same_architecture(*net))
      throw std::runtime_error("checkpoint: architecture mismatch for '" + name + "'");
    *net = std::move(loaded);
  }
  return agent;
}

double exploration_sigma(const TrainConfig& cfg, std::uint64_t step, std::uint64_t total) {
  if (total <= 1) return cfg.explore_sigma_start;
  const double frac = std::min(1.0, static_cast<double>(step) / static_cast<double>(total - 1));
  return cfg.explore_sigma_start + (cfg.explore_sigma_end - cfg.explore_sigma_start) * frac;
}

ChannelRealization initial_channel(const ScenarioConfig& scenario, std::uint64_t seed) {
  Rng env_rng(derive_seed(seed, streams::kEnvironment));
  return realize_channel(scenario, env_rng);
}

RunResult train(Algorithm algo, const AgentConfig& cfg, const ScenarioConfig& scenario,
                const EnvConfig& env_cfg, const std::function<void(const RunRecord&)>& on_record) {
  validate(cfg, env_cfg.episode_length);
  Environment env(scenario, env_cfg);
  const std::uint64_t seed = cfg.train.seed;
  Rng env_rng(derive_seed(seed, streams::kEnvironment));
  Rng explore_rng(derive_seed(seed, streams::kExploration));
  Rng replay_rng(derive_seed(seed, streams::kReplay));
  Rng policy_rng(derive_seed(seed, streams::kPolicy));
  Rng update_rng(derive_seed(seed, streams::kUpdate));

  const int state_dim = static_cast<int>(env.state_dim());
  const int action_dim = static_cast<int>(env.action_dim());
  RunResult result;
  result.agent = make_agent(algo, cfg, state_dim, action_dim);
  Agent& agent = *result.agent;
  ReplayBuffer buffer(cfg.train.buffer_capacity, env.state_dim(), env.action_dim());

  const std::uint64_t total_steps = cfg.train.episodes * env_cfg.episode_length;
  std::uint64_t step = 0;
  for (std::size_t episode = 0; episode < cfg.train.episodes; ++episode) {
    EnvState state = env.reset(env_rng);
    RunRecord rec;
    rec.algorithm = to_string(algo);
    rec.seed = seed;
    rec.episode = episode;
    double reward_sum = 0.0, sr_sum = 0.0, see_sum = 0.0;
    bool done = false;
    while (!done) {
      const Eigen::VectorXd features = state.features();
      const std::uint64_t evals_before = agent.denoiser_evaluations();
      auto [action, expert] = agent.act(features, policy_rng);
      result.stats.acting_denoiser_evaluations += agent.denoiser_evaluations() - evals_before;
      if (expert && *expert < kMaxLoggedExperts) ++rec.expert_histogram[*expert];

      const double sigma = exploration_sigma(cfg.train, step, total_steps);
      for (Eigen::Index i = 0; i < action.size(); ++i)
        action(i) = std::clamp(action(i) + sigma * explore_rng.normal(), 0.0, 1.0);
      if (!action.allFinite() || (action.array() < 0.0).any() || (action.array() > 1.0).any())
        ++result.stats.out_of_box_actions;

      StepResult res = env.step(state, std::span<const double>(action.data(), action.size()), env_rng);
      buffer.push(features, action, res.reward, res.next_state.features(), res.done);
      reward_sum += res.reward;
      sr_sum += res.metrics.sr_sum;
      see_sum += res.metrics.see_sum;
      done = res.done;
      ++step;

      if (step >= cfg.train.warmup_steps && buffer.size() >= cfg.train.batch_size) {
        for (std::size_t u = 0; u < cfg.train.updates_per_step; ++u) {
          const Batch batch = buffer.sample(cfg.train.batch_size, replay_rng);
          try {
            agent.update(batch, update_rng);
          } catch (const std::runtime_error& e) {
            throw DivergenceError(e.what(), seed, step);
          }
          ++result.stats.updates;
        }
      }
      state = std::move(res.next_state);
    }
    if (!agent.parameters_finite()) throw DivergenceError("non-finite parameters", seed, step);
    const double n = static_cast<double>(env_cfg.episode_length);
    rec.mean_reward = reward_sum / n;
    rec.mean_sr_sum = sr_sum / n;
    rec.mean_see_sum = see_sum / n;
    if (on_record) on_record(rec);
    result.records.push_back(rec);
  }
  result.stats.env_steps = step;
  result.stats.clamp_events = env.clamp_events();
  result.last_channel = env.channel();
  return result;
}

}  // namespace fjam
