#include "fjam/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fjam/format.hpp"

namespace fjam {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) out.push_back(trim(item));
  return out;
}

std::uint64_t parse_unsigned(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
    // Allow integral values written in floating notation, e.g. 1e7.
    const double v = parse_double(t);
    if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::uint64_t>(v)))
      throw std::invalid_argument("not a non-negative integer: '" + t + "'");
    return static_cast<std::uint64_t>(v);
  }
  return std::stoull(t);
}

bool parse_bool(const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw std::invalid_argument("not a boolean: '" + t + "'");
}

std::vector<Position> parse_positions(const std::string& text) {
  std::vector<Position> out;
  for (const std::string& pair : split(text, ';')) {
    std::istringstream is(pair);
    std::string x, y, extra;
    if (!(is >> x >> y) || (is >> extra))
      throw std::invalid_argument("expected 'x y' pairs separated by ';'");
    out.push_back({parse_double(x), parse_double(y)});
  }
  return out;
}

std::string dump_positions(const std::vector<Position>& ps) {
  std::string out;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += "; ";
    out += format_double(ps[i].x) + " " + format_double(ps[i].y);
  }
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out;
}

std::vector<int> parse_widths(const std::string& text) {
  std::vector<int> out;
  for (const std::string& s : split(text, ','))
    out.push_back(static_cast<int>(parse_unsigned(s)));
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define FJAM_DOUBLE(sec, name, member)                                                     \
  Field {                                                                                  \
    sec, name, [](RunConfig& c, const std::string& v) { c.member = parse_double(v); },     \
        [](const RunConfig& c) { return format_double(c.member); }                         \
  }
#define FJAM_SIZE(sec, name, member)                                                       \
  Field {                                                                                  \
    sec, name,                                                                             \
        [](RunConfig& c, const std::string& v) {                                           \
          c.member = static_cast<decltype(c.member)>(parse_unsigned(v));                   \
        },                                                                                 \
        [](const RunConfig& c) { return std::to_string(c.member); }                        \
  }
#define FJAM_WIDTHS(sec, name, member)                                                     \
  Field {                                                                                  \
    sec, name, [](RunConfig& c, const std::string& v) { c.member = parse_widths(v); },     \
        [](const RunConfig& c) {                                                           \
          return join(c.member, [](int w) { return std::to_string(w); });                  \
        }                                                                                  \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"scenario", "ap_positions",
       [](RunConfig& c, const std::string& v) { c.scenario.ap_positions = parse_positions(v); },
       [](const RunConfig& c) { return dump_positions(c.scenario.ap_positions); }},
      {"scenario", "user_positions",
       [](RunConfig& c, const std::string& v) { c.scenario.user_positions = parse_positions(v); },
       [](const RunConfig& c) { return dump_positions(c.scenario.user_positions); }},
      {"scenario", "eve_positions",
       [](RunConfig& c, const std::string& v) { c.scenario.eve_positions = parse_positions(v); },
       [](const RunConfig& c) { return dump_positions(c.scenario.eve_positions); }},
      {"scenario", "user_to_ap",
       [](RunConfig& c, const std::string& v) {
         c.scenario.user_to_ap.clear();
         for (const auto& s : split(v, ','))
           c.scenario.user_to_ap.push_back(static_cast<std::size_t>(parse_unsigned(s)));
       },
       [](const RunConfig& c) {
         return join(c.scenario.user_to_ap, [](std::size_t a) { return std::to_string(a); });
       }},
      FJAM_DOUBLE("scenario", "p_max", scenario.p_max),
      FJAM_DOUBLE("scenario", "noise_power", scenario.noise_power),
      FJAM_DOUBLE("scenario", "path_loss_exponent", scenario.path_loss_exponent),
      FJAM_DOUBLE("scenario", "ref_distance", scenario.ref_distance),
      FJAM_DOUBLE("scenario", "ref_gain", scenario.ref_gain),

      FJAM_SIZE("env", "episode_length", env.episode_length),
      {"env", "freeze_channel",
       [](RunConfig& c, const std::string& v) { c.env.freeze_channel = parse_bool(v); },
       [](const RunConfig& c) { return std::string(c.env.freeze_channel ? "true" : "false"); }},
      FJAM_DOUBLE("env", "norm_mu", env.norm_mu),
      FJAM_DOUBLE("env", "norm_sigma", env.norm_sigma),
      FJAM_DOUBLE("env", "reward_weight", env.reward_weight),

      FJAM_SIZE("training", "episodes", agent.train.episodes),
      FJAM_DOUBLE("training", "gamma", agent.train.gamma),
      FJAM_DOUBLE("training", "tau", agent.train.tau),
      FJAM_SIZE("training", "batch_size", agent.train.batch_size),
      FJAM_DOUBLE("training", "lr_actor", agent.train.lr_actor),
      FJAM_DOUBLE("training", "lr_critic", agent.train.lr_critic),
      FJAM_DOUBLE("training", "lr_gate", agent.train.lr_gate),
      FJAM_SIZE("training", "buffer_capacity", agent.train.buffer_capacity),
      FJAM_SIZE("training", "warmup_steps", agent.train.warmup_steps),
      FJAM_SIZE("training", "updates_per_step", agent.train.updates_per_step),
      FJAM_DOUBLE("training", "explore_sigma_start", agent.train.explore_sigma_start),
      FJAM_DOUBLE("training", "explore_sigma_end", agent.train.explore_sigma_end),

      FJAM_SIZE("diffusion", "steps", agent.diffusion.steps),
      FJAM_DOUBLE("diffusion", "beta_min", agent.diffusion.beta_min),
      FJAM_DOUBLE("diffusion", "beta_max", agent.diffusion.beta_max),
      FJAM_SIZE("diffusion", "time_embed_dim", agent.diffusion.time_embed_dim),
      FJAM_DOUBLE("diffusion", "prior_scale", agent.diffusion.prior_scale),

      FJAM_SIZE("moe", "experts", agent.moe.experts),
      FJAM_DOUBLE("moe", "load_balance", agent.moe.load_balance),
      {"moe", "routing",
       [](RunConfig& c, const std::string& v) {
         const std::string t = trim(v);
         if (t != "learned" && t != "fixed")
           throw std::invalid_argument("expected 'learned' or 'fixed'");
         c.agent.moe.fixed_routing = t == "fixed";
       },
       [](const RunConfig& c) { return std::string(c.agent.moe.fixed_routing ? "fixed" : "learned"); }},
      FJAM_SIZE("moe", "fixed_expert", agent.moe.fixed_expert),

      FJAM_WIDTHS("network", "critic_hidden", agent.network.critic_hidden),
      FJAM_WIDTHS("network", "denoiser_hidden", agent.network.denoiser_hidden),
      FJAM_WIDTHS("network", "gate_hidden", agent.network.gate_hidden),
      FJAM_WIDTHS("network", "actor_hidden", agent.network.actor_hidden),

      {"run", "algorithms",
       [](RunConfig& c, const std::string& v) {
         c.run.algorithms.clear();
         for (const auto& s : split(v, ',')) c.run.algorithms.push_back(algorithm_from_string(s));
       },
       [](const RunConfig& c) {
         return join(c.run.algorithms, [](Algorithm a) { return to_string(a); });
       }},
      {"run", "seeds",
       [](RunConfig& c, const std::string& v) {
         c.run.seeds.clear();
         for (const auto& s : split(v, ',')) c.run.seeds.push_back(parse_unsigned(s));
       },
       [](const RunConfig& c) {
         return join(c.run.seeds, [](std::uint64_t s) { return std::to_string(s); });
       }},
      {"run", "output_dir", [](RunConfig& c, const std::string& v) { c.run.output_dir = trim(v); },
       [](const RunConfig& c) { return c.run.output_dir; }},
      FJAM_SIZE("run", "workers", run.workers),
      FJAM_SIZE("run", "oracle_resolution", run.oracle_resolution),
      FJAM_SIZE("run", "oracle_budget", run.oracle_budget),
  };
  return table;
}

#undef FJAM_DOUBLE
#undef FJAM_SIZE
#undef FJAM_WIDTHS

}  // namespace

void validate(const RunConfig& cfg) {
  auto wrap = [](const std::string& section, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(section + "." + e.what());
    }
  };
  wrap("scenario", [&] { cfg.scenario.validate(); });
  wrap("env", [&] {
    if (cfg.env.episode_length == 0) throw std::invalid_argument("episode_length: must be > 0");
    if (!(cfg.env.norm_sigma > 0.0)) throw std::invalid_argument("norm_sigma: must be > 0");
    if (!(cfg.env.reward_weight >= 0.0)) throw std::invalid_argument("reward_weight: must be >= 0");
  });
  wrap("training", [&] { fjam::validate(cfg.agent, cfg.env.episode_length); });
  wrap("run", [&] {
    if (cfg.run.workers == 0) throw std::invalid_argument("workers: must be > 0");
    if (cfg.run.oracle_resolution < 2) throw std::invalid_argument("oracle_resolution: must be >= 2");
  });
}

RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  std::map<std::string, std::map<std::string, const Field*>> index;
  for (const Field& f : fields()) index[f.section][f.key] = &f;

  RunConfig cfg;
  std::set<std::string> seen;
  for (const auto& [section, keys] : tree) {
    const auto sec = index.find(section);
    if (sec == index.end()) {
      if (keys.empty()) throw ConfigError("unknown key '" + section + "' outside any section");
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, value] : keys) {
      const auto f = sec->second.find(key);
      if (f == sec->second.end()) throw ConfigError("unknown key " + section + "." + key);
      try {
        f->second->set(cfg, value.data());
      } catch (const std::exception& e) {
        throw ConfigError(section + "." + key + ": " + e.what());
      }
      seen.insert(section + "." + key);
    }
  }
  // Normalization defaults follow the configured geometry unless given explicitly.
  if (!seen.count("env.norm_mu") || !seen.count("env.norm_sigma")) {
    EnvConfig derived;
    try {
      derived = EnvConfig::defaults_for(cfg.scenario);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("scenario: ") + e.what());
    }
    if (!seen.count("env.norm_mu")) cfg.env.norm_mu = derived.norm_mu;
    if (!seen.count("env.norm_sigma")) cfg.env.norm_sigma = derived.norm_sigma;
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& cfg) {
  std::string out;
  std::string current;
  for (const Field& f : fields()) {
    if (f.section != current) {
      if (!current.empty()) out += "\n";
      out += "[" + f.section + "]\n";
      current = f.section;
    }
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

}  // namespace fjam
