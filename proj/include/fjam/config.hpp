#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "fjam/channel.hpp"
#include "fjam/env.hpp"
#include "fjam/trainer.hpp"

namespace fjam {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunSection {
  std::vector<Algorithm> algorithms{Algorithm::kMoeGdm, Algorithm::kGdm, Algorithm::kDdpg};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string output_dir = "runs";
  std::size_t workers = 3;
  std::size_t oracle_resolution = 21;
  std::uint64_t oracle_budget = 10'000'000;
  bool operator==(const RunSection&) const = default;
};

// Everything a sweep needs. Sections in the file: [scenario] [env] [training]
// [diffusion] [moe] [network] [run].
struct RunConfig {
  ScenarioConfig scenario = ScenarioConfig::default_scenario();
  EnvConfig env = EnvConfig::defaults();
  AgentConfig agent;
  RunSection run;

  bool operator==(const RunConfig& o) const {
    return scenario == o.scenario && env == o.env && agent.network == o.agent.network &&
           agent.diffusion == o.agent.diffusion && agent.moe == o.agent.moe &&
           agent.train == o.agent.train && run == o.run;
  }
};

// Parses INI-style text; missing keys keep their defaults. Unknown sections or
// keys and invariant violations raise ConfigError naming the key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// Full config with every key written out; parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& cfg);

// Throws ConfigError naming the offending key.
void validate(const RunConfig& cfg);

}  // namespace fjam
