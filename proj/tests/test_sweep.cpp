#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fjam/records.hpp"
#include "fjam/sweep.hpp"

using namespace fjam;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_sweep(const fs::path& out) {
  RunConfig cfg;
  cfg.agent.network.critic_hidden = {8};
  cfg.agent.network.denoiser_hidden = {8};
  cfg.agent.network.gate_hidden = {4};
  cfg.agent.network.actor_hidden = {8};
  cfg.agent.train.episodes = 3;
  cfg.agent.train.warmup_steps = 10;
  cfg.agent.train.batch_size = 4;
  cfg.env.episode_length = 10;
  cfg.run.algorithms = {Algorithm::kGdm};
  cfg.run.seeds = {1, 2};
  cfg.run.workers = 2;
  cfg.run.output_dir = out.string();
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("sweep writes one CSV per run plus merged and summary files") {
  const fs::path out = fs::temp_directory_path() / "fjam_test_sweep";
  fs::remove_all(out);
  const SweepResult r = run_sweep(tiny_sweep(out));
  CHECK(r.all_ok());
  REQUIRE(r.runs.size() == 2);
  CHECK(fs::exists(out / "gdm_seed1.csv"));
  CHECK(fs::exists(out / "gdm_seed2.csv"));
  CHECK(fs::exists(out / "gdm_seed1.ckpt"));
  CHECK(fs::exists(r.merged_csv));
  CHECK(fs::exists(r.summary_csv));
  CHECK(read_csv(r.merged_csv).size() == 6);
  CHECK(read_csv(out / "gdm_seed2.csv").size() == 3);
  CHECK(run_stem(Algorithm::kMoeGdm, 12) == "moe_gdm_seed12");

  // Worker count must not change any run's output.
  const fs::path serial = fs::temp_directory_path() / "fjam_test_sweep_serial";
  fs::remove_all(serial);
  RunConfig one = tiny_sweep(serial);
  one.run.workers = 1;
  run_sweep(one);
  CHECK(slurp(out / "gdm_seed1.csv") == slurp(serial / "gdm_seed1.csv"));
  CHECK(slurp(out / "merged.csv") == slurp(serial / "merged.csv"));
  fs::remove_all(out);
  fs::remove_all(serial);
}
