#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fjam/config.hpp"
#include "fjam/trainer.hpp"

namespace fjam {

struct RunOutcome {
  Algorithm algorithm = Algorithm::kGdm;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;  // divergence or I/O diagnostic when !ok
  std::size_t episodes_completed = 0;
  RunStats stats;
  std::filesystem::path csv;
  std::filesystem::path checkpoint;
  std::shared_ptr<Agent> agent;  // null when the run failed
  ChannelRealization last_channel;
};

struct SweepResult {
  std::vector<RunOutcome> runs;  // algorithm-major, seeds in configured order
  std::filesystem::path merged_csv;
  std::filesystem::path summary_csv;
  bool all_ok() const;
};

// "<algorithm>_seed<seed>"; the per-run CSV and checkpoint share this stem.
std::string run_stem(Algorithm algo, std::uint64_t seed);

// Trains every (algorithm, seed) pair on a pool of cfg.run.workers threads.
// Each run streams its CSV as it goes and saves a checkpoint when it finishes;
// merged.csv and summary.csv are written after all workers are done. Progress
// lines go to `log` when given.
SweepResult run_sweep(const RunConfig& cfg, std::ostream* log = nullptr);

}  // namespace fjam
