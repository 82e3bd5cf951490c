#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fjam/trainer.hpp"

namespace fjam {

inline constexpr const char* kCsvHeader =
    "algorithm,seed,episode,mean_reward,mean_sr_sum,mean_see_sum,expert_0,expert_1,expert_2";

class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& column, const std::string& what)
      : std::runtime_error("column '" + column + "': " + what), column_(column) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

std::string csv_row(const RunRecord& rec);
void write_csv_header(std::ostream& os);
void write_csv(std::ostream& os, const std::vector<RunRecord>& records);
void write_csv(const std::filesystem::path& path, const std::vector<RunRecord>& records);

// Strict reader: the header must match exactly and every field must parse.
std::vector<RunRecord> read_csv(std::istream& is);
std::vector<RunRecord> read_csv(const std::filesystem::path& path);

struct AlgorithmSummary {
  std::string algorithm;
  double final_mean = 0.0;  // last 10% of each seed's episodes, averaged over seeds
  double max_reward = 0.0;  // best single-episode mean reward
  std::size_t seeds = 0;
  std::size_t rows = 0;
};

struct Verdict {
  std::string better;
  std::string worse;
  double ratio = 0.0;  // better.final_mean / worse.final_mean (0 when undefined)
  bool tie = false;
};

struct Comparison {
  std::vector<AlgorithmSummary> algorithms;  // sorted by final_mean, descending
  std::vector<Verdict> verdicts;             // every unordered pair once
  const AlgorithmSummary* find(const std::string& algorithm) const;
};

// Window per seed is max(1, ceil(episodes / 10)).
Comparison compare(const std::vector<RunRecord>& records);
void write_comparison(std::ostream& os, const Comparison& cmp);

struct ScatterPoint {
  std::string algorithm;
  double mean_sr_sum = 0.0;
  double mean_see_sum = 0.0;
};

std::vector<ScatterPoint> scatter(const std::vector<RunRecord>& records);
void write_scatter(std::ostream& os, const std::vector<ScatterPoint>& points);

}  // namespace fjam
