#include "fjam/records.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fjam/format.hpp"

namespace fjam {

namespace {

const std::vector<std::string>& columns() {
  static const std::vector<std::string> cols = {
      "algorithm",   "seed",         "episode",  "mean_reward", "mean_sr_sum",
      "mean_see_sum", "expert_0",    "expert_1", "expert_2"};
  return cols;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::uint64_t parse_count(const std::string& column, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
    throw SchemaError(column, "expected a non-negative integer, got '" + text + "'");
  try {
    return std::stoull(text);
  } catch (const std::out_of_range&) {
    throw SchemaError(column, "integer out of range: '" + text + "'");
  }
}

double parse_value(const std::string& column, const std::string& text) {
  try {
    return parse_double(text);
  } catch (const std::exception&) {
    throw SchemaError(column, "expected a number, got '" + text + "'");
  }
}

}  // namespace

std::string csv_row(const RunRecord& rec) {
  std::string out = rec.algorithm + "," + std::to_string(rec.seed) + "," +
                    std::to_string(rec.episode) + "," + format_double(rec.mean_reward) + "," +
                    format_double(rec.mean_sr_sum) + "," + format_double(rec.mean_see_sum);
  for (std::uint64_t c : rec.expert_histogram) out += "," + std::to_string(c);
  return out;
}

void write_csv_header(std::ostream& os) { os << kCsvHeader << '\n'; }

void write_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  write_csv_header(os);
  for (const RunRecord& r : records) os << csv_row(r) << '\n';
}

void write_csv(const std::filesystem::path& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  write_csv(out, records);
}

std::vector<RunRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw SchemaError("algorithm", "empty file, header missing");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  const auto& cols = columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i >= header.size()) throw SchemaError(cols[i], "missing from header");
    if (header[i] != cols[i])
      throw SchemaError(cols[i], "header has '" + header[i] + "' in its position");
  }
  if (header.size() > cols.size()) throw SchemaError(header[cols.size()], "unexpected column");

  std::vector<RunRecord> out;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() < cols.size()) throw SchemaError(cols[f.size()], "missing value");
    if (f.size() > cols.size()) throw SchemaError("expert_2", "too many fields in row");
    RunRecord r;
    if (f[0].empty()) throw SchemaError("algorithm", "empty value");
    r.algorithm = f[0];
    r.seed = parse_count("seed", f[1]);
    r.episode = static_cast<std::size_t>(parse_count("episode", f[2]));
    r.mean_reward = parse_value("mean_reward", f[3]);
    r.mean_sr_sum = parse_value("mean_sr_sum", f[4]);
    r.mean_see_sum = parse_value("mean_see_sum", f[5]);
    for (std::size_t k = 0; k < kMaxLoggedExperts; ++k)
      r.expert_histogram[k] = parse_count(cols[6 + k], f[6 + k]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RunRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  return read_csv(in);
}

const AlgorithmSummary* Comparison::find(const std::string& algorithm) const {
  for (const auto& a : algorithms)
    if (a.algorithm == algorithm) return &a;
  return nullptr;
}

Comparison compare(const std::vector<RunRecord>& records) {
  // algorithm -> seed -> rewards ordered by episode
  std::map<std::string, std::map<std::uint64_t, std::vector<std::pair<std::size_t, double>>>> runs;
  for (const RunRecord& r : records) runs[r.algorithm][r.seed].emplace_back(r.episode, r.mean_reward);

  Comparison cmp;
  for (auto& [algo, seeds] : runs) {
    AlgorithmSummary s;
    s.algorithm = algo;
    s.seeds = seeds.size();
    double sum_of_means = 0.0;
    bool first = true;
    for (auto& [seed, rows] : seeds) {
      std::sort(rows.begin(), rows.end());
      const std::size_t window = std::max<std::size_t>(1, (rows.size() + 9) / 10);
      double tail = 0.0;
      for (std::size_t i = rows.size() - window; i < rows.size(); ++i) tail += rows[i].second;
      sum_of_means += tail / static_cast<double>(window);
      for (const auto& row : rows) {
        if (first || row.second > s.max_reward) s.max_reward = row.second;
        first = false;
      }
      s.rows += rows.size();
    }
    s.final_mean = sum_of_means / static_cast<double>(s.seeds);
    cmp.algorithms.push_back(s);
  }
  std::stable_sort(cmp.algorithms.begin(), cmp.algorithms.end(),
                   [](const auto& a, const auto& b) { return a.final_mean > b.final_mean; });
  for (std::size_t i = 0; i < cmp.algorithms.size(); ++i) {
    for (std::size_t j = i + 1; j < cmp.algorithms.size(); ++j) {
      const auto& a = cmp.algorithms[i];
      const auto& b = cmp.algorithms[j];
      Verdict v{a.algorithm, b.algorithm, 0.0, a.final_mean == b.final_mean};
      if (b.final_mean > 0.0) v.ratio = a.final_mean / b.final_mean;
      cmp.verdicts.push_back(v);
    }
  }
  return cmp;
}

void write_comparison(std::ostream& os, const Comparison& cmp) {
  os << "algorithm,final_mean,max_reward,seeds,rows\n";
  for (const auto& a : cmp.algorithms)
    os << a.algorithm << ',' << format_double(a.final_mean) << ',' << format_double(a.max_reward)
       << ',' << a.seeds << ',' << a.rows << '\n';
  for (const auto& v : cmp.verdicts) {
    os << "verdict: " << v.better << (v.tie ? " = " : " > ") << v.worse;
    if (v.ratio > 0.0) os << " (ratio " << format_double(v.ratio) << ")";
    os << '\n';
  }
}

std::vector<ScatterPoint> scatter(const std::vector<RunRecord>& records) {
  std::vector<ScatterPoint> out;
  out.reserve(records.size());
  for (const RunRecord& r : records) out.push_back({r.algorithm, r.mean_sr_sum, r.mean_see_sum});
  return out;
}

void write_scatter(std::ostream& os, const std::vector<ScatterPoint>& points) {
  os << "algorithm,mean_sr_sum,mean_see_sum\n";
  for (const auto& p : points)
    os << p.algorithm << ',' << format_double(p.mean_sr_sum) << ',' << format_double(p.mean_see_sum)
       << '\n';
}

}  // namespace fjam
