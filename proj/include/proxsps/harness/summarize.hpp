#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "proxsps/harness/experiment.hpp"

namespace proxsps::harness {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw CsvError("results csv: unexpected header");
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10) throw CsvError("results csv line " + std::to_string(lineno) + ": expected 10 columns");
    auto num = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0') {
        throw CsvError("results csv line " + std::to_string(lineno) + ": bad number '" + s + "'");
      }
      return v;
    };
    auto whole = [&](const std::string& s) {
      char* end = nullptr;
      errno = 0;
      const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
      if (s.empty() || end == s.c_str() || *end != '\0' || errno == ERANGE) {
        throw CsvError("results csv line " + std::to_string(lineno) + ": bad integer '" + s + "'");
      }
      return v;
    };
    ResultRow r;
    r.run_id = cells[0];
    r.seed = whole(cells[1]);
    r.row.epoch = whole(cells[2]);
    r.row.objective = num(cells[3]);
    r.row.train_loss = num(cells[4]);
    r.row.val_metric = num(cells[5]);
    r.row.param_norm = num(cells[6]);
    r.row.zeta_median = num(cells[7]);
    r.row.step_median = num(cells[8]);
    r.row.diverged = whole(cells[9]) != 0;
    rows.push_back(std::move(r));
  }
  return rows;
}

struct SummaryRow {
  std::string run_id;
  std::size_t seeds = 0;
  double objective = 0.0;  // mean over seeds of the window median
  double objective_std = 0.0;
  double val_metric = 0.0;
  double val_metric_std = 0.0;
  double param_norm = 0.0;
  double param_norm_std = 0.0;
  std::size_t diverged_seeds = 0;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

}  // namespace detail

// Per run id: median over epochs [first, last] for each seed, then mean and
// population standard deviation across seeds. A seed that diverged inside the
// window makes the metrics +inf and is counted in diverged_seeds.
inline std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows, std::size_t first, std::size_t last) {
  if (first < 1 || first > last) throw std::invalid_argument("summarize: window must satisfy 1 <= a <= b");
  std::size_t max_epoch = 0;
  for (const ResultRow& r : rows) max_epoch = std::max(max_epoch, r.row.epoch);
  if (last > max_epoch) throw std::invalid_argument("summarize: window ends after the last recorded epoch");

  struct SeedData {
    std::vector<double> obj, val, norm;
    bool diverged = false;
  };
  std::vector<std::string> order;
  std::map<std::string, std::map<std::uint64_t, SeedData>> groups;
  for (const ResultRow& r : rows) {
    if (r.row.epoch < first || r.row.epoch > last) continue;
    if (!groups.count(r.run_id)) order.push_back(r.run_id);
    SeedData& s = groups[r.run_id][r.seed];
    s.obj.push_back(r.row.objective);
    s.val.push_back(r.row.val_metric);
    s.norm.push_back(r.row.param_norm);
    s.diverged = s.diverged || r.row.diverged;
  }
  if (order.empty()) throw std::invalid_argument("summarize: no rows inside the window");

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<SummaryRow> out;
  for (const std::string& id : order) {
    SummaryRow s;
    s.run_id = id;
    std::vector<double> obj, val, norm;
    for (const auto& [seed, d] : groups.at(id)) {
      ++s.seeds;
      if (d.diverged) ++s.diverged_seeds;
      obj.push_back(proxsps::detail::median(d.obj));
      val.push_back(proxsps::detail::median(d.val));
      norm.push_back(proxsps::detail::median(d.norm));
    }
    if (s.diverged_seeds > 0) {
      s.objective = s.val_metric = s.param_norm = inf;
      s.objective_std = s.val_metric_std = s.param_norm_std = inf;
    } else {
      std::tie(s.objective, s.objective_std) = detail::mean_std(obj);
      std::tie(s.val_metric, s.val_metric_std) = detail::mean_std(val);
      std::tie(s.param_norm, s.param_norm_std) = detail::mean_std(norm);
    }
    out.push_back(s);
  }
  return out;
}

inline void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "run_id,seeds,objective,objective_std,val_metric,val_metric_std,param_norm,param_norm_std,diverged_seeds\n";
  for (const SummaryRow& s : rows) {
    out << s.run_id << ',' << s.seeds << ',' << format_double(s.objective) << ',' << format_double(s.objective_std)
        << ',' << format_double(s.val_metric) << ',' << format_double(s.val_metric_std) << ','
        << format_double(s.param_norm) << ',' << format_double(s.param_norm_std) << ',' << s.diverged_seeds << '\n';
  }
}

}  // namespace proxsps::harness
