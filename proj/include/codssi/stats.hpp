#pragma once

#include <string>
#include <vector>

#include "codssi/bytes.hpp"

namespace codssi {

// One benchmark measurement series after tail trimming.
struct StatRecord {
  std::string phase;
  uint64_t n = 0;
  std::string metric;  // "time_us" or "bytes"
  double mean = 0;
  double max = 0;
  double p25 = 0;
  double p50 = 0;
  double p75 = 0;
  uint64_t outliers = 0;  // samples trimmed away (both tails)
};

// Sorts a copy, drops floor(samples * trim_fraction) from each tail, then
// computes the summary over what is left.
StatRecord trim_stats(const std::string& phase, uint64_t n, const std::string& metric,
                      std::vector<double> samples, double trim_fraction);

// phase,n,metric,mean,max,p25,p50,p75,outliers
std::string write_csv(const std::vector<StatRecord>& records);
std::vector<StatRecord> read_csv(const std::string& csv);

const StatRecord* find_record(const std::vector<StatRecord>& records,
                              const std::string& phase, uint64_t n);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<std::pair<double, double>>& points);

// Ordinary linear fit y = a + b x; returns {a, b, r_squared}.
struct LinearFit {
  double intercept = 0;
  double slope = 0;
  double r_squared = 0;
};
LinearFit linear_fit(const std::vector<std::pair<double, double>>& points);

}  // namespace codssi
