#include "codssi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "codssi/errors.hpp"

namespace codssi {
namespace {

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0;
  double rank = p * (static_cast<double>(sorted.size()) - 1);
  size_t lo = static_cast<size_t>(rank);
  size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = rank - static_cast<double>(lo);
  return sorted[lo] * (1 - frac) + sorted[hi] * frac;
}

std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  return out;
}

}  // namespace

StatRecord trim_stats(const std::string& phase, uint64_t n, const std::string& metric,
                      std::vector<double> samples, double trim_fraction) {
  if (samples.empty()) throw Error("no samples for " + phase);
  if (trim_fraction < 0 || trim_fraction >= 0.5) throw Error("bad trim fraction");
  std::sort(samples.begin(), samples.end());
  size_t cut = static_cast<size_t>(static_cast<double>(samples.size()) * trim_fraction);
  std::vector<double> kept(samples.begin() + cut, samples.end() - cut);

  StatRecord rec;
  rec.phase = phase;
  rec.n = n;
  rec.metric = metric;
  rec.outliers = 2 * cut;
  double sum = 0;
  for (double v : kept) sum += v;
  rec.mean = sum / static_cast<double>(kept.size());
  rec.max = kept.back();
  rec.p25 = percentile(kept, 0.25);
  rec.p50 = percentile(kept, 0.50);
  rec.p75 = percentile(kept, 0.75);
  return rec;
}

std::string write_csv(const std::vector<StatRecord>& records) {
  std::ostringstream os;
  os << "phase,n,metric,mean,max,p25,p50,p75,outliers\n";
  os.precision(6);
  os << std::fixed;
  for (const auto& r : records) {
    os << r.phase << ',' << r.n << ',' << r.metric << ',' << r.mean << ',' << r.max
       << ',' << r.p25 << ',' << r.p50 << ',' << r.p75 << ',' << r.outliers << '\n';
  }
  return os.str();
}

std::vector<StatRecord> read_csv(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line) || line != "phase,n,metric,mean,max,p25,p50,p75,outliers") {
    throw Error("unrecognized CSV header");
  }
  std::vector<StatRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto fields = split_line(line, ',');
    if (fields.size() != 9) throw Error("bad CSV row: " + line);
    StatRecord r;
    r.phase = fields[0];
    r.n = std::stoull(fields[1]);
    r.metric = fields[2];
    r.mean = std::stod(fields[3]);
    r.max = std::stod(fields[4]);
    r.p25 = std::stod(fields[5]);
    r.p50 = std::stod(fields[6]);
    r.p75 = std::stod(fields[7]);
    r.outliers = std::stoull(fields[8]);
    out.push_back(std::move(r));
  }
  return out;
}

const StatRecord* find_record(const std::vector<StatRecord>& records,
                              const std::string& phase, uint64_t n) {
  for (const auto& r : records) {
    if (r.phase == phase && r.n == n) return &r;
  }
  return nullptr;
}

double loglog_slope(const std::vector<std::pair<double, double>>& points) {
  std::vector<std::pair<double, double>> logs;
  logs.reserve(points.size());
  for (const auto& [x, y] : points) {
    if (x <= 0 || y <= 0) throw Error("log-log fit needs positive data");
    logs.emplace_back(std::log(x), std::log(y));
  }
  return linear_fit(logs).slope;
}

LinearFit linear_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw Error("fit needs at least two points");
  double n = static_cast<double>(points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0) throw Error("degenerate fit");
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_tot = syy - sy * sy / n;
  double ss_res = 0;
  for (const auto& [x, y] : points) {
    double e = y - (fit.intercept + fit.slope * x);
    ss_res += e * e;
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace codssi
