#include "glosa/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace glosa {

namespace {

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ArgumentError("periodogram: empty frequency grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0))
      throw ArgumentError("periodogram: grid must be strictly positive (omega = 0 undefined)");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw ArgumentError("periodogram: grid must be strictly increasing");
  }
}

std::vector<double> lomb_scargle_raw(const std::vector<double>& times,
                                     const std::vector<double>& values,
                                     const std::vector<double>& grid) {
  const std::size_t n = times.size();
  std::vector<double> power(grid.size(), 0.0);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double w = grid[j];
    double s2 = 0.0, c2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s2 += std::sin(2.0 * w * times[i]);
      c2 += std::cos(2.0 * w * times[i]);
    }
    const double tau = 0.5 * std::atan2(s2, c2) / w;
    double yc = 0.0, ys = 0.0, cc = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double arg = w * (times[i] - tau);
      const double c = std::cos(arg), s = std::sin(arg);
      yc += values[i] * c;
      ys += values[i] * s;
      cc += c * c;
      ss += s * s;
    }
    double p = 0.0;
    if (cc > 1e-12 * n) p += yc * yc / cc;
    if (ss > 1e-12 * n) p += ys * ys / ss;
    power[j] = 0.5 * p;
  }
  return power;
}

} // namespace

std::string method_name(PeriodogramMethod m) {
  switch (m) {
    case PeriodogramMethod::lomb_scargle: return "lomb_scargle";
    case PeriodogramMethod::mean: return "mean";
    case PeriodogramMethod::stacked: return "stacked";
  }
  return "unknown";
}

std::vector<double> default_grid(const RecordSet& records, double omega_max) {
  if (!(omega_max > 0.0)) throw ArgumentError("default_grid: omega_max must be positive");
  double span = 0.0;
  for (const auto& r : records.records)
    span = std::max(span, r.times.back() - r.times.front());
  if (!(span > 0.0)) throw ArgumentError("default_grid: records have no time span");
  double step = 2.0 * std::numbers::pi / span / 4.0;
  const std::size_t max_points = 100000;
  if (omega_max / step > static_cast<double>(max_points))
    step = omega_max / static_cast<double>(max_points);
  std::vector<double> grid;
  for (double w = step; w <= omega_max + 1e-12 * step; w += step) grid.push_back(w);
  return grid;
}

PeriodogramEstimate lomb_scargle(const Record& record, const std::vector<double>& grid) {
  check_grid(grid);
  PeriodogramEstimate est;
  est.grid = grid;
  est.power = lomb_scargle_raw(record.times, record.values, grid);
  est.method = PeriodogramMethod::lomb_scargle;
  return est;
}

PeriodogramEstimate mean_periodogram(const RecordSet& records, const std::vector<double>& grid) {
  check_grid(grid);
  PeriodogramEstimate est;
  est.grid = grid;
  est.power.assign(grid.size(), 0.0);
  for (const auto& r : records.records) {
    const Record s = r.standardized();
    const auto p = lomb_scargle_raw(s.times, s.values, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) est.power[j] += p[j];
  }
  const double inv = 1.0 / static_cast<double>(records.size());
  for (auto& p : est.power) p *= inv;
  est.method = PeriodogramMethod::mean;
  return est;
}

PeriodogramEstimate stacked_periodogram(const RecordSet& records,
                                        const std::vector<double>& grid) {
  check_grid(grid);
  std::vector<std::pair<double, double>> merged;
  merged.reserve(records.total_samples());
  for (const auto& r : records.records) {
    const Record s = r.standardized();
    for (std::size_t i = 0; i < s.size(); ++i) merged.emplace_back(s.times[i], s.values[i]);
  }
  std::stable_sort(merged.begin(), merged.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> times(merged.size()), values(merged.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    times[i] = merged[i].first;
    values[i] = merged[i].second;
  }
  PeriodogramEstimate est;
  est.grid = grid;
  est.power = lomb_scargle_raw(times, values, grid);
  est.method = PeriodogramMethod::stacked;
  return est;
}

std::vector<double> pick_peaks(const PeriodogramEstimate& est, int k) {
  if (k < 1) throw ArgumentError("pick_peaks: need k >= 1");
  std::vector<std::pair<double, double>> peaks; // (power, frequency)
  for (std::size_t i = 1; i + 1 < est.grid.size(); ++i)
    if (est.power[i] > est.power[i - 1] && est.power[i] > est.power[i + 1])
      peaks.emplace_back(est.power[i], est.grid[i]);
  if (static_cast<int>(peaks.size()) < k) {
    std::vector<double> found;
    for (const auto& [p, w] : peaks) found.push_back(w);
    std::sort(found.begin(), found.end());
    throw PeakCountError(k, std::move(found));
  }
  std::partial_sort(peaks.begin(), peaks.begin() + k, peaks.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back(peaks[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace glosa
