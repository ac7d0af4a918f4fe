#include "glosa/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace glosa {

BandGrid::BandGrid(std::vector<double> starts_, std::vector<double> ends_)
    : starts(std::move(starts_)), ends(std::move(ends_)) {
  if (starts.size() != ends.size())
    throw ArgumentError("BandGrid: starts/ends length mismatch");
  for (std::size_t c = 0; c < starts.size(); ++c) {
    if (!(starts[c] >= 0.0)) throw ArgumentError("BandGrid: band starts must be >= 0");
    if (!(starts[c] < ends[c])) throw ArgumentError("BandGrid: zero or negative band width");
    if (c > 0 && !(starts[c] >= ends[c - 1]))
      throw ArgumentError("BandGrid: bands must be sorted and disjoint");
  }
}

BandGrid BandGrid::uniform(int num_bands, double omega_max) {
  if (num_bands < 1) throw ArgumentError("BandGrid::uniform: need at least one band");
  if (!(omega_max > 0.0)) throw ArgumentError("BandGrid::uniform: omega_max must be positive");
  const double delta = omega_max / num_bands;
  std::vector<double> s(num_bands), e(num_bands);
  for (int c = 0; c < num_bands; ++c) {
    s[c] = c * delta;
    e[c] = (c + 1) * delta;
  }
  return BandGrid(std::move(s), std::move(e));
}

double BandGrid::total_width() const {
  double w = 0.0;
  for (int c = 0; c < size(); ++c) w += width(c);
  return w;
}

std::complex<double> wideband_entry(double t, double omega_start, double omega_end) {
  const double w = omega_end - omega_start;
  if (t == 0.0) return {w, 0.0};
  // (e^{i w_e t} - e^{i w_s t}) / (i t), factored as e^{i w_s t} (e^{i d} - 1)/(i t)
  // with d = w t. The half-angle form avoids cancellation for small d.
  const double d = w * t;
  const double re = std::sin(d) / t;
  const double sh = std::sin(0.5 * d);
  const double im = 2.0 * sh * sh / t;
  return std::polar(1.0, omega_start * t) * std::complex<double>(re, im);
}

std::vector<WidebandDictionary> build_wideband(const RecordSet& records, const BandGrid& grid) {
  std::vector<WidebandDictionary> out;
  out.reserve(records.size());
  const int C = grid.size();
  for (const auto& rec : records.records) {
    WidebandDictionary d;
    d.record_id = rec.id;
    d.grid = grid;
    d.atoms.resize(static_cast<Eigen::Index>(rec.size()), C);
    for (std::size_t n = 0; n < rec.size(); ++n)
      for (int c = 0; c < C; ++c)
        d.atoms(static_cast<Eigen::Index>(n), c) =
            wideband_entry(rec.times[n], grid.starts[c], grid.ends[c]);
    out.push_back(std::move(d));
  }
  return out;
}

NarrowbandMatrix build_narrowband(const Record& record, const std::vector<double>& omegas) {
  if (omegas.empty()) throw ArgumentError("build_narrowband: empty frequency list");
  std::set<double> uniq(omegas.begin(), omegas.end());
  if (uniq.size() != omegas.size())
    throw ArgumentError("build_narrowband: duplicate frequencies");
  for (double w : omegas)
    if (!(w > 0.0)) throw ArgumentError("build_narrowband: frequencies must be positive");

  NarrowbandMatrix nb;
  nb.record_id = record.id;
  nb.omegas = omegas;
  const auto N = static_cast<Eigen::Index>(record.size());
  const auto K = static_cast<Eigen::Index>(omegas.size());
  nb.columns.resize(N, 2 * K);
  for (Eigen::Index n = 0; n < N; ++n) {
    const double t = record.times[static_cast<std::size_t>(n)];
    for (Eigen::Index k = 0; k < K; ++k) {
      nb.columns(n, 2 * k) = std::cos(omegas[static_cast<std::size_t>(k)] * t);
      nb.columns(n, 2 * k + 1) = std::sin(omegas[static_cast<std::size_t>(k)] * t);
    }
  }
  return nb;
}

std::vector<NarrowbandMatrix> build_narrowband(const RecordSet& records,
                                               const std::vector<double>& omegas) {
  std::vector<NarrowbandMatrix> out;
  out.reserve(records.size());
  for (const auto& rec : records.records) out.push_back(build_narrowband(rec, omegas));
  return out;
}

BandGrid refine_grid(const BandGrid& parent, const std::vector<int>& active, int subdivisions) {
  if (subdivisions < 2) throw ArgumentError("refine_grid: need at least 2 subdivisions");
  if (active.empty()) throw NoActiveBandsError(-1, {});
  std::vector<int> idx = active;
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  if (idx.front() < 0 || idx.back() >= parent.size())
    throw ArgumentError("refine_grid: active index out of range");

  std::vector<double> s, e;
  s.reserve(idx.size() * subdivisions);
  e.reserve(idx.size() * subdivisions);
  for (int c : idx) {
    const double step = parent.width(c) / subdivisions;
    for (int j = 0; j < subdivisions; ++j) {
      s.push_back(parent.starts[c] + j * step);
      e.push_back(j + 1 == subdivisions ? parent.ends[c] : parent.starts[c] + (j + 1) * step);
    }
  }
  return BandGrid(std::move(s), std::move(e));
}

} // namespace glosa
