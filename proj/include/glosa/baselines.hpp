#ifndef GLOSA_BASELINES_HPP
#define GLOSA_BASELINES_HPP

#include <string>
#include <vector>

#include "glosa/core.hpp"

namespace glosa {

enum class PeriodogramMethod { lomb_scargle, mean, stacked };
std::string method_name(PeriodogramMethod m);

struct PeriodogramEstimate {
  std::vector<double> grid;  // rad/kyr, strictly increasing, > 0
  std::vector<double> power; // >= 0, finite
  PeriodogramMethod method = PeriodogramMethod::lomb_scargle;
};

// Evaluation grid: 4x oversampled relative to the Rayleigh resolution of the
// longest record, capped at 100000 points, spanning (0, omega_max].
std::vector<double> default_grid(const RecordSet& records, double omega_max);

// Classical Lomb-Scargle power with the per-frequency tau offset.
PeriodogramEstimate lomb_scargle(const Record& record, const std::vector<double>& grid);

// Standardize each record, Lomb-Scargle each, pointwise mean.
PeriodogramEstimate mean_periodogram(const RecordSet& records, const std::vector<double>& grid);

// Standardize each record, merge all samples into one series ordered by time
// (duplicate timestamps across records allowed), Lomb-Scargle the merge.
PeriodogramEstimate stacked_periodogram(const RecordSet& records,
                                        const std::vector<double>& grid);

// The K largest strict local maxima, sorted ascending by frequency.
// Throws PeakCountError (listing what was found) if fewer than K exist.
std::vector<double> pick_peaks(const PeriodogramEstimate& est, int k);

} // namespace glosa

#endif
