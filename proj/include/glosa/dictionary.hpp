#ifndef GLOSA_DICTIONARY_HPP
#define GLOSA_DICTIONARY_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "glosa/core.hpp"

namespace glosa {

// Ordered set of disjoint frequency bands [starts[c], ends[c]] in rad/kyr.
// Only the non-negative half is materialized; the negative half is implied
// by conjugate symmetry of real signals.
struct BandGrid {
  std::vector<double> starts;
  std::vector<double> ends;

  BandGrid() = default;
  BandGrid(std::vector<double> starts, std::vector<double> ends);

  // C_1 equal-width bands covering (0, omega_max].
  static BandGrid uniform(int num_bands, double omega_max);

  int size() const { return static_cast<int>(starts.size()); }
  double width(int c) const { return ends[c] - starts[c]; }
  double center(int c) const { return 0.5 * (starts[c] + ends[c]); }
  double total_width() const;
};

// Integrated band atoms per record: entry (n, c) = int_{w_s}^{w_e} e^{i w t_n} dw.
struct WidebandDictionary {
  std::string record_id;
  BandGrid grid;
  Eigen::MatrixXcd atoms; // N_m x C
};

// Real paired cos/sin columns at candidate frequencies:
// [cos(w_1 T) sin(w_1 T) ... cos(w_K T) sin(w_K T)], N_m x 2K.
struct NarrowbandMatrix {
  std::string record_id;
  std::vector<double> omegas;
  Eigen::MatrixXd columns;
};

// Closed-form band integral; width at t = 0.
std::complex<double> wideband_entry(double t, double omega_start, double omega_end);

std::vector<WidebandDictionary> build_wideband(const RecordSet& records, const BandGrid& grid);

std::vector<NarrowbandMatrix> build_narrowband(const RecordSet& records,
                                               const std::vector<double>& omegas);
NarrowbandMatrix build_narrowband(const Record& record, const std::vector<double>& omegas);

// Split each active band into `subdivisions` equal-width sub-bands.
// Throws NoActiveBandsError when `active` is empty.
BandGrid refine_grid(const BandGrid& parent, const std::vector<int>& active, int subdivisions);

} // namespace glosa

#endif
