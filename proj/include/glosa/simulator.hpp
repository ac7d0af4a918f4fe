#ifndef GLOSA_SIMULATOR_HPP
#define GLOSA_SIMULATOR_HPP

#include <string>
#include <vector>

#include "glosa/core.hpp"
#include "glosa/rng.hpp"

namespace glosa {

// Mixed sampling-process model fitted to a real pattern: a homogeneous
// Poisson head up to the change point, then an empirical binned rate.
struct IntensityModel {
  std::string source_id;
  bool has_change_point = false;
  int change_index = 0;   // c: number of samples in the homogeneous head
  double t_first = 0.0;   // T_1
  double t_change = 0.0;  // T_c (equals t_end when fully homogeneous)
  double t_end = 0.0;
  double gamma = 0.0;     // head ML intensity (c-1)/(T_c - T_1)
  std::vector<double> bin_edges; // tail bins over (T_c, T_end]; size = rates + 1
  std::vector<double> bin_rates;

  void validate() const;
};

struct SimConfig {
  std::vector<double> omegas;          // shared angular frequencies (rad/kyr)
  std::vector<double> base_amplitudes; // one per component
  double amplitude_jitter_frac = 0.1;  // per-record std = frac * rho_k
  double phase_min = 0.0;
  double phase_max = 0.6283185307179586; // pi/5
  double swap_cap = 0.01;
  bool missampling_enabled = true;
  int num_records = 3;
  int num_runs = 100;
  std::vector<double> snr_list;
  std::uint64_t seed = 1;

  void validate() const;
};

// ML fit of the mixed model: forward CI scan for the change point, then
// two-segment likelihood refinement, then 20 equal-count tail bins.
IntensityModel fit_intensity(const std::vector<double>& pattern, double z_change = 2.576);

// Ice-core-like default: 1/kyr homogeneous head, then a linearly thinning
// tail (compression makes old samples sparser).
IntensityModel default_intensity_model();

// Head: change_index sorted uniforms on (T_1, T_c). Tail: nonhomogeneous
// Poisson by thinning against the max bin rate. Strictly increasing output.
std::vector<double> sample_pattern(const IntensityModel& model, Rng& rng);

// Per-sample missampling std making the adjacent swap probability < swap_cap:
// sigma_i = min(adjacent gaps) / (sqrt(2) z_{1-cap}).
std::vector<double> missampling_std(const std::vector<double>& pattern, double swap_cap = 0.01);

struct Synthesis {
  RecordSet records;
  SinusoidModel truth;
  MissamplingField missampling;
  double sigma_upsilon_sq = 0.0;
};

// One Monte Carlo draw of M records at the requested SNR: fresh patterns,
// jittered amplitudes, uniform phases, per-sample Gaussian missampling,
// white noise sized from the base-amplitude template.
Synthesis synthesize(const SimConfig& config, const std::vector<IntensityModel>& patterns,
                     double snr_db, Rng& rng);

} // namespace glosa

#endif
