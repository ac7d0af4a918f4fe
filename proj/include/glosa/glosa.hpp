#ifndef GLOSA_GLOSA_HPP
#define GLOSA_GLOSA_HPP

#include <Eigen/Dense>
#include <vector>

#include "glosa/core.hpp"
#include "glosa/dictionary.hpp"
#include "glosa/jointsolver.hpp"

namespace glosa {

struct ZoomConfig {
  int zoom_steps = 4;     // I_z
  int initial_bands = 16; // C_1
  int subdivision = 4;    // C_z for every later level
  double tau = 1e-5;      // active-band power threshold
  double omega_max = 0.7853981633974483; // 2 pi / 8: periods of 8 kyr and up
  double lambda = 15.0;
  double zeta = 10.0;
  SolverSettings solver;

  void validate() const;
};

struct LevelDiagnostics {
  BandGrid grid;
  Eigen::VectorXd band_powers;
  std::vector<int> active;
  bool solver_converged = true;
  int solver_iterations = 0;
  double objective = 0.0;
};

struct RefineResult {
  std::vector<double> omegas;
  double objective = 0.0;
  double projected_gradient_norm = 0.0;
  bool pinv_regularized = false; // near-coalesced frequencies hit the guard
};

struct AmplitudeReadout {
  Eigen::MatrixXd amplitudes;            // M x K
  Eigen::MatrixXd phases;                // M x K
  std::vector<double> global_amplitudes; // mean over records
};

struct GlobalEstimate {
  std::vector<double> omegas; // sorted ascending
  AmplitudeReadout readout;
  std::vector<std::pair<double, double>> regions; // merged surviving bands
  std::vector<LevelDiagnostics> levels;
  RefineResult refinement;
};

// Joint concentrated-residual search: one frequency per region box,
// coordinate descent with per-band grid seeding and a gradient polish.
RefineResult gridless_refine(const RecordSet& records, const BandGrid& regions);

// Per-record least squares at fixed frequencies; amplitude/phase from the
// cos/sin coefficient pairs; global amplitude as the cross-record mean.
AmplitudeReadout amplitude_readout(const RecordSet& records, const std::vector<double>& omegas);

// The full coarse-to-fine pipeline: per level solve the joint program,
// threshold band powers at tau, refine the survivors; then a gridless search
// in the merged surviving regions and a least-squares amplitude readout.
GlobalEstimate run_glosa(const RecordSet& records, const ZoomConfig& config);

} // namespace glosa

#endif
