#ifndef GLOSA_JOINTSOLVER_HPP
#define GLOSA_JOINTSOLVER_HPP

#include <Eigen/Dense>
#include <vector>

#include "glosa/core.hpp"
#include "glosa/dictionary.hpp"

namespace glosa {

// Weights of the joint program: per-record coupling strengths zeta^(m),
// global sparsity weight lambda, and per-band coupling mask q in [0,1].
struct PenaltyConfig {
  Eigen::VectorXd zeta;
  double lambda = 15.0;
  Eigen::VectorXd q;

  static PenaltyConfig defaults(int num_records, int num_bands, double lambda = 15.0,
                                double zeta = 10.0);
  void validate(int num_records, int num_bands) const;
};

struct SolverSettings {
  double rel_tol = 1e-8;   // residual norms <= rel_tol * scale
  double abs_tol = 1e-12;
  double obj_tol = 1e-10;  // relative objective change over obj_window iterations
  int obj_window = 50;
  double feas_tol = 1e-8;
  int max_iter = 50000;
  double rho = 0.0;        // <= 0: choose from the data-fit curvature
  bool adapt_rho = true;
  int adapt_every = 25;
  int max_adaptations = 100;
};

struct ObjectiveTerms {
  double data_fit = 0.0;
  double coupling = 0.0;
  double sparsity = 0.0;
  double total() const { return data_fit + coupling + sparsity; }
};

struct JointSolution {
  std::vector<Eigen::VectorXcd> betas; // per record, length C
  std::vector<Eigen::VectorXd> alphas; // per record, length C, alpha >= |beta|
  Eigen::VectorXd phi;                 // length C, >= 0
  double objective = 0.0;
  ObjectiveTerms terms;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double max_infeasibility = 0.0; // pre-projection max(|beta| - alpha)
  bool converged = false;
};

// Non-convergence within max_iter; carries the best feasible iterate seen.
class SolverNotConverged : public std::runtime_error {
public:
  SolverNotConverged(const std::string& msg, JointSolution best)
      : std::runtime_error(msg), best_(std::move(best)) {}
  const JointSolution& best() const { return best_; }

private:
  JointSolution best_;
};

struct ObjectiveReport {
  ObjectiveTerms terms;
  double value = 0.0;
  double max_infeasibility = 0.0; // of the candidate as given
  bool was_projected = false;     // alpha lifted to |beta| before evaluation
};

// Exact objective of the joint program at a candidate point. Infeasible
// alpha (alpha < |beta|) is projected up before evaluation and reported.
ObjectiveReport objective(const RecordSet& records,
                          const std::vector<WidebandDictionary>& dictionaries,
                          const PenaltyConfig& penalties,
                          const std::vector<Eigen::VectorXcd>& betas,
                          const std::vector<Eigen::VectorXd>& alphas,
                          const Eigen::VectorXd& phi);

// Real reconstruction 2 Re(D beta) of the collapsed positive-band model.
Eigen::VectorXd reconstruct(const WidebandDictionary& dict, const Eigen::VectorXcd& beta);

// Solve the joint program by consensus operator splitting. All subproblems
// are exact: ridge least squares for beta, per-entry second-order cone
// projection for the alpha >= |beta| coupling, and a breakpoint scan over
// the sorted alpha values for the (Phi, alpha) coupling block.
JointSolution solve_joint(const RecordSet& records,
                          const std::vector<WidebandDictionary>& dictionaries,
                          const PenaltyConfig& penalties, const SolverSettings& settings = {});

// Per-band power 2 Phi_c^2: the +/- band pair of the implicit symmetric
// spectrum contributes Phi_c^2 twice.
Eigen::VectorXd band_power(const JointSolution& solution);

} // namespace glosa

#endif
