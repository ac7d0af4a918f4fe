#ifndef GLOSA_BOUNDS_HPP
#define GLOSA_BOUNDS_HPP

#include <Eigen/Dense>
#include <vector>

#include "glosa/core.hpp"

namespace glosa {

// Parameter vector layout: theta = [omega_1..K | rho^(1)..rho^(M) | phi^(1)..phi^(M)],
// dimension K (1 + 2 M).
struct ThetaLayout {
  int K = 0;
  int M = 0;
  int dim() const { return K * (1 + 2 * M); }
  int omega(int k) const { return k; }
  int rho(int m, int k) const { return K + m * K + k; }
  int phi(int m, int k) const { return K + M * K + m * K + k; }
  std::string name(int index) const;
};

Eigen::VectorXd pack_theta(const SinusoidModel& model);
// Phases are wrapped into (-pi, pi] by the SinusoidModel constructor.
SinusoidModel unpack_theta(const Eigen::VectorXd& theta, int M, int K);

// Misspecified mean mu_t^{(m)}(theta) and its analytic derivatives, used by
// the pseudo-true search and both Fisher-matrix generalizations.
double mu_at(const Eigen::VectorXd& theta, const ThetaLayout& lay, int record, double t);
Eigen::VectorXd mu_gradient(const Eigen::VectorXd& theta, const ThetaLayout& lay, int record,
                            double t);
Eigen::MatrixXd mu_hessian(const Eigen::VectorXd& theta, const ThetaLayout& lay, int record,
                           double t);

// KLD between the true sampled-signal density (model + missampling, noise
// sigma_upsilon^2) and the misspecified candidate density.
double kld(const RecordSet& records, const SinusoidModel& true_model,
           const MissamplingField& missampling, double sigma_upsilon_sq,
           const SinusoidModel& candidate, double sigma_eps_sq);

struct PseudoTrueResult {
  SinusoidModel model;
  Eigen::VectorXd theta;  // raw vector; phases not wrapped, so bias differences stay continuous
  double waveform_error_ss = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
};

class PseudoTrueNotConverged : public std::runtime_error {
public:
  PseudoTrueNotConverged(const std::string& msg, PseudoTrueResult best)
      : std::runtime_error(msg), best_(std::move(best)) {}
  const PseudoTrueResult& best() const { return best_; }

private:
  PseudoTrueResult best_;
};

// Parameters minimizing the waveform error sum of squares, found by damped
// Gauss-Newton with analytic Jacobian, initialized at the true parameters.
PseudoTrueResult pseudo_true(const RecordSet& records, const SinusoidModel& true_model,
                             const MissamplingField& missampling);

// sigma_upsilon^2 + waveform_error_ss / N
double sigma_eps_sq(double waveform_error_ss, std::size_t n_total, double sigma_upsilon_sq);

// Expected-Hessian generalization of the FIM. Throws ArgumentError naming the
// degenerate parameter if the matrix is singular.
Eigen::MatrixXd fim_a(const RecordSet& records, const SinusoidModel& theta0,
                      const std::vector<std::vector<double>>& true_signal, double sig_eps_sq);

// Score-covariance generalization.
Eigen::MatrixXd fim_b(const RecordSet& records, const SinusoidModel& theta0,
                      double sigma_upsilon_sq, double sig_eps_sq);

struct BoundReport {
  SinusoidModel pseudo_true;
  double sigma_eps_sq = 0.0;
  Eigen::MatrixXd matrix_a;
  Eigen::MatrixXd matrix_b;
  Eigen::MatrixXd mcrb_core; // A^{-1} B A^{-1}
  Eigen::MatrixXd bias_sq;   // (theta_tilde - theta0)(theta_tilde - theta0)^T
  Eigen::MatrixXd lb;        // mcrb_core + bias_sq
  Eigen::MatrixXd crb;       // the chain re-run with zero missampling
  Eigen::VectorXd mcrb_omega_diag;
  Eigen::VectorXd bias_sq_omega_diag;
  Eigen::VectorXd lb_omega_diag;
  Eigen::VectorXd crb_omega_diag;
};

// Full bound chain: pseudo-true search, pseudo-true variance, both Fisher
// generalizations, bias outer product, and the zero-missampling special case.
BoundReport lower_bound(const RecordSet& records, const SinusoidModel& true_model,
                        const MissamplingField& missampling, double sigma_upsilon_sq);

// Expected Schuster-periodogram height at the true frequency of a single
// complex harmonic under Gaussian missampling on a length-N uniform grid:
// rho^2 + sigma_upsilon^2 + rho^2 (N - 1) exp(-omega1^2 sigma_delta_sq).
double expected_periodogram_peak(double rho, double omega1, double sigma_delta_sq,
                                 double sigma_upsilon_sq, int n);

} // namespace glosa

#endif
