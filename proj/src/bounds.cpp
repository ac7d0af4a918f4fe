#include "glosa/bounds.hpp"

#include <cmath>

namespace glosa {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct SampleTrig {
  double c, s; // cos/sin of omega_k t + phi_mk
};

ThetaLayout layout_of(const SinusoidModel& m) {
  return ThetaLayout{m.num_components(), m.num_records()};
}

double waveform_error_ss(const RecordSet& records, const SinusoidModel& true_model,
                         const MissamplingField& missampling, const VectorXd& theta,
                         const ThetaLayout& lay) {
  double ss = 0.0;
  for (std::size_t m = 0; m < records.size(); ++m) {
    const auto s = evaluate_signal(true_model, static_cast<int>(m), records[m].times,
                                   std::span<const double>(missampling.offsets[m]));
    for (std::size_t n = 0; n < records[m].size(); ++n) {
      const double d = s[n] - mu_at(theta, lay, static_cast<int>(m), records[m].times[n]);
      ss += d * d;
    }
  }
  return ss;
}

// Residuals r = s - mu and Jacobian J = d mu / d theta, stacked over samples.
void residual_jacobian(const RecordSet& records,
                       const std::vector<std::vector<double>>& true_signal,
                       const VectorXd& theta, const ThetaLayout& lay, VectorXd& r,
                       MatrixXd& jac) {
  const int P = lay.dim();
  Eigen::Index row = 0;
  for (std::size_t m = 0; m < records.size(); ++m) {
    for (std::size_t n = 0; n < records[m].size(); ++n, ++row) {
      const double t = records[m].times[n];
      double mu = 0.0;
      for (int k = 0; k < lay.K; ++k) {
        const double rho = theta(lay.rho(static_cast<int>(m), k));
        const double arg = theta(lay.omega(k)) * t + theta(lay.phi(static_cast<int>(m), k));
        const double c = std::cos(arg), s = std::sin(arg);
        mu += rho * c;
        jac(row, lay.omega(k)) = -rho * t * s;
        jac(row, lay.rho(static_cast<int>(m), k)) = c;
        jac(row, lay.phi(static_cast<int>(m), k)) = -rho * s;
      }
      r(row) = true_signal[m][n] - mu;
    }
  }
  (void)P;
}

} // namespace

std::string ThetaLayout::name(int index) const {
  if (index < K) return "omega[" + std::to_string(index) + "]";
  if (index < K + M * K) {
    const int m = (index - K) / K, k = (index - K) % K;
    return "rho[" + std::to_string(m) + "][" + std::to_string(k) + "]";
  }
  const int m = (index - K - M * K) / K, k = (index - K - M * K) % K;
  return "phi[" + std::to_string(m) + "][" + std::to_string(k) + "]";
}

Eigen::VectorXd pack_theta(const SinusoidModel& model) {
  const ThetaLayout lay = layout_of(model);
  VectorXd theta(lay.dim());
  for (int k = 0; k < lay.K; ++k) theta(lay.omega(k)) = model.omegas[k];
  for (int m = 0; m < lay.M; ++m)
    for (int k = 0; k < lay.K; ++k) {
      theta(lay.rho(m, k)) = model.amplitudes(m, k);
      theta(lay.phi(m, k)) = model.phases(m, k);
    }
  return theta;
}

SinusoidModel unpack_theta(const Eigen::VectorXd& theta, int M, int K) {
  const ThetaLayout lay{K, M};
  if (theta.size() != lay.dim()) throw ArgumentError("unpack_theta: dimension mismatch");
  std::vector<double> omegas(K);
  Eigen::MatrixXd amp(M, K), ph(M, K);
  for (int k = 0; k < K; ++k) omegas[k] = theta(lay.omega(k));
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k) {
      amp(m, k) = theta(lay.rho(m, k));
      ph(m, k) = theta(lay.phi(m, k));
    }
  return SinusoidModel(std::move(omegas), std::move(amp), std::move(ph));
}

double mu_at(const Eigen::VectorXd& theta, const ThetaLayout& lay, int record, double t) {
  double mu = 0.0;
  for (int k = 0; k < lay.K; ++k)
    mu += theta(lay.rho(record, k)) *
          std::cos(theta(lay.omega(k)) * t + theta(lay.phi(record, k)));
  return mu;
}

Eigen::VectorXd mu_gradient(const Eigen::VectorXd& theta, const ThetaLayout& lay, int record,
                            double t) {
  VectorXd g = VectorXd::Zero(lay.dim());
  for (int k = 0; k < lay.K; ++k) {
    const double rho = theta(lay.rho(record, k));
    const double arg = theta(lay.omega(k)) * t + theta(lay.phi(record, k));
    const double c = std::cos(arg), s = std::sin(arg);
    g(lay.omega(k)) = -rho * t * s;
    g(lay.rho(record, k)) = c;
    g(lay.phi(record, k)) = -rho * s;
  }
  return g;
}

Eigen::MatrixXd mu_hessian(const Eigen::VectorXd& theta, const ThetaLayout& lay, int record,
                           double t) {
  MatrixXd h = MatrixXd::Zero(lay.dim(), lay.dim());
  for (int k = 0; k < lay.K; ++k) {
    const int iw = lay.omega(k), ir = lay.rho(record, k), ip = lay.phi(record, k);
    const double rho = theta(ir);
    const double arg = theta(iw) * t + theta(ip);
    const double c = std::cos(arg), s = std::sin(arg);
    h(iw, iw) = -rho * t * t * c;
    h(iw, ir) = h(ir, iw) = -t * s;
    h(iw, ip) = h(ip, iw) = -rho * t * c;
    h(ir, ip) = h(ip, ir) = -s;
    h(ip, ip) = -rho * c;
  }
  return h;
}

double kld(const RecordSet& records, const SinusoidModel& true_model,
           const MissamplingField& missampling, double sigma_upsilon_sq,
           const SinusoidModel& candidate, double sig_eps_sq) {
  if (!(sigma_upsilon_sq > 0.0) || !(sig_eps_sq > 0.0))
    throw ArgumentError("kld: variances must be positive");
  missampling.validate_against(records);
  const double n_total = static_cast<double>(records.total_samples());

  double werr = 0.0;
  for (std::size_t m = 0; m < records.size(); ++m) {
    const auto s = evaluate_signal(true_model, static_cast<int>(m), records[m].times,
                                   std::span<const double>(missampling.offsets[m]));
    const auto mu = evaluate_signal(candidate, static_cast<int>(m), records[m].times);
    for (std::size_t n = 0; n < records[m].size(); ++n) {
      const double d = s[n] - mu[n];
      werr += d * d;
    }
  }
  return 0.5 * (n_total * std::log(sig_eps_sq / sigma_upsilon_sq) +
                n_total * (sigma_upsilon_sq / sig_eps_sq - 1.0) + werr / sig_eps_sq);
}

PseudoTrueResult pseudo_true(const RecordSet& records, const SinusoidModel& true_model,
                             const MissamplingField& missampling) {
  missampling.validate_against(records);
  const ThetaLayout lay = layout_of(true_model);
  const auto N = static_cast<Eigen::Index>(records.total_samples());
  const double n_total = static_cast<double>(N);

  std::vector<std::vector<double>> s(records.size());
  for (std::size_t m = 0; m < records.size(); ++m)
    s[m] = evaluate_signal(true_model, static_cast<int>(m), records[m].times,
                           std::span<const double>(missampling.offsets[m]));

  VectorXd theta = pack_theta(true_model);
  VectorXd r(N);
  MatrixXd jac = MatrixXd::Zero(N, lay.dim());
  residual_jacobian(records, s, theta, lay, r, jac);
  double ss = r.squaredNorm();
  VectorXd grad = -2.0 * jac.transpose() * r;

  const double grad_tol = 1e-10 * n_total;
  double damping = 0.0;
  const int max_iter = 200;
  int iter = 0;
  VectorXd r_try(N);
  MatrixXd jac_try = MatrixXd::Zero(N, lay.dim());

  while (grad.norm() > grad_tol && iter < max_iter) {
    ++iter;
    const MatrixXd jtj = jac.transpose() * jac;
    if (damping == 0.0) damping = 1e-10 * jtj.trace() / lay.dim();
    bool stepped = false;
    for (int tries = 0; tries < 60; ++tries) {
      MatrixXd lhs = jtj;
      lhs.diagonal().array() += damping;
      const VectorXd delta = lhs.ldlt().solve(jac.transpose() * r);
      const VectorXd theta_try = theta + delta;
      residual_jacobian(records, s, theta_try, lay, r_try, jac_try);
      const double ss_try = r_try.squaredNorm();
      const VectorXd grad_try = -2.0 * jac_try.transpose() * r_try;
      // Once the sum of squares reaches its rounding floor, Newton steps keep
      // shrinking the gradient without representable ss descent; accept those.
      const bool accept = ss_try < ss || (ss_try <= ss * (1.0 + 1e-12) &&
                                          grad_try.norm() < grad.norm());
      if (accept) {
        theta = theta_try;
        r.swap(r_try);
        jac.swap(jac_try);
        ss = ss_try;
        grad = grad_try;
        damping = std::max(damping / 3.0, 1e-16 * jtj.trace() / lay.dim());
        stepped = true;
        break;
      }
      damping *= 10.0;
    }
    if (!stepped) break;
  }

  PseudoTrueResult out;
  out.theta = theta;
  out.model = unpack_theta(theta, lay.M, lay.K);
  out.waveform_error_ss = ss;
  out.gradient_norm = grad.norm();
  out.iterations = iter;
  if (out.gradient_norm > grad_tol)
    throw PseudoTrueNotConverged("pseudo_true: gradient norm " +
                                     std::to_string(out.gradient_norm) + " above tolerance",
                                 out);
  return out;
}

double sigma_eps_sq(double werr_ss, std::size_t n_total, double sigma_upsilon_sq) {
  if (werr_ss < 0.0 || sigma_upsilon_sq < 0.0 || n_total == 0)
    throw ArgumentError("sigma_eps_sq: invalid inputs");
  return sigma_upsilon_sq + werr_ss / static_cast<double>(n_total);
}

Eigen::MatrixXd fim_a(const RecordSet& records, const SinusoidModel& theta0,
                      const std::vector<std::vector<double>>& true_signal, double sig_eps_sq) {
  const ThetaLayout lay = layout_of(theta0);
  const VectorXd theta = pack_theta(theta0);
  MatrixXd a = MatrixXd::Zero(lay.dim(), lay.dim());
  if (true_signal.size() != records.size()) throw ArgumentError("fim_a: signal shape mismatch");

  for (std::size_t m = 0; m < records.size(); ++m) {
    if (true_signal[m].size() != records[m].size())
      throw ArgumentError("fim_a: signal shape mismatch");
    for (std::size_t n = 0; n < records[m].size(); ++n) {
      const double t = records[m].times[n];
      const double kappa = true_signal[m][n] - mu_at(theta, lay, static_cast<int>(m), t);
      const VectorXd g = mu_gradient(theta, lay, static_cast<int>(m), t);
      a += kappa * mu_hessian(theta, lay, static_cast<int>(m), t) - g * g.transpose();
    }
  }
  a /= sig_eps_sq;

  Eigen::FullPivLU<MatrixXd> lu(a);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) {
    const auto null_space = lu.kernel();
    Eigen::Index worst = 0;
    null_space.col(0).cwiseAbs().maxCoeff(&worst);
    throw ArgumentError("fim_a: singular information matrix; degenerate parameter " +
                        lay.name(static_cast<int>(worst)));
  }
  return a;
}

Eigen::MatrixXd fim_b(const RecordSet& records, const SinusoidModel& theta0,
                      double sigma_upsilon_sq, double sig_eps_sq) {
  const ThetaLayout lay = layout_of(theta0);
  const VectorXd theta = pack_theta(theta0);
  MatrixXd b = MatrixXd::Zero(lay.dim(), lay.dim());
  for (std::size_t m = 0; m < records.size(); ++m)
    for (std::size_t n = 0; n < records[m].size(); ++n) {
      const VectorXd g =
          mu_gradient(theta, lay, static_cast<int>(m), records[m].times[n]);
      b += g * g.transpose();
    }
  return (sigma_upsilon_sq / (sig_eps_sq * sig_eps_sq)) * b;
}

namespace {

// theta_tilde - theta0 with phase coordinates wrapped into (-pi, pi].
VectorXd bias_vector(const VectorXd& theta_tilde, const VectorXd& theta0,
                     const ThetaLayout& lay) {
  VectorXd d = theta_tilde - theta0;
  for (int m = 0; m < lay.M; ++m)
    for (int k = 0; k < lay.K; ++k) d(lay.phi(m, k)) = wrap_phase(d(lay.phi(m, k)));
  return d;
}

struct ChainParts {
  PseudoTrueResult pt;
  double sig_eps = 0.0;
  MatrixXd a, b, core, bias_sq;
};

ChainParts run_chain(const RecordSet& records, const SinusoidModel& true_model,
                     const MissamplingField& missampling, double sigma_upsilon_sq) {
  ChainParts parts;
  parts.pt = pseudo_true(records, true_model, missampling);
  parts.sig_eps =
      sigma_eps_sq(parts.pt.waveform_error_ss, records.total_samples(), sigma_upsilon_sq);

  std::vector<std::vector<double>> s(records.size());
  for (std::size_t m = 0; m < records.size(); ++m)
    s[m] = evaluate_signal(true_model, static_cast<int>(m), records[m].times,
                           std::span<const double>(missampling.offsets[m]));

  parts.a = fim_a(records, parts.pt.model, s, parts.sig_eps);
  parts.b = fim_b(records, parts.pt.model, sigma_upsilon_sq, parts.sig_eps);
  const MatrixXd a_inv = parts.a.fullPivLu().inverse();
  parts.core = a_inv * parts.b * a_inv;

  const ThetaLayout lay{true_model.num_components(), true_model.num_records()};
  const VectorXd bias = bias_vector(pack_theta(true_model), parts.pt.theta, lay);
  parts.bias_sq = bias * bias.transpose();
  return parts;
}

} // namespace

BoundReport lower_bound(const RecordSet& records, const SinusoidModel& true_model,
                        const MissamplingField& missampling, double sigma_upsilon_sq) {
  missampling.validate_against(records);
  const ThetaLayout lay{true_model.num_components(), true_model.num_records()};

  const ChainParts parts = run_chain(records, true_model, missampling, sigma_upsilon_sq);

  BoundReport rep;
  rep.pseudo_true = parts.pt.model;
  rep.sigma_eps_sq = parts.sig_eps;
  rep.matrix_a = parts.a;
  rep.matrix_b = parts.b;
  rep.mcrb_core = parts.core;
  rep.bias_sq = parts.bias_sq;
  rep.lb = parts.core + parts.bias_sq;

  if (missampling.is_zero()) {
    rep.crb = rep.mcrb_core; // bitwise: the chain already ran with zero missampling
  } else {
    const ChainParts clean =
        run_chain(records, true_model, MissamplingField::zeros(records), sigma_upsilon_sq);
    rep.crb = clean.core;
  }

  rep.mcrb_omega_diag = rep.mcrb_core.diagonal().head(lay.K);
  rep.bias_sq_omega_diag = rep.bias_sq.diagonal().head(lay.K);
  rep.lb_omega_diag = rep.lb.diagonal().head(lay.K);
  rep.crb_omega_diag = rep.crb.diagonal().head(lay.K);
  return rep;
}

double expected_periodogram_peak(double rho, double omega1, double sigma_delta_sq,
                                 double sigma_upsilon_sq, int n) {
  if (n < 1) throw ArgumentError("expected_periodogram_peak: need n >= 1");
  return rho * rho + sigma_upsilon_sq +
         rho * rho * (n - 1) * std::exp(-omega1 * omega1 * sigma_delta_sq);
}

} // namespace glosa
