#include "glosa/jointsolver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace glosa {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// beta is carried as a real stacked vector [Re; Im] of length 2C.
VectorXcd to_complex(const VectorXd& x) {
  const Eigen::Index C = x.size() / 2;
  VectorXcd b(C);
  for (Eigen::Index c = 0; c < C; ++c) b(c) = {x(c), x(C + c)};
  return b;
}

VectorXd modulus(const VectorXd& x) {
  const Eigen::Index C = x.size() / 2;
  VectorXd r(C);
  for (Eigen::Index c = 0; c < C; ++c) r(c) = std::hypot(x(c), x(C + c));
  return r;
}

// Fit matrix G = [2 Re(D), -2 Im(D)]: y ~ G [Re(beta); Im(beta)] = 2 Re(D beta).
MatrixXd fit_matrix(const WidebandDictionary& dict) {
  const Eigen::Index N = dict.atoms.rows(), C = dict.atoms.cols();
  MatrixXd g(N, 2 * C);
  g.leftCols(C) = 2.0 * dict.atoms.real();
  g.rightCols(C) = -2.0 * dict.atoms.imag();
  return g;
}

// Projection onto {(re, im, a) : hypot(re, im) <= a}.
inline void soc_project(double& re, double& im, double& a) {
  const double r = std::hypot(re, im);
  if (r <= a) return;
  if (r <= -a) {
    re = im = a = 0.0;
    return;
  }
  const double t = 0.5 * (r + a);
  const double s = t / r;
  re *= s;
  im *= s;
  a = t;
}

// Exact minimizer over Phi >= 0 and {alpha_m} of
//   sum_m w_m |Phi - alpha_m| + lambda Phi
//   + (rho/2) (Phi - p)^2 + (rho/2) sum_m (alpha_m - a_m)^2.
// Minimizing out alpha_m leaves a sum of Huber terms in Phi whose derivative
//   lambda + rho (Phi - p) + sum_m clip(rho (Phi - a_m), +-w_m)
// is nondecreasing piecewise linear: scan its breakpoints for the sign change.
double prox_coupling_phi(double lambda, double rho, double p,
                         const std::vector<std::pair<double, double>>& wa, // (w_m, a_m)
                         std::vector<double>& breakpoints) {
  auto deriv = [&](double phi) {
    double d = lambda + rho * (phi - p);
    for (const auto& [w, a] : wa) d += std::clamp(rho * (phi - a), -w, w);
    return d;
  };
  const double d0 = deriv(0.0);
  if (d0 >= 0.0) return 0.0;

  breakpoints.clear();
  for (const auto& [w, a] : wa) {
    if (w > 0.0) {
      breakpoints.push_back(a - w / rho);
      breakpoints.push_back(a + w / rho);
    }
  }
  std::sort(breakpoints.begin(), breakpoints.end());

  double lo = 0.0, dlo = d0;
  for (double b : breakpoints) {
    if (b <= lo) continue;
    const double db = deriv(b);
    if (db >= 0.0) {
      const double slope = (db - dlo) / (b - lo);
      return slope > 0.0 ? lo - dlo / slope : b;
    }
    lo = b;
    dlo = db;
  }
  // Beyond the last breakpoint every clip saturates at +w_m.
  double wsum = 0.0;
  for (const auto& [w, a] : wa) wsum += w;
  return p - (lambda + wsum) / rho;
}

inline double prox_coupling_alpha(double w, double rho, double a, double phi) {
  if (w <= 0.0) return a;
  const double band = w / rho;
  if (a < phi - band) return a + band;
  if (a > phi + band) return a - band;
  return phi;
}

} // namespace

PenaltyConfig PenaltyConfig::defaults(int num_records, int num_bands, double lambda,
                                      double zeta) {
  PenaltyConfig p;
  p.zeta = VectorXd::Constant(num_records, zeta);
  p.lambda = lambda;
  p.q = VectorXd::Ones(num_bands);
  return p;
}

void PenaltyConfig::validate(int num_records, int num_bands) const {
  if (zeta.size() != num_records) throw ArgumentError("PenaltyConfig: zeta length != M");
  if (q.size() != num_bands) throw ArgumentError("PenaltyConfig: q length != C");
  if ((zeta.array() < 0.0).any()) throw ArgumentError("PenaltyConfig: zeta must be >= 0");
  if (!(lambda >= 0.0)) throw ArgumentError("PenaltyConfig: lambda must be >= 0");
  if ((q.array() < 0.0).any() || (q.array() > 1.0).any())
    throw ArgumentError("PenaltyConfig: q entries must lie in [0, 1]");
}

Eigen::VectorXd reconstruct(const WidebandDictionary& dict, const Eigen::VectorXcd& beta) {
  if (beta.size() != dict.atoms.cols())
    throw ArgumentError("reconstruct: beta length != dictionary width");
  return 2.0 * (dict.atoms * beta).real();
}

ObjectiveReport objective(const RecordSet& records,
                          const std::vector<WidebandDictionary>& dictionaries,
                          const PenaltyConfig& penalties,
                          const std::vector<Eigen::VectorXcd>& betas,
                          const std::vector<Eigen::VectorXd>& alphas,
                          const Eigen::VectorXd& phi) {
  const auto M = records.size();
  if (dictionaries.size() != M || betas.size() != M || alphas.size() != M)
    throw ArgumentError("objective: per-record shape mismatch");
  const Eigen::Index C = phi.size();
  penalties.validate(static_cast<int>(M), static_cast<int>(C));

  ObjectiveReport rep;
  for (std::size_t m = 0; m < M; ++m) {
    if (betas[m].size() != C || alphas[m].size() != C)
      throw ArgumentError("objective: beta/alpha length mismatch");
    const auto& rec = records[m];
    VectorXd resid = Eigen::Map<const VectorXd>(rec.values.data(), rec.values.size()) -
                     reconstruct(dictionaries[m], betas[m]);
    rep.terms.data_fit += resid.squaredNorm();
    for (Eigen::Index c = 0; c < C; ++c) {
      const double mag = std::abs(betas[m](c));
      double a = alphas[m](c);
      rep.max_infeasibility = std::max(rep.max_infeasibility, mag - a);
      if (a < mag) {
        a = mag;
        rep.was_projected = true;
      }
      rep.terms.coupling += penalties.zeta(m) * penalties.q(c) * std::abs(phi(c) - a);
    }
  }
  rep.terms.sparsity = penalties.lambda * phi.cwiseAbs().sum();
  rep.max_infeasibility = std::max(rep.max_infeasibility, 0.0);
  rep.value = rep.terms.total();
  return rep;
}

Eigen::VectorXd band_power(const JointSolution& solution) {
  return 2.0 * solution.phi.array().square();
}

JointSolution solve_joint(const RecordSet& records,
                          const std::vector<WidebandDictionary>& dictionaries,
                          const PenaltyConfig& penalties, const SolverSettings& settings) {
  const auto M = records.size();
  if (dictionaries.size() != M) throw ArgumentError("solve_joint: one dictionary per record");
  const Eigen::Index C = dictionaries.front().atoms.cols();
  for (std::size_t m = 0; m < M; ++m) {
    if (dictionaries[m].atoms.cols() != C ||
        dictionaries[m].grid.starts != dictionaries.front().grid.starts ||
        dictionaries[m].grid.ends != dictionaries.front().grid.ends)
      throw ArgumentError("solve_joint: dictionaries built on different grids");
    if (dictionaries[m].atoms.rows() != static_cast<Eigen::Index>(records[m].size()))
      throw ArgumentError("solve_joint: dictionary/record row mismatch");
  }
  penalties.validate(static_cast<int>(M), static_cast<int>(C));

  // Per-record fit blocks: 2 G^T G eigendecomposed once, so the ridge solve
  // stays cheap when rho adapts.
  std::vector<VectorXd> gty(M), evals(M), sqrt_evals(M);
  std::vector<MatrixXd> evecs(M);
  std::vector<double> y_sq(M);
  double curvature = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const MatrixXd g = fit_matrix(dictionaries[m]);
    const Eigen::Map<const VectorXd> y(records[m].values.data(),
                                       static_cast<Eigen::Index>(records[m].size()));
    y_sq[m] = y.squaredNorm();
    gty[m] = 2.0 * g.transpose() * y;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(2.0 * g.transpose() * g);
    evecs[m] = es.eigenvectors();
    evals[m] = es.eigenvalues().cwiseMax(0.0);
    sqrt_evals[m] = evals[m].cwiseSqrt();
    curvature = std::max(curvature, evals[m].mean());
  }

  double rho = settings.rho > 0.0 ? settings.rho : std::clamp(curvature, 1e-6, 1e12);

  // Consensus state. Local copies: A (fit, beta), B (cone, beta+alpha),
  // Cpl (coupling+sparsity, alpha+phi).
  std::vector<VectorXd> xA(M, VectorXd::Zero(2 * C)), xBb(M, VectorXd::Zero(2 * C)),
      xBa(M, VectorXd::Zero(C)), xCa(M, VectorXd::Zero(C));
  VectorXd xCphi = VectorXd::Zero(C);
  std::vector<VectorXd> zb(M, VectorXd::Zero(2 * C)), za(M, VectorXd::Zero(C));
  VectorXd zphi = VectorXd::Zero(C);
  std::vector<VectorXd> uA(M, VectorXd::Zero(2 * C)), uBb(M, VectorXd::Zero(2 * C)),
      uBa(M, VectorXd::Zero(C)), uCa(M, VectorXd::Zero(C));

  std::vector<std::pair<double, double>> wa(M);
  std::vector<double> breakpoints;
  std::deque<double> obj_history;

  // Objective at the feasibility-projected consensus point; fit term via the
  // cached quadratic form.
  auto consensus_objective = [&]() {
    double obj = penalties.lambda * zphi.cwiseMax(0.0).sum();
    for (std::size_t m = 0; m < M; ++m) {
      const VectorXd proj = evecs[m].transpose() * zb[m];
      double fit = y_sq[m] - gty[m].dot(zb[m]) +
                   0.5 * (sqrt_evals[m].asDiagonal() * proj).squaredNorm();
      obj += std::max(fit, 0.0);
      for (Eigen::Index c = 0; c < C; ++c) {
        const double a = std::max({za[m](c), std::hypot(zb[m](c), zb[m](C + c)), 0.0});
        obj += penalties.zeta(m) * penalties.q(c) * std::abs(std::max(zphi(c), 0.0) - a);
      }
    }
    return obj;
  };

  auto materialize = [&](const std::vector<VectorXd>& zb_s, const std::vector<VectorXd>& za_s,
                         const VectorXd& zphi_s, int iter, double rp, double rd,
                         bool converged) {
    JointSolution sol;
    sol.betas.reserve(M);
    sol.alphas.reserve(M);
    double infeas = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      sol.betas.push_back(to_complex(zb_s[m]));
      VectorXd mag = modulus(zb_s[m]);
      infeas = std::max(infeas, (mag - za_s[m]).maxCoeff());
      sol.alphas.push_back(za_s[m].cwiseMax(mag).cwiseMax(0.0));
    }
    sol.phi = zphi_s.cwiseMax(0.0);
    auto rep = objective(records, dictionaries, penalties, sol.betas, sol.alphas, sol.phi);
    sol.objective = rep.value;
    sol.terms = rep.terms;
    sol.iterations = iter;
    sol.primal_residual = rp;
    sol.dual_residual = rd;
    sol.max_infeasibility = std::max(infeas, 0.0);
    sol.converged = converged;
    return sol;
  };

  std::vector<VectorXd> best_zb = zb, best_za = za;
  VectorXd best_zphi = zphi;
  double best_obj = std::numeric_limits<double>::infinity();
  int best_iter = 0;
  double best_rp = 0.0, best_rd = 0.0;
  int adaptations = 0;
  VectorXd rhs(2 * C);

  for (int iter = 1; iter <= settings.max_iter; ++iter) {
    // Fit block: (2 G^T G + rho I) x = 2 G^T y + rho v.
    for (std::size_t m = 0; m < M; ++m) {
      rhs = gty[m] + rho * (zb[m] - uA[m]);
      xA[m].noalias() = evecs[m] * ((evecs[m].transpose() * rhs).array() /
                                    (evals[m].array() + rho))
                                       .matrix();
    }

    // Cone block: project (beta, alpha) entrywise onto alpha >= |beta|.
    for (std::size_t m = 0; m < M; ++m) {
      xBb[m] = zb[m] - uBb[m];
      xBa[m] = za[m] - uBa[m];
      for (Eigen::Index c = 0; c < C; ++c) soc_project(xBb[m](c), xBb[m](C + c), xBa[m](c));
    }

    // Coupling block: exact (alpha, Phi) prox per band.
    for (std::size_t m = 0; m < M; ++m) xCa[m] = za[m] - uCa[m];
    for (Eigen::Index c = 0; c < C; ++c) {
      for (std::size_t m = 0; m < M; ++m)
        wa[m] = {penalties.zeta(m) * penalties.q(c), xCa[m](c)};
      const double phi = prox_coupling_phi(penalties.lambda, rho, zphi(c), wa, breakpoints);
      xCphi(c) = phi;
      for (std::size_t m = 0; m < M; ++m)
        xCa[m](c) = prox_coupling_alpha(wa[m].first, rho, wa[m].second, phi);
    }

    // Consensus averages, duals, residuals.
    double dual_sq = 0.0, primal_sq = 0.0, xnorm_sq = 0.0, znorm_sq = 0.0, unorm_sq = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      VectorXd zb_new = 0.5 * (xA[m] + uA[m] + xBb[m] + uBb[m]);
      VectorXd za_new = 0.5 * (xBa[m] + uBa[m] + xCa[m] + uCa[m]);
      dual_sq += 2.0 * (zb_new - zb[m]).squaredNorm() + 2.0 * (za_new - za[m]).squaredNorm();
      zb[m] = std::move(zb_new);
      za[m] = std::move(za_new);
      uA[m] += xA[m] - zb[m];
      uBb[m] += xBb[m] - zb[m];
      uBa[m] += xBa[m] - za[m];
      uCa[m] += xCa[m] - za[m];
      primal_sq += (xA[m] - zb[m]).squaredNorm() + (xBb[m] - zb[m]).squaredNorm() +
                   (xBa[m] - za[m]).squaredNorm() + (xCa[m] - za[m]).squaredNorm();
      xnorm_sq += xA[m].squaredNorm() + xBb[m].squaredNorm() + xBa[m].squaredNorm() +
                  xCa[m].squaredNorm();
      znorm_sq += 2.0 * zb[m].squaredNorm() + 2.0 * za[m].squaredNorm();
      unorm_sq += uA[m].squaredNorm() + uBb[m].squaredNorm() + uBa[m].squaredNorm() +
                  uCa[m].squaredNorm();
    }
    dual_sq += (xCphi - zphi).squaredNorm(); // zphi consensus is the copy itself
    zphi = xCphi;
    const double rp = std::sqrt(primal_sq);
    const double rd = rho * std::sqrt(dual_sq);

    const double n_coords = static_cast<double>(M) * (4.0 * C + 2.0 * C) + C;
    const double eps_pri = std::sqrt(n_coords) * settings.abs_tol +
                           settings.rel_tol * std::sqrt(std::max(xnorm_sq, znorm_sq));
    const double eps_dual = std::sqrt(n_coords) * settings.abs_tol +
                            settings.rel_tol * rho * std::sqrt(unorm_sq);

    const double obj = consensus_objective();
    obj_history.push_back(obj);
    if (static_cast<int>(obj_history.size()) > settings.obj_window + 1) obj_history.pop_front();
    if (obj < best_obj) {
      best_obj = obj;
      best_zb = zb;
      best_za = za;
      best_zphi = zphi;
      best_iter = iter;
      best_rp = rp;
      best_rd = rd;
    }

    bool obj_settled = false;
    if (static_cast<int>(obj_history.size()) > settings.obj_window) {
      double lo = obj_history.front(), hi = obj_history.front();
      for (double v : obj_history) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      obj_settled = (hi - lo) <= settings.obj_tol * std::max(1.0, std::abs(obj));
    }
    if (rp <= eps_pri && rd <= eps_dual && obj_settled)
      return materialize(zb, za, zphi, iter, rp, rd, true);

    if (settings.adapt_rho && iter % settings.adapt_every == 0 &&
        adaptations < settings.max_adaptations) {
      const double pri_ratio = rp / std::max(eps_pri, 1e-300);
      const double dual_ratio = rd / std::max(eps_dual, 1e-300);
      double factor = 1.0;
      if (pri_ratio > 10.0 * dual_ratio) factor = 2.0;
      else if (dual_ratio > 10.0 * pri_ratio) factor = 0.5;
      if (factor != 1.0) {
        rho *= factor;
        for (std::size_t m = 0; m < M; ++m) {
          uA[m] /= factor;
          uBb[m] /= factor;
          uBa[m] /= factor;
          uCa[m] /= factor;
        }
        ++adaptations;
      }
    }
  }

  throw SolverNotConverged(
      "solve_joint: no convergence within " + std::to_string(settings.max_iter) + " iterations",
      materialize(best_zb, best_za, best_zphi, best_iter, best_rp, best_rd, false));
}

} // namespace glosa
