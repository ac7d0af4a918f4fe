#include "glosa/glosa.hpp"

#include <algorithm>
#include <cmath>

namespace glosa {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Concentrated-residual machinery for the narrowband search: per record a
// cached cos/sin column pair per frequency, refreshed one frequency at a time.
class ProjectionObjective {
public:
  ProjectionObjective(const RecordSet& records, std::vector<double> omegas)
      : omegas_(std::move(omegas)) {
    const int K = static_cast<int>(omegas_.size());
    for (const auto& rec : records.records) {
      Per p;
      p.t = Eigen::Map<const VectorXd>(rec.times.data(), (Eigen::Index)rec.size());
      p.y = Eigen::Map<const VectorXd>(rec.values.data(), (Eigen::Index)rec.size());
      p.a.resize(p.t.size(), 2 * K);
      p.x.resize(2 * K);
      p.r.resize(p.t.size());
      per_.push_back(std::move(p));
    }
    for (int k = 0; k < K; ++k) refresh_columns(k);
  }

  int num_freqs() const { return static_cast<int>(omegas_.size()); }
  const std::vector<double>& omegas() const { return omegas_; }
  bool regularized() const { return regularized_; }

  void set_omega(int k, double w) {
    if (omegas_[k] == w) return;
    omegas_[k] = w;
    refresh_columns(k);
  }

  // Residual sum of squares after per-record least squares.
  double evaluate() {
    double j = 0.0;
    for (auto& p : per_) {
      MatrixXd gram = p.a.transpose() * p.a;
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram);
      const double emax = es.eigenvalues().maxCoeff();
      if (es.eigenvalues().minCoeff() <= 1e-12 * emax) {
        gram.diagonal().array() += 1e-12 * std::max(emax, 1e-300);
        regularized_ = true;
      }
      p.x = gram.ldlt().solve(p.a.transpose() * p.y);
      p.r = p.y - p.a * p.x;
      j += p.r.squaredNorm();
    }
    return j;
  }

  // d RSS / d omega_k at the current point; requires evaluate() beforehand.
  double gradient(int k) {
    double g = 0.0;
    const double w = omegas_[k];
    for (auto& p : per_) {
      double acc = 0.0;
      for (Eigen::Index n = 0; n < p.t.size(); ++n) {
        const double t = p.t(n);
        const double dc = -t * std::sin(w * t);
        const double ds = t * std::cos(w * t);
        acc += p.r(n) * (dc * p.x(2 * k) + ds * p.x(2 * k + 1));
      }
      g += acc;
    }
    return -2.0 * g;
  }

  VectorXd full_gradient() {
    VectorXd g(num_freqs());
    for (int k = 0; k < num_freqs(); ++k) g(k) = gradient(k);
    return g;
  }

private:
  struct Per {
    VectorXd t, y, x, r;
    MatrixXd a;
  };

  void refresh_columns(int k) {
    const double w = omegas_[k];
    for (auto& p : per_)
      for (Eigen::Index n = 0; n < p.t.size(); ++n) {
        p.a(n, 2 * k) = std::cos(w * p.t(n));
        p.a(n, 2 * k + 1) = std::sin(w * p.t(n));
      }
  }

  std::vector<double> omegas_;
  std::vector<Per> per_;
  bool regularized_ = false;
};

VectorXd boxed_gradient(const VectorXd& g, const std::vector<double>& w, const BandGrid& box) {
  VectorXd p = g;
  for (int k = 0; k < (int)w.size(); ++k) {
    if (w[k] <= box.starts[k]) p(k) = std::min(g(k), 0.0);
    else if (w[k] >= box.ends[k]) p(k) = std::max(g(k), 0.0);
  }
  return p;
}

} // namespace

void ZoomConfig::validate() const {
  if (zoom_steps < 1) throw ArgumentError("ZoomConfig: need at least one zoom step");
  if (initial_bands < 2) throw ArgumentError("ZoomConfig: need at least two initial bands");
  if (subdivision < 2) throw ArgumentError("ZoomConfig: subdivision must be >= 2");
  if (!(tau > 0.0)) throw ArgumentError("ZoomConfig: tau must be positive");
  if (!(omega_max > 0.0)) throw ArgumentError("ZoomConfig: omega_max must be positive");
  if (!(lambda >= 0.0) || !(zeta >= 0.0)) throw ArgumentError("ZoomConfig: negative penalty");
}

RefineResult gridless_refine(const RecordSet& records, const BandGrid& regions) {
  const int K = regions.size();
  if (K < 1) throw ArgumentError("gridless_refine: no regions");
  for (const auto& rec : records.records)
    if (static_cast<int>(rec.size()) < 2 * K)
      throw ArgumentError("gridless_refine: record '" + rec.id + "' shorter than 2K");

  std::vector<double> w(K);
  for (int k = 0; k < K; ++k) w[k] = regions.center(k);
  ProjectionObjective obj(records, w);

  auto eval_at = [&](int k, double x) {
    obj.set_omega(k, x);
    return obj.evaluate();
  };

  const int grid_points = 200;
  double best_scan = std::numeric_limits<double>::infinity();

  const int max_sweeps = 20;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_move = 0.0;
    for (int k = 0; k < K; ++k) {
      const double s = regions.starts[k], e = regions.ends[k];
      double lo = s, hi = e;
      double xb = w[k], fb = std::numeric_limits<double>::infinity();
      if (sweep == 0) {
        for (int i = 0; i < grid_points; ++i) {
          const double x = s + (e - s) * i / (grid_points - 1.0);
          const double f = eval_at(k, x);
          if (f < fb) {
            fb = f;
            xb = x;
          }
        }
        best_scan = std::min(best_scan, fb);
        const double h = (e - s) / (grid_points - 1.0);
        lo = std::max(s, xb - h);
        hi = std::min(e, xb + h);
      } else {
        const double window = (e - s) / 50.0;
        lo = std::max(s, w[k] - window);
        hi = std::min(e, w[k] + window);
      }

      // golden section
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
      double f1 = eval_at(k, x1), f2 = eval_at(k, x2);
      while (hi - lo > 1e-13 * std::max(1.0, w[k])) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - gr * (hi - lo);
          f1 = eval_at(k, x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + gr * (hi - lo);
          f2 = eval_at(k, x2);
        }
      }
      double xnew = f1 < f2 ? x1 : x2;

      // bisection on the gradient sign finishes the 1-D problem to the last ulp
      double glo_x = std::max(s, xnew - 1e-11 * std::max(1.0, xnew));
      double ghi_x = std::min(e, xnew + 1e-11 * std::max(1.0, xnew));
      eval_at(k, glo_x);
      double glo = obj.gradient(k);
      eval_at(k, ghi_x);
      double ghi = obj.gradient(k);
      if (glo < 0.0 && ghi > 0.0) {
        for (int it = 0; it < 80 && ghi_x - glo_x > 0.0; ++it) {
          const double mid = 0.5 * (glo_x + ghi_x);
          if (mid <= glo_x || mid >= ghi_x) break;
          eval_at(k, mid);
          const double gm = obj.gradient(k);
          if (gm < 0.0) {
            glo_x = mid;
            glo = gm;
          } else {
            ghi_x = mid;
            ghi = gm;
          }
        }
        xnew = std::abs(glo) < std::abs(ghi) ? glo_x : ghi_x;
      }

      eval_at(k, xnew);
      max_move = std::max(max_move, std::abs(xnew - w[k]));
      w[k] = xnew;
    }
    if (max_move < 1e-10) break;
  }

  // joint polish: damped Newton on the gradient with finite-difference
  // curvature, boxed to the regions
  double f_cur = obj.evaluate();
  VectorXd g = obj.full_gradient();
  double pnorm = boxed_gradient(g, w, regions).norm();
  for (int it = 0; it < 15 && pnorm > 1e-10; ++it) {
    MatrixXd h(K, K);
    for (int j = 0; j < K; ++j) {
      const double step = 1e-8 * std::max(0.05, w[j]);
      obj.set_omega(j, w[j] + step);
      obj.evaluate();
      h.col(j) = (obj.full_gradient() - g) / step;
      obj.set_omega(j, w[j]);
    }
    obj.evaluate();
    MatrixXd hsym = 0.5 * (h + h.transpose());
    double damping = 0.0;
    bool improved = false;
    for (int tries = 0; tries < 8; ++tries) {
      MatrixXd lhs = hsym;
      lhs.diagonal().array() += damping;
      Eigen::LDLT<MatrixXd> ldlt(lhs);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        damping = damping == 0.0 ? 1e-6 * hsym.diagonal().cwiseAbs().maxCoeff() : damping * 10.0;
        continue;
      }
      VectorXd delta = ldlt.solve(-g);
      std::vector<double> w_try(K);
      for (int k = 0; k < K; ++k)
        w_try[k] = std::clamp(w[k] + delta(k), regions.starts[k], regions.ends[k]);
      for (int k = 0; k < K; ++k) obj.set_omega(k, w_try[k]);
      const double f_try = obj.evaluate();
      const VectorXd g_try = obj.full_gradient();
      const double pnorm_try = boxed_gradient(g_try, w_try, regions).norm();
      if (pnorm_try < pnorm || f_try < f_cur) {
        w = w_try;
        g = g_try;
        pnorm = pnorm_try;
        f_cur = f_try;
        improved = true;
        break;
      }
      for (int k = 0; k < K; ++k) obj.set_omega(k, w[k]);
      obj.evaluate();
      damping = damping == 0.0 ? 1e-6 * hsym.diagonal().cwiseAbs().maxCoeff() : damping * 10.0;
    }
    if (!improved) break;
  }

  for (int k = 0; k < K; ++k) obj.set_omega(k, w[k]);
  RefineResult out;
  out.objective = obj.evaluate();
  out.omegas = w;
  out.projected_gradient_norm = boxed_gradient(obj.full_gradient(), w, regions).norm();
  out.pinv_regularized = obj.regularized();
  (void)best_scan; // coordinate passes only ever improve on the scanned points
  return out;
}

AmplitudeReadout amplitude_readout(const RecordSet& records, const std::vector<double>& omegas) {
  const int K = static_cast<int>(omegas.size());
  const int M = static_cast<int>(records.size());
  auto nb = build_narrowband(records, omegas);

  AmplitudeReadout out;
  out.amplitudes.resize(M, K);
  out.phases.resize(M, K);
  for (int m = 0; m < M; ++m) {
    const auto& rec = records[m];
    if (static_cast<int>(rec.size()) < 2 * K)
      throw ArgumentError("amplitude_readout: record '" + rec.id +
                          "' underdetermined (2K > N_m)");
    const VectorXd y =
        Eigen::Map<const VectorXd>(rec.values.data(), (Eigen::Index)rec.size());
    const VectorXd x = nb[m].columns.colPivHouseholderQr().solve(y);
    for (int k = 0; k < K; ++k) {
      const double a = x(2 * k), b = x(2 * k + 1);
      out.amplitudes(m, k) = std::hypot(a, b);
      out.phases(m, k) = std::atan2(-b, a);
    }
  }
  out.global_amplitudes.resize(K);
  for (int k = 0; k < K; ++k) out.global_amplitudes[k] = out.amplitudes.col(k).mean();
  return out;
}

GlobalEstimate run_glosa(const RecordSet& records, const ZoomConfig& config) {
  config.validate();
  const int M = static_cast<int>(records.size());
  // Phi_c can only leave zero when the coupling pull sum_m zeta exceeds the
  // sparsity weight lambda; otherwise every band is pruned regardless of data.
  if (config.lambda >= M * config.zeta)
    throw ArgumentError("run_glosa: lambda >= M * zeta makes the zero spectrum optimal; "
                        "lower lambda or raise zeta for " +
                        std::to_string(M) + " record(s)");

  GlobalEstimate est;
  BandGrid grid = BandGrid::uniform(config.initial_bands, config.omega_max);

  for (int level = 1; level <= config.zoom_steps; ++level) {
    auto dicts = build_wideband(records, grid);
    // Unit-norm atoms. The penalty weights then act on the coefficient scale
    // regardless of zoom level or band width: a band whose atom only carries
    // noise has |<atom, y>| ~ noise std, which zeta dominates, so its beta
    // (and with it Phi) is exactly zero and tau prunes it.
    for (auto& d : dicts)
      for (int c = 0; c < grid.size(); ++c) d.atoms.col(c).normalize();
    auto pen = PenaltyConfig::defaults(M, grid.size(), config.lambda, config.zeta);

    LevelDiagnostics diag;
    diag.grid = grid;
    JointSolution sol;
    try {
      sol = solve_joint(records, dicts, pen, config.solver);
    } catch (const SolverNotConverged& e) {
      sol = e.best();
      diag.solver_converged = false;
    }
    diag.solver_iterations = sol.iterations;
    diag.objective = sol.objective;
    diag.band_powers = band_power(sol);
    for (int c = 0; c < grid.size(); ++c)
      if (diag.band_powers(c) > config.tau) diag.active.push_back(c);

    if (diag.active.empty()) {
      std::vector<double> powers(diag.band_powers.data(),
                                 diag.band_powers.data() + diag.band_powers.size());
      throw NoActiveBandsError(level, std::move(powers));
    }
    const std::vector<int> active = diag.active;
    est.levels.push_back(std::move(diag));

    if (level < config.zoom_steps) {
      grid = refine_grid(grid, active, config.subdivision);
    } else {
      // Merge surviving bands into regions, one frequency each, with a
      // one-band guard on both sides: a component sitting right at a band
      // edge can push its energy into the sibling band, and the search box
      // must still contain it. Survivors within a few band widths of each
      // other are sidelobe artifacts of one component (genuine separations
      // span >> 10 bands at the final resolution), so they merge too;
      // fitting two free frequencies to one component splits it and biases
      // both.
      std::vector<double> rs, re;
      const double eps = 1e-12 * config.omega_max;
      for (int c : active) {
        const double gap = 8.0 * grid.width(c);
        const double lo = std::max(grid.starts[c] - grid.width(c), 1e-9 * config.omega_max);
        const double hi = std::min(grid.ends[c] + grid.width(c), config.omega_max);
        if (!rs.empty() && lo <= re.back() + gap + eps) re.back() = std::max(re.back(), hi);
        else {
          rs.push_back(lo);
          re.push_back(hi);
        }
      }
      BandGrid regions(std::move(rs), std::move(re));
      est.refinement = gridless_refine(records, regions);
      est.omegas = est.refinement.omegas;
      for (int k = 0; k < regions.size(); ++k)
        est.regions.emplace_back(regions.starts[k], regions.ends[k]);
    }
  }

  std::sort(est.omegas.begin(), est.omegas.end());
  est.readout = amplitude_readout(records, est.omegas);
  return est;
}

} // namespace glosa
