#include "glosa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <thread>

#include "glosa/baselines.hpp"
#include "glosa/bounds.hpp"
#include "glosa/io.hpp"

namespace glosa {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config field '" + key + "': " + e.what());
  }
}

struct ReplicateOutcome {
  bool ok = false;
  std::string error;
  // squared errors per true frequency, one entry per method
  std::vector<std::vector<double>> sq_errors;
  double crb_sum = 0.0, mcrb_sum = 0.0, bias_sq_sum = 0.0, lb_sum = 0.0;
};

const std::vector<std::string> kMethods{"glosa", "mean_periodogram", "stacked_periodogram"};

ReplicateOutcome run_replicate(const ExperimentConfig& cfg,
                               const std::vector<IntensityModel>& patterns, double snr,
                               std::uint64_t sub) {
  ReplicateOutcome out;
  try {
    Rng rng(sub);
    SimConfig sim = cfg.sim;
    sim.num_records = cfg.num_records;
    sim.missampling_enabled = cfg.missampling;
    auto syn = synthesize(sim, patterns, snr, rng);
    const RecordSet data = cfg.standardize ? syn.records.standardized() : syn.records;
    const std::vector<double>& truth = syn.truth.omegas;
    const int K = static_cast<int>(truth.size());

    // proposed estimator
    auto est = run_glosa(data, cfg.zoom);
    out.sq_errors.push_back(association_errors(truth, est.omegas));

    // periodogram baselines on the same standardized data
    const auto grid = default_grid(data, cfg.zoom.omega_max);
    for (int which = 0; which < 2; ++which) {
      const auto pg =
          which == 0 ? mean_periodogram(data, grid) : stacked_periodogram(data, grid);
      std::vector<double> peaks;
      try {
        peaks = pick_peaks(pg, K);
      } catch (const PeakCountError& e) {
        peaks = e.found_peaks();
      }
      out.sq_errors.push_back(association_errors(truth, peaks));
    }

    // bound chain on the raw record set (true scale and times)
    auto rep = lower_bound(syn.records, syn.truth, syn.missampling, syn.sigma_upsilon_sq);
    out.crb_sum = rep.crb_omega_diag.sum();
    out.mcrb_sum = rep.mcrb_omega_diag.sum();
    out.bias_sq_sum = rep.bias_sq_omega_diag.sum();
    out.lb_sum = rep.lb_omega_diag.sum();
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

} // namespace

std::vector<double> association_errors(const std::vector<double>& truth,
                                       const std::vector<double>& estimates) {
  if (estimates.empty()) throw ArgumentError("association: no estimates produced");
  struct Pair {
    double dist;
    std::size_t k, j;
  };
  std::vector<Pair> pairs;
  for (std::size_t k = 0; k < truth.size(); ++k)
    for (std::size_t j = 0; j < estimates.size(); ++j)
      pairs.push_back({std::abs(truth[k] - estimates[j]), k, j});
  std::sort(pairs.begin(), pairs.end(),
            [](const Pair& a, const Pair& b) { return a.dist < b.dist; });

  std::vector<int> truth_match(truth.size(), -1);
  std::vector<bool> est_used(estimates.size(), false);
  for (const auto& p : pairs) {
    if (truth_match[p.k] >= 0 || est_used[p.j]) continue;
    truth_match[p.k] = static_cast<int>(p.j);
    est_used[p.j] = true;
  }

  std::vector<double> sq(truth.size(), 0.0);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    double d;
    if (truth_match[k] >= 0) {
      d = truth[k] - estimates[truth_match[k]];
    } else {
      // more truths than estimates: fall back to the nearest estimate
      d = std::numeric_limits<double>::infinity();
      for (double e : estimates) d = std::min(std::abs(truth[k] - e), std::abs(d));
    }
    sq[k] = d * d;
  }
  return sq;
}

void ExperimentConfig::validate() const {
  if (n_runs < 1) throw ConfigError("n_runs must be >= 1");
  if (snr_list.empty()) throw ConfigError("snr_list must not be empty");
  if (num_records < 1) throw ConfigError("records must be >= 1");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  zoom.validate();
  SimConfig s = sim;
  s.num_records = num_records;
  s.validate();
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.seed = get_or<std::uint64_t>(j, "seed", 1);
  cfg.n_runs = get_or<int>(j, "n_runs", 100);
  if (!j.contains("snr_list")) throw ConfigError("missing snr_list");
  cfg.snr_list = j.at("snr_list").get<std::vector<double>>();
  cfg.num_records = get_or<int>(j, "records", 3);
  cfg.missampling = get_or<bool>(j, "missampling", true);
  cfg.standardize = get_or<bool>(j, "standardize", true);
  cfg.workers = get_or<int>(j, "workers", 0);

  if (j.contains("zoom")) {
    const auto& z = j.at("zoom");
    cfg.zoom.zoom_steps = get_or<int>(z, "zoom_steps", cfg.zoom.zoom_steps);
    cfg.zoom.initial_bands = get_or<int>(z, "initial_bands", cfg.zoom.initial_bands);
    cfg.zoom.subdivision = get_or<int>(z, "subdivision", cfg.zoom.subdivision);
    cfg.zoom.tau = get_or<double>(z, "tau", cfg.zoom.tau);
    cfg.zoom.omega_max = get_or<double>(z, "omega_max", cfg.zoom.omega_max);
  }
  if (j.contains("penalties")) {
    const auto& p = j.at("penalties");
    cfg.zoom.lambda = get_or<double>(p, "lambda", cfg.zoom.lambda);
    cfg.zoom.zeta = get_or<double>(p, "zeta", cfg.zoom.zeta);
  }

  if (j.contains("sim")) {
    const auto& s = j.at("sim");
    std::vector<double> omegas;
    if (s.contains("periods_kyr")) {
      for (double p : s.at("periods_kyr").get<std::vector<double>>()) {
        if (!(p > 0.0)) throw ConfigError("periods_kyr must be positive");
        omegas.push_back(kTwoPi / p);
      }
    } else if (s.contains("omegas")) {
      omegas = s.at("omegas").get<std::vector<double>>();
    }
    if (!omegas.empty()) {
      auto amps = get_or<std::vector<double>>(s, "amplitudes",
                                              std::vector<double>(omegas.size(), 1.0));
      if (amps.size() != omegas.size())
        throw ConfigError("sim amplitudes must match periods_kyr/omegas in length");
      // amplitudes are listed alongside the given frequencies; keep pairs
      // together while sorting to ascending omega
      std::vector<std::size_t> idx(omegas.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      std::sort(idx.begin(), idx.end(),
                [&](std::size_t a, std::size_t b) { return omegas[a] < omegas[b]; });
      cfg.sim.omegas.clear();
      cfg.sim.base_amplitudes.clear();
      for (std::size_t i : idx) {
        cfg.sim.omegas.push_back(omegas[i]);
        cfg.sim.base_amplitudes.push_back(amps[i]);
      }
    }
    cfg.sim.amplitude_jitter_frac =
        get_or<double>(s, "amplitude_jitter_frac", cfg.sim.amplitude_jitter_frac);
    if (s.contains("phase_range")) {
      auto pr = s.at("phase_range").get<std::vector<double>>();
      if (pr.size() != 2) throw ConfigError("phase_range must be [lo, hi]");
      cfg.sim.phase_min = pr[0];
      cfg.sim.phase_max = pr[1];
    }
    cfg.sim.swap_cap = get_or<double>(s, "swap_cap", cfg.sim.swap_cap);
    cfg.pattern_files = get_or<std::vector<std::string>>(s, "pattern_files", {});
  }
  if (cfg.sim.omegas.empty()) {
    // paper signal: periods 100/41/23/19 kyr with amplitudes 1/0.8/0.6/0.6
    cfg.sim.omegas = {kTwoPi / 100.0, kTwoPi / 41.0, kTwoPi / 23.0, kTwoPi / 19.0};
    cfg.sim.base_amplitudes = {1.0, 0.8, 0.6, 0.6};
  }
  cfg.validate();
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  json sim_j{{"omegas", sim.omegas},
             {"amplitudes_by_omega", sim.base_amplitudes},
             {"amplitude_jitter_frac", sim.amplitude_jitter_frac},
             {"phase_range", std::vector<double>{sim.phase_min, sim.phase_max}},
             {"swap_cap", sim.swap_cap},
             {"pattern_files", pattern_files}};
  return json{{"seed", seed},
              {"n_runs", n_runs},
              {"snr_list", snr_list},
              {"records", num_records},
              {"missampling", missampling},
              {"standardize", standardize},
              {"workers", workers},
              {"zoom",
               {{"zoom_steps", zoom.zoom_steps},
                {"initial_bands", zoom.initial_bands},
                {"subdivision", zoom.subdivision},
                {"tau", zoom.tau},
                {"omega_max", zoom.omega_max}}},
              {"penalties", {{"lambda", zoom.lambda}, {"zeta", zoom.zeta}}},
              {"sim", sim_j}};
}

nlohmann::json ExperimentResult::to_json() const {
  json snr_arr = json::array();
  for (const auto& s : per_snr) {
    json methods = json::array();
    for (const auto& m : s.methods)
      methods.push_back(json{{"method", m.method},
                             {"sum_mse", m.sum_mse},
                             {"mse_per_freq", m.mse_per_freq}});
    snr_arr.push_back(json{{"snr_db", s.snr_db},
                           {"methods", methods},
                           {"crb_sum", s.crb_sum},
                           {"mcrb_sum", s.mcrb_sum},
                           {"bias_sq_sum", s.bias_sq_sum},
                           {"lb_sum", s.lb_sum},
                           {"runs_ok", s.runs_ok},
                           {"runs_failed", s.runs_failed}});
  }
  return json{{"config", config.to_json()},
              {"per_snr", snr_arr},
              {"failures", failures},
              {"wall_clock_sec", wall_clock_sec}};
}

ExperimentResult ExperimentResult::from_json(const json& j) {
  ExperimentResult r;
  r.config = ExperimentConfig::from_json(j.at("config"));
  for (const auto& s : j.at("per_snr")) {
    SnrResult sr;
    sr.snr_db = s.at("snr_db").get<double>();
    for (const auto& m : s.at("methods")) {
      MethodScore ms;
      ms.method = m.at("method").get<std::string>();
      ms.sum_mse = m.at("sum_mse").get<double>();
      ms.mse_per_freq = m.at("mse_per_freq").get<std::vector<double>>();
      sr.methods.push_back(std::move(ms));
    }
    sr.crb_sum = s.at("crb_sum").get<double>();
    sr.mcrb_sum = s.at("mcrb_sum").get<double>();
    sr.bias_sq_sum = s.at("bias_sq_sum").get<double>();
    sr.lb_sum = s.at("lb_sum").get<double>();
    sr.runs_ok = s.at("runs_ok").get<int>();
    sr.runs_failed = s.at("runs_failed").get<int>();
    r.per_snr.push_back(std::move(sr));
  }
  r.failures = j.at("failures").get<std::vector<std::string>>();
  r.wall_clock_sec = j.at("wall_clock_sec").get<double>();
  return r;
}

void ExperimentResult::write_csv(std::ostream& out) const {
  out << "snr_db,method,sum_mse,crb_sum,mcrb_sum,bias_sq_sum,lb_sum,runs_ok,runs_failed\n";
  out << std::setprecision(17);
  for (const auto& s : per_snr)
    for (const auto& m : s.methods)
      out << s.snr_db << ',' << m.method << ',' << m.sum_mse << ',' << s.crb_sum << ','
          << s.mcrb_sum << ',' << s.bias_sq_sum << ',' << s.lb_sum << ',' << s.runs_ok << ','
          << s.runs_failed << '\n';
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<IntensityModel> patterns;
  if (config.pattern_files.empty()) {
    patterns.push_back(default_intensity_model());
  } else {
    for (const auto& path : config.pattern_files) {
      const auto rs = read_records_csv_file(path);
      for (const auto& rec : rs.records) patterns.push_back(fit_intensity(rec.times));
    }
  }

  const int workers = config.workers > 0
                          ? config.workers
                          : std::max(1u, std::thread::hardware_concurrency());

  ExperimentResult result;
  result.config = config;

  const int K = static_cast<int>(config.sim.omegas.size());
  long total = 0, failed = 0;
  for (std::size_t si = 0; si < config.snr_list.size(); ++si) {
    const double snr = config.snr_list[si];
    std::vector<ReplicateOutcome> outcomes(config.n_runs);

    std::atomic<int> next{0};
    auto worker = [&]() {
      while (true) {
        const int rep = next.fetch_add(1);
        if (rep >= config.n_runs) break;
        outcomes[rep] = run_replicate(config, patterns, snr,
                                      sub_seed(config.seed, si, static_cast<std::uint64_t>(rep)));
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(workers, config.n_runs); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    SnrResult sr;
    sr.snr_db = snr;
    std::vector<std::vector<double>> mse(kMethods.size(), std::vector<double>(K, 0.0));
    for (int rep = 0; rep < config.n_runs; ++rep) {
      ++total;
      const auto& o = outcomes[rep];
      if (!o.ok) {
        ++failed;
        ++sr.runs_failed;
        result.failures.push_back("snr=" + std::to_string(snr) + " rep=" + std::to_string(rep) +
                                  ": " + o.error);
        continue;
      }
      ++sr.runs_ok;
      for (std::size_t mi = 0; mi < kMethods.size(); ++mi)
        for (int k = 0; k < K; ++k) mse[mi][k] += o.sq_errors[mi][k];
      sr.crb_sum += o.crb_sum;
      sr.mcrb_sum += o.mcrb_sum;
      sr.bias_sq_sum += o.bias_sq_sum;
      sr.lb_sum += o.lb_sum;
    }
    const double n_ok = std::max(1, sr.runs_ok);
    for (std::size_t mi = 0; mi < kMethods.size(); ++mi) {
      MethodScore ms;
      ms.method = kMethods[mi];
      for (int k = 0; k < K; ++k) {
        ms.mse_per_freq.push_back(mse[mi][k] / n_ok);
        ms.sum_mse += mse[mi][k] / n_ok;
      }
      sr.methods.push_back(std::move(ms));
    }
    sr.crb_sum /= n_ok;
    sr.mcrb_sum /= n_ok;
    sr.bias_sq_sum /= n_ok;
    sr.lb_sum /= n_ok;
    result.per_snr.push_back(std::move(sr));
  }

  result.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (failed * 20 > total) // > 5%
    throw ExperimentFailure("replicate failure budget exceeded: " + std::to_string(failed) +
                                "/" + std::to_string(total),
                            result);
  return result;
}

} // namespace glosa
