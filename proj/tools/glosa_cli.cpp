// Command-line front end: simulate ice-core-like data, estimate a shared
// line spectrum, run periodogram baselines, compute bound curves, and drive
// Monte Carlo experiments.
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>

#include "CLI11.hpp"

#include "glosa/baselines.hpp"
#include "glosa/bounds.hpp"
#include "glosa/glosa.hpp"
#include "glosa/harness.hpp"
#include "glosa/io.hpp"
#include "glosa/simulator.hpp"

namespace {

using namespace glosa;
namespace fs = std::filesystem;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitConvergence = 4;

struct CommonOpts {
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  bool standardize = true;
  double lambda = 15.0;
  double zeta = 10.0;
  double tau = 1e-5;
  int zooms = 4;
  int initial_bands = 16;
  double omega_max = kTwoPi / 8.0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--out-dir", o.out_dir, "output directory");
  cmd->add_option("--standardize", o.standardize,
                  "standardize each record to zero mean, unit variance")
      ->default_str("on")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, bool>{{"on", true}, {"off", false}}, CLI::ignore_case));
  cmd->add_option("--lambda", o.lambda, "global sparsity weight");
  cmd->add_option("--zeta", o.zeta, "per-record coupling weight");
  cmd->add_option("--tau", o.tau, "active band power threshold");
  cmd->add_option("--zooms", o.zooms, "zooming steps");
  cmd->add_option("--initial-bands", o.initial_bands, "bands at the first level");
  cmd->add_option("--omega-max", o.omega_max, "largest frequency of interest (rad/kyr)");
}

ZoomConfig zoom_from(const CommonOpts& o) {
  ZoomConfig z;
  z.zoom_steps = o.zooms;
  z.initial_bands = o.initial_bands;
  z.tau = o.tau;
  z.omega_max = o.omega_max;
  z.lambda = o.lambda;
  z.zeta = o.zeta;
  return z;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
}

std::vector<IntensityModel> load_patterns(const std::vector<std::string>& files) {
  std::vector<IntensityModel> patterns;
  for (const auto& path : files) {
    auto rs = read_records_csv_file(path);
    for (const auto& rec : rs.records) {
      auto m = fit_intensity(rec.times);
      m.source_id = rec.id;
      patterns.push_back(std::move(m));
    }
  }
  if (patterns.empty()) patterns.push_back(default_intensity_model());
  return patterns;
}

void print_frequency_table(std::ostream& out, const std::string& method,
                           const std::vector<double>& omegas,
                           const std::vector<double>* global_amp) {
  out << method << ":\n";
  out << "  " << std::left << std::setw(16) << "omega[rad/kyr]" << std::setw(16)
      << "freq[1/kyr]" << std::setw(14) << "period[kyr]";
  if (global_amp) out << std::setw(14) << "global_amp";
  out << '\n';
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    out << "  " << std::setw(16) << std::setprecision(8) << omegas[k] << std::setw(16)
        << omegas[k] / kTwoPi << std::setw(14) << kTwoPi / omegas[k];
    if (global_amp) out << std::setw(14) << (*global_amp)[k];
    out << '\n';
  }
}

int cmd_simulate(const CommonOpts& o, const std::string& config_path,
                 const std::vector<std::string>& pattern_files, double snr, int records) {
  SimConfig sim;
  sim.omegas = {kTwoPi / 100.0, kTwoPi / 41.0, kTwoPi / 23.0, kTwoPi / 19.0};
  sim.base_amplitudes = {1.0, 0.8, 0.6, 0.6};
  std::vector<std::string> files = pattern_files;
  if (!config_path.empty()) {
    auto cfg = ExperimentConfig::from_json(load_json_file(config_path));
    sim = cfg.sim;
    if (files.empty()) files = cfg.pattern_files;
    records = cfg.num_records;
  }
  sim.num_records = records;

  auto patterns = load_patterns(files);
  Rng rng(o.seed);
  auto syn = synthesize(sim, patterns, snr, rng);

  ensure_dir(o.out_dir);
  write_records_csv_file(o.out_dir + "/records.csv", syn.records);
  save_json_file(o.out_dir + "/truth.json", truth_to_json(syn));
  std::cout << "wrote " << o.out_dir << "/records.csv (" << syn.records.total_samples()
            << " samples, " << records << " records) and truth.json at SNR " << snr
            << " dB\n";
  return kExitOk;
}

int cmd_estimate(const CommonOpts& o, const std::string& input, int peaks) {
  auto raw = read_records_csv_file(input);
  const RecordSet data = o.standardize ? raw.standardized() : raw;

  auto est = run_glosa(data, zoom_from(o));
  const int K = static_cast<int>(est.omegas.size());

  // raw-scale amplitudes: undo the per-record standardization
  std::vector<double> raw_amp(K, 0.0);
  if (o.standardize) {
    auto ro = est.readout;
    for (int m = 0; m < (int)raw.size(); ++m) {
      const double sd = raw[m].stddev();
      for (int k = 0; k < K; ++k) raw_amp[k] += ro.amplitudes(m, k) * (sd == 0.0 ? 1.0 : sd);
    }
    for (auto& a : raw_amp) a /= static_cast<double>(raw.size());
  }

  const auto grid = default_grid(data, o.omega_max);
  auto mean_pg = mean_periodogram(data, grid);
  auto stacked_pg = stacked_periodogram(data, grid);
  const int want = peaks > 0 ? peaks : K;
  auto peaks_of = [&](const PeriodogramEstimate& pg) {
    try {
      return pick_peaks(pg, want);
    } catch (const PeakCountError& e) {
      return e.found_peaks();
    }
  };
  auto mean_peaks = peaks_of(mean_pg);
  auto stacked_peaks = peaks_of(stacked_pg);

  print_frequency_table(std::cout, "glosa", est.omegas, &est.readout.global_amplitudes);
  if (o.standardize) {
    std::cout << "  global amplitudes on the raw scale:";
    for (double a : raw_amp) std::cout << ' ' << std::setprecision(6) << a;
    std::cout << '\n';
  }
  print_frequency_table(std::cout, "mean_periodogram", mean_peaks, nullptr);
  print_frequency_table(std::cout, "stacked_periodogram", stacked_peaks, nullptr);

  ensure_dir(o.out_dir);
  {
    std::ofstream f(o.out_dir + "/spectrum_mean.csv");
    write_periodogram_csv(f, mean_pg);
    std::ofstream g(o.out_dir + "/spectrum_stacked.csv");
    write_periodogram_csv(g, stacked_pg);
  }
  nlohmann::json j{{"omegas", est.omegas},
                   {"global_amplitudes", est.readout.global_amplitudes},
                   {"global_amplitudes_raw_scale", raw_amp},
                   {"mean_periodogram_peaks", mean_peaks},
                   {"stacked_periodogram_peaks", stacked_peaks},
                   {"projected_gradient_norm", est.refinement.projected_gradient_norm},
                   {"regions", est.regions}};
  save_json_file(o.out_dir + "/estimate.json", j);
  std::cout << "wrote " << o.out_dir << "/estimate.json and spectrum CSVs\n";
  return kExitOk;
}

int cmd_baseline(const CommonOpts& o, const std::string& input, const std::string& method,
                 int peaks) {
  auto raw = read_records_csv_file(input);
  const RecordSet data = o.standardize ? raw.standardized() : raw;
  const auto grid = default_grid(data, o.omega_max);

  PeriodogramEstimate pg;
  if (method == "mean") pg = mean_periodogram(data, grid);
  else if (method == "stacked") pg = stacked_periodogram(data, grid);
  else if (method == "ls") pg = lomb_scargle(data[0], grid);
  else throw ConfigError("unknown baseline method '" + method + "'");

  ensure_dir(o.out_dir);
  std::ofstream f(o.out_dir + "/spectrum_" + method + ".csv");
  write_periodogram_csv(f, pg);

  if (peaks > 0) {
    try {
      auto w = pick_peaks(pg, peaks);
      print_frequency_table(std::cout, method, w, nullptr);
    } catch (const PeakCountError& e) {
      std::cout << "only " << e.found_peaks().size() << " local maxima found:\n";
      print_frequency_table(std::cout, method, e.found_peaks(), nullptr);
    }
  }
  std::cout << "wrote " << o.out_dir << "/spectrum_" << method << ".csv\n";
  return kExitOk;
}

int cmd_bounds(const CommonOpts& o, const std::string& truth_path,
               const std::string& records_path, std::vector<double> snr_list) {
  auto truth = truth_from_json(load_json_file(truth_path));
  auto records = read_records_csv_file(records_path);
  truth.missampling.validate_against(records);
  if (snr_list.empty()) throw ConfigError("bounds: empty SNR list");

  const int M = truth.model.num_records();
  double mean_power = 0.0;
  for (int m = 0; m < M; ++m) mean_power += truth.model.amplitudes.row(m).squaredNorm();
  mean_power /= M;

  ensure_dir(o.out_dir);
  std::ofstream out(o.out_dir + "/bounds.csv");
  out << "snr_db,crb_sum,mcrb_sum,bias_sq_sum,lb_sum\n";
  out << std::setprecision(17);
  for (double snr : snr_list) {
    // record-averaged SNR fixes the shared noise variance
    const double sigma_sq = mean_power / (2.0 * std::pow(10.0, snr / 10.0));
    auto rep = lower_bound(records, truth.model, truth.missampling, sigma_sq);
    out << snr << ',' << rep.crb_omega_diag.sum() << ',' << rep.mcrb_omega_diag.sum() << ','
        << rep.bias_sq_omega_diag.sum() << ',' << rep.lb_omega_diag.sum() << '\n';
  }
  std::cout << "wrote " << o.out_dir << "/bounds.csv\n";
  return kExitOk;
}

int cmd_experiment(const CommonOpts& o, const std::string& config_path) {
  auto j = load_json_file(config_path);
  if (!j.contains("seed")) j["seed"] = o.seed;
  auto cfg = ExperimentConfig::from_json(j);

  ensure_dir(o.out_dir);
  ExperimentResult result;
  try {
    result = run_experiment(cfg);
  } catch (const ExperimentFailure& e) {
    save_json_file(o.out_dir + "/result.json", e.partial().to_json());
    std::cerr << "experiment failed: " << e.what() << '\n';
    return kExitConvergence;
  }
  save_json_file(o.out_dir + "/result.json", result.to_json());
  std::ofstream csv(o.out_dir + "/result.csv");
  result.write_csv(csv);
  result.write_csv(std::cout);
  std::cout << "wrote " << o.out_dir << "/result.{json,csv} in " << std::setprecision(4)
            << result.wall_clock_sec << " s\n";
  return kExitOk;
}

int cmd_term_balance(const CommonOpts& o, const std::string& input) {
  auto raw = read_records_csv_file(input);
  const RecordSet data = o.standardize ? raw.standardized() : raw;
  const int M = static_cast<int>(data.size());

  auto grid = BandGrid::uniform(o.initial_bands, o.omega_max);
  auto dicts = build_wideband(data, grid);
  for (auto& d : dicts)
    for (int c = 0; c < grid.size(); ++c) d.atoms.col(c) /= grid.width(c);
  auto pen = PenaltyConfig::defaults(M, grid.size(), o.lambda, o.zeta);

  JointSolution sol;
  try {
    sol = solve_joint(data, dicts, pen);
  } catch (const SolverNotConverged& e) {
    sol = e.best();
    std::cout << "(solver did not certify convergence; best iterate shown)\n";
  }
  std::cout << "trial solve on " << grid.size() << " bands:\n"
            << "  data fit      " << sol.terms.data_fit << '\n'
            << "  coupling      " << sol.terms.coupling << '\n'
            << "  sparsity      " << sol.terms.sparsity << '\n'
            << "  objective     " << sol.objective << '\n'
            << "similar magnitudes indicate balanced penalties; rescale lambda/zeta otherwise\n";
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint sparse line-spectrum estimation for irregularly sampled records"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string config_path, input, method = "mean", truth_path, records_path;
  std::vector<std::string> pattern_files;
  std::vector<double> snr_list;
  double snr = 10.0;
  int records = 3, peaks = 0;

  auto* sim = app.add_subcommand("simulate", "synthesize records and a truth sidecar");
  add_common(sim, o);
  sim->add_option("--config", config_path, "experiment/sim config JSON");
  sim->add_option("--patterns", pattern_files, "CSV files with real sampling patterns");
  sim->add_option("--snr", snr, "target SNR in dB");
  sim->add_option("--records", records, "number of records");

  auto* est = app.add_subcommand("estimate", "run the joint estimator plus baselines");
  add_common(est, o);
  est->add_option("--input", input, "records CSV")->required();
  est->add_option("--peaks", peaks, "baseline peak count (default: match the estimator)");

  auto* base = app.add_subcommand("baseline", "periodogram baselines only");
  add_common(base, o);
  base->add_option("--input", input, "records CSV")->required();
  base->add_option("--method", method, "mean | stacked | ls");
  base->add_option("--peaks", peaks, "peak count to report");

  auto* bnd = app.add_subcommand("bounds", "bound curves for a simulated truth");
  add_common(bnd, o);
  bnd->add_option("--truth", truth_path, "truth JSON from simulate")->required();
  bnd->add_option("--records", records_path, "records/pattern CSV")->required();
  bnd->add_option("--snr-list", snr_list, "SNR grid in dB")->required();

  auto* exp = app.add_subcommand("experiment", "Monte Carlo MSE-vs-SNR sweep");
  add_common(exp, o);
  exp->add_option("--config", config_path, "experiment config JSON")->required();

  auto* tb = app.add_subcommand("term-balance", "report the three cost terms on a trial solve");
  add_common(tb, o);
  tb->add_option("--input", input, "records CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(o, config_path, pattern_files, snr, records);
    if (est->parsed()) return cmd_estimate(o, input, peaks);
    if (base->parsed()) return cmd_baseline(o, input, method, peaks);
    if (bnd->parsed()) return cmd_bounds(o, truth_path, records_path, snr_list);
    if (exp->parsed()) return cmd_experiment(o, config_path);
    if (tb->parsed()) return cmd_term_balance(o, input);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ArgumentError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const SolverNotConverged& e) {
    std::cerr << "convergence failure: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
