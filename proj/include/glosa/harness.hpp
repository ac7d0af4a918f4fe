#ifndef GLOSA_HARNESS_HPP
#define GLOSA_HARNESS_HPP

#include <string>
#include <vector>

#include "json.hpp"

#include "glosa/glosa.hpp"
#include "glosa/simulator.hpp"

namespace glosa {

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int n_runs = 100;
  std::vector<double> snr_list;
  int num_records = 3;
  bool missampling = true;
  bool standardize = true;
  int workers = 0; // 0: hardware concurrency
  ZoomConfig zoom;
  SimConfig sim; // omegas/base_amplitudes/jitter/phase/swap_cap
  std::vector<std::string> pattern_files;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

struct MethodScore {
  std::string method;
  double sum_mse = 0.0;              // sum over k of MSE_k
  std::vector<double> mse_per_freq;  // MSE_k
};

struct SnrResult {
  double snr_db = 0.0;
  std::vector<MethodScore> methods;
  double crb_sum = 0.0;     // averaged summed frequency diagonals
  double mcrb_sum = 0.0;
  double bias_sq_sum = 0.0;
  double lb_sum = 0.0;
  int runs_ok = 0;
  int runs_failed = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SnrResult> per_snr;
  std::vector<std::string> failures; // "snr=<db> rep=<n>: <what>"
  double wall_clock_sec = 0.0;

  nlohmann::json to_json() const;
  static ExperimentResult from_json(const nlohmann::json& j);
  void write_csv(std::ostream& out) const;
};

// Run failure: more than 5% of replicates errored.
class ExperimentFailure : public std::runtime_error {
public:
  ExperimentFailure(const std::string& msg, ExperimentResult partial)
      : std::runtime_error(msg), partial_(std::move(partial)) {}
  const ExperimentResult& partial() const { return partial_; }

private:
  ExperimentResult partial_;
};

// Greedy nearest association, at most one estimate per true frequency;
// truths left without a partner contribute their squared distance to the
// nearest estimate overall. Empty estimate lists are a replicate failure.
std::vector<double> association_errors(const std::vector<double>& truth,
                                       const std::vector<double>& estimates);

// Monte Carlo MSE-vs-SNR sweep with bound curves; replicates run
// concurrently on pre-assigned sub-seeds so results are order-independent.
ExperimentResult run_experiment(const ExperimentConfig& config);

} // namespace glosa

#endif
