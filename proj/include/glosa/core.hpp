#ifndef GLOSA_CORE_HPP
#define GLOSA_CORE_HPP

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glosa/errors.hpp"

namespace glosa {

// One irregularly sampled series (one core). Times in kyr, strictly
// increasing and non-negative; values in (dimensionless) proxy units.
struct Record {
  std::string id;
  std::vector<double> times;
  std::vector<double> values;

  Record() = default;
  Record(std::string id, std::vector<double> times, std::vector<double> values);

  std::size_t size() const { return times.size(); }

  // Zero-mean, unit-variance copy of the values. Keeps the times.
  Record standardized() const;
  double mean() const;
  double stddev() const;
};

struct RecordSet {
  std::vector<Record> records;

  RecordSet() = default;
  explicit RecordSet(std::vector<Record> recs);

  std::size_t size() const { return records.size(); }
  std::size_t total_samples() const;
  const Record& operator[](std::size_t m) const { return records[m]; }

  RecordSet standardized() const;
};

// K shared angular frequencies (rad/kyr) plus per-record amplitudes and
// phases. Phases are wrapped to (-pi, pi] on construction.
struct SinusoidModel {
  std::vector<double> omegas;   // strictly increasing, > 0
  Eigen::MatrixXd amplitudes;   // M x K, >= 0
  Eigen::MatrixXd phases;       // M x K, in (-pi, pi]

  SinusoidModel() = default;
  SinusoidModel(std::vector<double> omegas, Eigen::MatrixXd amplitudes,
                Eigen::MatrixXd phases);

  int num_components() const { return static_cast<int>(omegas.size()); }
  int num_records() const { return static_cast<int>(amplitudes.rows()); }
};

// Per-record sampling-time errors, aligned with the RecordSet times.
struct MissamplingField {
  std::vector<std::vector<double>> offsets;

  MissamplingField() = default;
  static MissamplingField zeros(const RecordSet& records);

  bool is_zero() const;
  void validate_against(const RecordSet& records) const;
};

double wrap_phase(double phi); // into (-pi, pi]

// Signal value at each t: sum_k rho_k cos(omega_k (t + delta_t) + phi_k).
// With missampling omitted this is the misspecified mean at the nominal times.
std::vector<double> evaluate_signal(const SinusoidModel& model, int record_index,
                                    std::span<const double> times,
                                    std::optional<std::span<const double>> missampling = {});

// 10 log10( sum_k rho_k^2 / (2 sigma^2) ) for the given record.
double snr_db(const SinusoidModel& model, int record_index, double noise_var);

// Noise variance that makes snr_db() hit the requested SNR for the record.
double noise_var_for_snr(const SinusoidModel& model, int record_index, double snr_db);

} // namespace glosa

#endif
