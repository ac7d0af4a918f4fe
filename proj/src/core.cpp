#include "glosa/core.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace glosa {

namespace {

void check_times(const std::vector<double>& times, const std::vector<double>& values,
                 const std::string& id) {
  if (times.size() != values.size())
    throw ArgumentError("record '" + id + "': times/values length mismatch");
  if (times.size() < 2)
    throw ArgumentError("record '" + id + "': needs at least 2 samples");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0)
      throw ArgumentError("record '" + id + "': times must be finite and non-negative");
    if (!std::isfinite(values[i]))
      throw ArgumentError("record '" + id + "': values must be finite");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw ArgumentError("record '" + id + "': times must be strictly increasing");
  }
}

} // namespace

Record::Record(std::string id_, std::vector<double> times_, std::vector<double> values_)
    : id(std::move(id_)), times(std::move(times_)), values(std::move(values_)) {
  check_times(times, values, id);
}

double Record::mean() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double Record::stddev() const {
  const double mu = mean();
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

Record Record::standardized() const {
  const double mu = mean();
  double sd = stddev();
  if (sd == 0.0) sd = 1.0; // constant record: just remove the mean
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mu) / sd;
  return Record(id, times, std::move(out));
}

RecordSet::RecordSet(std::vector<Record> recs) : records(std::move(recs)) {
  if (records.empty()) throw ArgumentError("RecordSet: needs at least one record");
  std::set<std::string> ids;
  for (const auto& r : records) {
    check_times(r.times, r.values, r.id);
    if (!ids.insert(r.id).second)
      throw ArgumentError("RecordSet: duplicate record id '" + r.id + "'");
  }
}

std::size_t RecordSet::total_samples() const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.size();
  return n;
}

RecordSet RecordSet::standardized() const {
  std::vector<Record> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.standardized());
  return RecordSet(std::move(out));
}

double wrap_phase(double phi) {
  const double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(phi, two_pi);
  if (w <= -std::numbers::pi) w += two_pi;
  else if (w > std::numbers::pi) w -= two_pi;
  return w;
}

SinusoidModel::SinusoidModel(std::vector<double> omegas_, Eigen::MatrixXd amplitudes_,
                             Eigen::MatrixXd phases_)
    : omegas(std::move(omegas_)), amplitudes(std::move(amplitudes_)), phases(std::move(phases_)) {
  const auto K = static_cast<Eigen::Index>(omegas.size());
  if (K == 0) throw ArgumentError("SinusoidModel: needs at least one component");
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    if (!(omegas[k] > 0.0) || !std::isfinite(omegas[k]))
      throw ArgumentError("SinusoidModel: frequencies must be positive and finite");
    if (k > 0 && !(omegas[k] > omegas[k - 1]))
      throw ArgumentError("SinusoidModel: frequencies must be strictly increasing");
  }
  if (amplitudes.cols() != K || phases.cols() != K || amplitudes.rows() != phases.rows() ||
      amplitudes.rows() < 1)
    throw ArgumentError("SinusoidModel: amplitude/phase shape mismatch");
  if ((amplitudes.array() < 0.0).any())
    throw ArgumentError("SinusoidModel: amplitudes must be non-negative");
  for (Eigen::Index m = 0; m < phases.rows(); ++m)
    for (Eigen::Index k = 0; k < K; ++k) phases(m, k) = wrap_phase(phases(m, k));
}

MissamplingField MissamplingField::zeros(const RecordSet& records) {
  MissamplingField f;
  f.offsets.reserve(records.size());
  for (const auto& r : records.records) f.offsets.emplace_back(r.size(), 0.0);
  return f;
}

bool MissamplingField::is_zero() const {
  for (const auto& rec : offsets)
    for (double d : rec)
      if (d != 0.0) return false;
  return true;
}

void MissamplingField::validate_against(const RecordSet& records) const {
  if (offsets.size() != records.size())
    throw ArgumentError("MissamplingField: record count mismatch");
  for (std::size_t m = 0; m < offsets.size(); ++m)
    if (offsets[m].size() != records[m].size())
      throw ArgumentError("MissamplingField: sample count mismatch in record " +
                          std::to_string(m));
}

std::vector<double> evaluate_signal(const SinusoidModel& model, int record_index,
                                    std::span<const double> times,
                                    std::optional<std::span<const double>> missampling) {
  if (record_index < 0 || record_index >= model.num_records())
    throw ArgumentError("evaluate_signal: record index out of range");
  if (missampling && missampling->size() != times.size())
    throw ArgumentError("evaluate_signal: missampling length mismatch");

  const int K = model.num_components();
  std::vector<double> out(times.size(), 0.0);
  for (std::size_t n = 0; n < times.size(); ++n) {
    const double t = times[n] + (missampling ? (*missampling)[n] : 0.0);
    double s = 0.0;
    for (int k = 0; k < K; ++k)
      s += model.amplitudes(record_index, k) *
           std::cos(model.omegas[k] * t + model.phases(record_index, k));
    out[n] = s;
  }
  return out;
}

double snr_db(const SinusoidModel& model, int record_index, double noise_var) {
  if (record_index < 0 || record_index >= model.num_records())
    throw ArgumentError("snr_db: record index out of range");
  if (!(noise_var > 0.0)) throw ArgumentError("snr_db: noise variance must be positive");
  const double p = model.amplitudes.row(record_index).squaredNorm();
  return 10.0 * std::log10(p / (2.0 * noise_var));
}

double noise_var_for_snr(const SinusoidModel& model, int record_index, double target_db) {
  if (record_index < 0 || record_index >= model.num_records())
    throw ArgumentError("noise_var_for_snr: record index out of range");
  const double p = model.amplitudes.row(record_index).squaredNorm();
  if (!(p > 0.0)) throw ArgumentError("noise_var_for_snr: all-zero amplitudes");
  return p / (2.0 * std::pow(10.0, target_db / 10.0));
}

} // namespace glosa
