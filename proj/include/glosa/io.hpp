#ifndef GLOSA_IO_HPP
#define GLOSA_IO_HPP

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "glosa/baselines.hpp"
#include "glosa/bounds.hpp"
#include "glosa/core.hpp"
#include "glosa/simulator.hpp"

namespace glosa {

// Record CSV: header `record_id,time_kyr,value`, '.' decimal separator,
// rows sorted by time within each record.
RecordSet read_records_csv(std::istream& in, const std::string& name = "<stream>");
RecordSet read_records_csv_file(const std::string& path);
void write_records_csv(std::ostream& out, const RecordSet& records);
void write_records_csv_file(const std::string& path, const RecordSet& records);

// Truth sidecar for a synthesized record set: model parameters, missampling
// field, and the noise variance the bound chain needs.
nlohmann::json truth_to_json(const Synthesis& synthesis);
struct Truth {
  SinusoidModel model;
  MissamplingField missampling;
  double sigma_upsilon_sq = 0.0;
};
Truth truth_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const SinusoidModel& model);
SinusoidModel model_from_json(const nlohmann::json& j);

nlohmann::json bound_report_to_json(const BoundReport& report);

void write_periodogram_csv(std::ostream& out, const PeriodogramEstimate& est);

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const nlohmann::json& j);

} // namespace glosa

#endif
