#include "glosa/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

namespace glosa {

namespace {

using nlohmann::json;

double parse_double(const std::string& tok, long line, const std::string& field) {
  double v = 0.0;
  const auto* begin = tok.data();
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw DataError("cannot parse " + field + " '" + tok + "'", line);
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw DataError(what + ": expected a non-empty array");
  const auto rows = j.size();
  const auto cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw DataError(what + ": ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

} // namespace

RecordSet read_records_csv(std::istream& in, const std::string& name) {
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw DataError(name + ": empty file", 1);
  ++line_no;
  // tolerate a UTF-8 BOM
  if (line.size() >= 3 && line[0] == '\xEF') line.erase(0, 3);
  auto header = split_csv_line(line);
  if (header.size() != 3 || header[0] != "record_id" || header[1] != "time_kyr" ||
      header[2] != "value")
    throw DataError(name + ": expected header 'record_id,time_kyr,value'", 1);

  std::vector<std::string> order;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> data;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto tok = split_csv_line(line);
    if (tok.size() != 3) throw DataError(name + ": expected 3 fields", line_no);
    if (tok[0].empty()) throw DataError(name + ": empty record id", line_no);
    const double t = parse_double(tok[1], line_no, "time_kyr");
    const double v = parse_double(tok[2], line_no, "value");
    auto [it, fresh] = data.try_emplace(tok[0]);
    if (fresh) order.push_back(tok[0]);
    if (!it->second.first.empty() && !(t > it->second.first.back()))
      throw DataError(name + ": times not strictly increasing within record '" + tok[0] + "'",
                      line_no);
    it->second.first.push_back(t);
    it->second.second.push_back(v);
  }
  if (order.empty()) throw DataError(name + ": no data rows", line_no);

  std::vector<Record> recs;
  for (const auto& id : order) {
    auto& [times, values] = data[id];
    try {
      recs.emplace_back(id, std::move(times), std::move(values));
    } catch (const ArgumentError& e) {
      throw DataError(name + ": " + e.what());
    }
  }
  return RecordSet(std::move(recs));
}

RecordSet read_records_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_records_csv(in, path);
}

void write_records_csv(std::ostream& out, const RecordSet& records) {
  out << "record_id,time_kyr,value\n";
  out << std::setprecision(17);
  for (const auto& r : records.records)
    for (std::size_t i = 0; i < r.size(); ++i)
      out << r.id << ',' << r.times[i] << ',' << r.values[i] << '\n';
}

void write_records_csv_file(const std::string& path, const RecordSet& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_records_csv(out, records);
}

nlohmann::json model_to_json(const SinusoidModel& model) {
  return json{{"omegas", model.omegas},
              {"amplitudes", matrix_to_json(model.amplitudes)},
              {"phases", matrix_to_json(model.phases)}};
}

SinusoidModel model_from_json(const json& j) {
  if (!j.contains("omegas") || !j.contains("amplitudes") || !j.contains("phases"))
    throw DataError("model JSON: missing omegas/amplitudes/phases");
  return SinusoidModel(j["omegas"].get<std::vector<double>>(),
                       matrix_from_json(j["amplitudes"], "amplitudes"),
                       matrix_from_json(j["phases"], "phases"));
}

nlohmann::json truth_to_json(const Synthesis& synthesis) {
  return json{{"model", model_to_json(synthesis.truth)},
              {"missampling", synthesis.missampling.offsets},
              {"sigma_upsilon_sq", synthesis.sigma_upsilon_sq}};
}

Truth truth_from_json(const json& j) {
  if (!j.contains("model") || !j.contains("missampling") || !j.contains("sigma_upsilon_sq"))
    throw DataError("truth JSON: missing model/missampling/sigma_upsilon_sq");
  Truth t;
  t.model = model_from_json(j["model"]);
  t.missampling.offsets = j["missampling"].get<std::vector<std::vector<double>>>();
  t.sigma_upsilon_sq = j["sigma_upsilon_sq"].get<double>();
  if (!(t.sigma_upsilon_sq >= 0.0)) throw DataError("truth JSON: negative noise variance");
  return t;
}

nlohmann::json bound_report_to_json(const BoundReport& report) {
  return json{{"pseudo_true", model_to_json(report.pseudo_true)},
              {"sigma_eps_sq", report.sigma_eps_sq},
              {"matrix_a", matrix_to_json(report.matrix_a)},
              {"matrix_b", matrix_to_json(report.matrix_b)},
              {"mcrb_core", matrix_to_json(report.mcrb_core)},
              {"bias_sq", matrix_to_json(report.bias_sq)},
              {"lb", matrix_to_json(report.lb)},
              {"crb", matrix_to_json(report.crb)},
              {"mcrb_omega_diag", vector_to_json(report.mcrb_omega_diag)},
              {"bias_sq_omega_diag", vector_to_json(report.bias_sq_omega_diag)},
              {"lb_omega_diag", vector_to_json(report.lb_omega_diag)},
              {"crb_omega_diag", vector_to_json(report.crb_omega_diag)}};
}

void write_periodogram_csv(std::ostream& out, const PeriodogramEstimate& est) {
  out << "omega_rad_per_kyr,freq_per_kyr,period_kyr,power,method\n";
  out << std::setprecision(17);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < est.grid.size(); ++i)
    out << est.grid[i] << ',' << est.grid[i] / two_pi << ',' << two_pi / est.grid[i] << ','
        << est.power[i] << ',' << method_name(est.method) << '\n';
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

} // namespace glosa
