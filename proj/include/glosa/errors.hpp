#ifndef GLOSA_ERRORS_HPP
#define GLOSA_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace glosa {

// Invalid arguments, shape mismatches, violated preconditions.
class ArgumentError : public std::invalid_argument {
public:
  explicit ArgumentError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Malformed input files (CSV/JSON). Carries a line number when known.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg, long line = -1)
      : std::runtime_error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

// Bad experiment/CLI configuration.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thresholding removed every candidate band during zooming.
// Carries the band powers of the level that emptied out.
class NoActiveBandsError : public std::runtime_error {
public:
  NoActiveBandsError(int level, std::vector<double> band_powers)
      : std::runtime_error("all bands pruned at zoom level " + std::to_string(level) +
                           "; lower tau or raise SNR"),
        level_(level), band_powers_(std::move(band_powers)) {}
  int level() const { return level_; }
  const std::vector<double>& band_powers() const { return band_powers_; }

private:
  int level_;
  std::vector<double> band_powers_;
};

// Fewer strict local maxima than requested. Carries what was found.
class PeakCountError : public std::runtime_error {
public:
  PeakCountError(int requested, std::vector<double> found)
      : std::runtime_error("requested " + std::to_string(requested) +
                           " peaks but only found " + std::to_string(found.size())),
        requested_(requested), found_(std::move(found)) {}
  int requested() const { return requested_; }
  const std::vector<double>& found_peaks() const { return found_; }

private:
  int requested_;
  std::vector<double> found_;
};

} // namespace glosa

#endif
