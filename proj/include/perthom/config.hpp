#pragma once

// Run configuration: a TOML document that fully determines every numerical
// output given the seed set. Serialization round-trips losslessly.

#include "perthom/ensemble.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace perthom {

/// Invalid or unreadable configuration; the message names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BandStudy {
  bool enabled = true;
  double factor = 4.0;
  double noise_floor = 1e-6;
  // Reference grid point; unset entries default to (largest eta, smallest N,
  // smallest s).
  double reference_eta = 0.0;
  int reference_N = -1;
  int reference_subdivisions = -1;
};

struct FirstOrderLimitStudy {
  bool enabled = false;
  double max_ratio = 0.5;  // deviation(N_max) <= max_ratio * deviation(N_min)
};

struct HRefinementStudy {
  bool enabled = false;
  std::vector<double> reference;  // expected diagonal of the limit; empty = none
  double tolerance = 1e-3;
  double min_order = 0.0;  // 0 disables the order requirement
};

struct DerivativeStudy {
  bool enabled = false;
  double eta = 0.05;
  double relative_factor = 0.05;  // pass if relative error <= factor * eta
};

struct StudySettings {
  BandStudy band;
  FirstOrderLimitStudy first_order_limit;
  HRefinementStudy h_refinement;
  DerivativeStudy derivative;
};

struct ValidateSettings {
  std::vector<double> etas{0.1, 0.05};
  int samples = 10000;
  int stationarity_pairs = 20;
  bool inject_nonstationary = false;
  std::vector<int> ergodic_N{0, 1, 2, 4};
  int ergodic_seeds = 100;
  double band_factor = 4.0;
};

struct RunConfig {
  SweepSpec sweep;
  StudySettings studies;
  ValidateSettings validate;
  std::string output_dir = "out";
};

/// Parses and validates. Unknown keys are rejected.
RunConfig parse_config(const std::string& toml_text, const std::string& source = "config");
RunConfig load_config(const std::string& path);

/// Canonical TOML text; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// The canonical TOML rendered as JSON text (same keys and values).
std::string config_as_json(const RunConfig& config);

/// Shortest decimal text that reads back to the same double.
std::string format_roundtrip(double v);

}  // namespace perthom
