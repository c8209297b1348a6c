#pragma once

// CSV and JSON writers. CSV is long format (one row per matrix component)
// with 17 significant digits; JSON summaries carry the resolved config and a
// single timestamp field.

#include "perthom/config.hpp"
#include "perthom/ensemble.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace perthom {

inline constexpr int kSchemaVersion = 1;

/// "%.17g"; nan and inf spelled out.
std::string format_double(double v);

/// Columns: model,eta,N,subdivisions,quantity,i,j,mean,max_abs,stderr,n_seeds,n_failures.
/// Scalar quantities use i = j = -1.
std::string sweep_csv_header();
std::string sweep_csv_rows(const EnsembleStats& row);
std::string sweep_csv(const std::vector<EnsembleStats>& rows);

/// Same columns for a single realization (n_seeds = 1, stderr = 0).
std::string report_csv(const HomogenizedReport& report);

std::string first_order_limit_csv(const std::vector<Lemma21Row>& rows);
std::string richardson_csv(const std::vector<RichardsonEntry>& entries);
std::string derivative_csv(const std::vector<DerivativeRow>& rows);

nlohmann::ordered_json matrix_json(const Mat& m);
nlohmann::ordered_json report_json(const HomogenizedReport& report);
nlohmann::ordered_json mesh_json(const SuperMesh& super);

struct SuiteVerdict {
  std::string name;
  bool enabled = true;
  bool pass = false;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
};

/// {schema_version, command, generated_at, config_toml, config, suites, ...}.
/// `generated_at` is the only field that differs between identical runs.
nlohmann::ordered_json summary_json(const std::string& command, const RunConfig& config,
                                    const std::vector<SuiteVerdict>& suites);

/// UTC ISO-8601 timestamp.
std::string utc_timestamp();

/// Writes `text` to `dir/name`, creating `dir`. Returns the path.
std::string write_output(const std::string& dir, const std::string& name, const std::string& text);

}  // namespace perthom
