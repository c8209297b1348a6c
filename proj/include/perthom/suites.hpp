#pragma once

// Pass/fail verdicts for sweep studies and field-level validation, shared by
// the CLI and the acceptance binary.

#include "perthom/config.hpp"
#include "perthom/output.hpp"

#include <vector>

namespace perthom {

struct SweepOutputs {
  std::vector<EnsembleStats> rows;
  std::vector<Lemma21Row> lemma21;
  std::vector<RichardsonEntry> richardson;
  std::vector<DerivativeRow> derivative;
};

/// Runs the sweep and every study enabled in the config.
SweepOutputs run_sweep_studies(const RunConfig& config, int workers);

/// One verdict per enabled study plus a seed-failure check.
std::vector<SuiteVerdict> sweep_verdicts(const RunConfig& config, const SweepOutputs& out);

SuiteVerdict lemma21_verdict(const std::vector<Lemma21Row>& rows, double max_ratio);
SuiteVerdict h_refinement_verdict(const std::vector<RichardsonEntry>& entries, const HRefinementStudy& study);
SuiteVerdict derivative_verdict(const std::vector<DerivativeRow>& rows, double relative_factor);

/// Diffeomorphism expansion checks (eigenvalue window, Gamma and sigma bands), shift-consistency of the shipped generators
/// (plus an optional non-stationary negative control) and lattice-average
/// concentration.
std::vector<SuiteVerdict> validate_verdicts(const RunConfig& config);

}  // namespace perthom
