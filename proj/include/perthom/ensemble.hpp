#pragma once

// Seeded Monte Carlo sweeps over (eta, N, h) grids. Work is split into
// (N, s, seed) tasks; results merge in grid order, so output never depends on
// the worker count.

#include "perthom/model1.hpp"
#include "perthom/model2.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace perthom {

struct SweepSpec {
  int model = 1;
  int dim = 2;
  PeriodicProfile profile = PeriodicProfile::constant({1.0, 1.0});
  Model1Params model1;
  Model2Params model2;
  model2::Options model2_options;
  std::vector<double> etas;
  std::vector<int> Ns;
  std::vector<int> subdivisions;
  int seed_count = 1;
  std::uint64_t base_seed = 0;
  SolverSettings solver;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  /// Solver settings actually used: rtol is tightened to 1e-11 when some
  /// eta^2 <= 1e-3.
  SolverSettings effective_solver() const;
  std::uint64_t seed_at(int i) const { return base_seed + static_cast<std::uint64_t>(i); }

  Model1Coefficients model1_coefficients() const;
  Model2Diffeomorphism model2_diffeomorphism() const;
};

struct MatrixStat {
  std::string quantity;
  Mat mean;
  Mat max_abs;  // componentwise max over seeds of |entry|
  Mat std_error;
};

struct ScalarStat {
  std::string quantity;
  double mean = 0.0;
  double max_abs = 0.0;
  double std_error = 0.0;
};

struct SeedFailure {
  std::uint64_t seed = 0;
  std::string message;
};

/// One grid point (eta, N, s).
struct EnsembleStats {
  int model = 1;
  double eta = 0.0;
  int N = 0;
  int subdivisions = 0;
  int n_seeds = 0;  // successful seeds
  std::vector<SeedFailure> failures;
  std::vector<MatrixStat> matrices;  // A_eta_star, A_per_star, A1_star, residual_matrix
  std::vector<ScalarStat> scalars;   // residual_max, residual_frobenius, z_norm, v_norm
  std::vector<HomogenizedReport> reports;  // successful seeds, seed order

  const MatrixStat& matrix(const std::string& quantity) const;
  const ScalarStat& scalar(const std::string& quantity) const;
};

/// Returns true to force a solver failure at (eta, N, s, seed). Test hook.
using PoisonHook = std::function<bool(double eta, int N, int subdivisions, std::uint64_t seed)>;
using RowCallback = std::function<void(const EnsembleStats&)>;

/// Rows ordered by N, then s, then eta. `workers` <= 0 means
/// hardware concurrency. `on_row` is called in that order as each (N, s)
/// block completes.
std::vector<EnsembleStats> run_sweep(const SweepSpec& spec, int workers = 0, const PoisonHook& poison = {},
                                     const RowCallback& on_row = {});

/// Summary statistics of a sample: mean, max |x| and sample-std / sqrt(n).
ScalarStat summarize(const std::string& quantity, const std::vector<double>& values);
MatrixStat summarize(const std::string& quantity, const std::vector<Mat>& values);

// ---------------------------------------------------------------------------
// Studies

struct Lemma21Row {
  int N = 0;
  int subdivisions = 0;
  Mat limit;                   // deterministic A1*
  MatrixStat A1_star;          // over seeds
  ScalarStat deviation;        // |A1^{h,N}(omega) - A1*|, largest entry
  int n_seeds = 0;             // successful seeds
  std::vector<SeedFailure> failures;
};

/// Model 1 only; every (N, s) of the sweep, etas unused.
std::vector<Lemma21Row> lemma21_study(const SweepSpec& spec, int workers = 0);

struct RichardsonEntry {
  std::string quantity;
  int i = -1;
  int j = -1;
  double eta = 0.0;  // NaN for A_per_star
  int N = -1;
  std::vector<int> subdivisions;
  std::vector<double> values;
  bool exact = false;      // no h-dependence beyond 1e-9 relative
  double order = 0.0;      // NaN when the last three levels are not monotone
  double extrapolated = 0.0;

  std::string order_label() const;
};

/// Richardson extrapolation from the last three of a geometric sequence of
/// levels. Throws std::invalid_argument for fewer than three levels or a
/// non-geometric sequence.
RichardsonEntry richardson(const std::vector<int>& subdivisions, const std::vector<double>& values);

/// A_per^h for every s, and (when `sweep_rows` is non-empty) the mean
/// residual_max and z_norm per (eta, N) across s.
std::vector<RichardsonEntry> h_refinement_study(const SweepSpec& spec,
                                                const std::vector<EnsembleStats>& sweep_rows = {});

struct DerivativeRow {
  int N = 0;
  int subdivisions = 0;
  std::uint64_t seed = 0;
  double eta = 0.0;
  Mat central_difference;  // (A*_eta - A*_{-eta}) / (2 eta)
  Mat A1_star;
  double relative_error = 0.0;  // max|CD - A1| / max|A1|
  std::string failure;          // non-empty if a solve failed
};

/// Central-difference check of the first-order matrix at +-eta for every
/// (N, s, seed) of the sweep.
std::vector<DerivativeRow> derivative_study(const SweepSpec& spec, double eta, int workers = 0);

// ---------------------------------------------------------------------------
// Verdicts

struct BandVerdict {
  std::string quantity;
  double reference = 0.0;  // max over seeds at the reference point
  double maximum = 0.0;    // max over all grid points and seeds
  double factor = 4.0;
  double noise_floor = 0.0;
  double worst_eta = 0.0;
  int worst_N = 0;
  int worst_subdivisions = 0;
  bool pass = false;
};

/// max over rows of the scalar's max_abs must be <= factor * its value at the
/// reference point. A maximum at or below `noise_floor` passes (degenerate
/// families whose residual is solver noise).
BandVerdict band_check(const std::vector<EnsembleStats>& rows, const std::string& quantity, double ref_eta,
                       int ref_N, int ref_subdivisions, double factor = 4.0, double noise_floor = 1e-6);

/// Runs `count` independent tasks on up to `workers` threads.
void parallel_for(int count, int workers, const std::function<void(int)>& task);

int resolve_workers(int workers);

}  // namespace perthom
