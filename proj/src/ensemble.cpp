#include "perthom/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <variant>

namespace perthom {

// ---------------------------------------------------------------------------
// SweepSpec

void SweepSpec::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (model != 1 && model != 2) fail("model: must be 1 or 2");
  if (dim != 1 && dim != 2) fail("dim: must be 1 or 2");
  if (profile.dim() != dim) fail("profile: dimension does not match dim");
  if (Ns.empty()) fail("grid.N: list is empty");
  if (subdivisions.empty()) fail("grid.subdivisions: list is empty");
  if (seed_count < 1) fail("seeds.count: must be >= 1");
  for (int N : Ns) {
    if (N < 0) fail("grid.N: entries must be >= 0");
  }
  for (int s : subdivisions) {
    if (s < 1) fail("grid.subdivisions: entries must be >= 1");
  }
  if (!(solver.rtol > 0.0)) fail("solver.rtol: must be > 0");
  if (solver.max_iter_factor < 1) fail("solver.max_iter_factor: must be >= 1");
  // Constructing the family validates coercivity / the nu-check; eta range is
  // checked against it.
  if (model == 1) {
    const Model1Coefficients c = model1_coefficients();
    for (double eta : etas) c.check_eta(eta);
  } else {
    const Model2Diffeomorphism d = model2_diffeomorphism();
    for (double eta : etas) d.check_eta(eta);
  }
}

SolverSettings SweepSpec::effective_solver() const {
  SolverSettings s = solver;
  for (double eta : etas) {
    if (eta != 0.0 && eta * eta <= 1e-3) s.rtol = std::min(s.rtol, 1e-11);
  }
  return s;
}

Model1Coefficients SweepSpec::model1_coefficients() const { return Model1Coefficients(profile, model1); }

Model2Diffeomorphism SweepSpec::model2_diffeomorphism() const { return Model2Diffeomorphism(dim, model2); }

// ---------------------------------------------------------------------------
// Statistics

const MatrixStat& EnsembleStats::matrix(const std::string& quantity) const {
  for (const MatrixStat& m : matrices) {
    if (m.quantity == quantity) return m;
  }
  throw std::out_of_range("no matrix statistic '" + quantity + "'");
}

const ScalarStat& EnsembleStats::scalar(const std::string& quantity) const {
  for (const ScalarStat& s : scalars) {
    if (s.quantity == quantity) return s;
  }
  throw std::out_of_range("no scalar statistic '" + quantity + "'");
}

ScalarStat summarize(const std::string& quantity, const std::vector<double>& values) {
  ScalarStat out;
  out.quantity = quantity;
  const std::size_t n = values.size();
  if (n == 0) {
    out.mean = out.max_abs = out.std_error = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    out.max_abs = std::max(out.max_abs, std::abs(v));
  }
  out.mean = sum / n;
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std_error = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
  }
  return out;
}

MatrixStat summarize(const std::string& quantity, const std::vector<Mat>& values) {
  MatrixStat out;
  out.quantity = quantity;
  if (values.empty()) return out;
  const int rows = values.front().rows();
  const int cols = values.front().cols();
  out.mean = Mat::Zero(rows, cols);
  out.max_abs = Mat::Zero(rows, cols);
  out.std_error = Mat::Zero(rows, cols);
  std::vector<double> entries(values.size());
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      for (std::size_t k = 0; k < values.size(); ++k) entries[k] = values[k](i, j);
      const ScalarStat s = summarize(quantity, entries);
      out.mean(i, j) = s.mean;
      out.max_abs(i, j) = s.max_abs;
      out.std_error(i, j) = s.std_error;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parallel execution

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(int count, int workers, const std::function<void(int)>& task) {
  const int n_threads = std::min(resolve_workers(workers), std::max(count, 1));
  std::vector<std::exception_ptr> errors(count);
  if (n_threads <= 1) {
    for (int i = 0; i < count; ++i) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (int i = next++; i < count; i = next++) {
          try {
            task(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------------------------------------------------------------------------
// Per-realization pipeline shared by the sweep and the studies

namespace {

struct Block {
  const SweepSpec& spec;
  const SuperMesh& super;
  const model1::PeriodicReference& ref;
  const std::optional<Model1Coefficients>& coeffs;
  const std::optional<Model2Diffeomorphism>& diffeo;
  SolverSettings settings;
};

struct FirstOrder {
  std::vector<CorrectorSolution> w1;
  Mat A1;
};

FirstOrder first_order(const Block& b, const Realization& r) {
  const int dim = b.super.dim();
  FirstOrder out;
  for (int j = 0; j < dim; ++j) {
    const Vec p = unit_vector(dim, j);
    if (b.spec.model == 1) {
      out.w1.push_back(model1::solve_corrector_1(*b.coeffs, r, b.super, b.ref.w0[j], p, b.settings));
    } else {
      out.w1.push_back(model2::solve_corrector_1_diffeo(*b.diffeo, b.spec.profile, r, b.super, b.ref.w0[j], p,
                                                        b.spec.model2_options.sign, b.settings));
    }
  }
  out.A1 = b.spec.model == 1
               ? model1::homogenized_first_order(*b.coeffs, r, b.super, b.ref.w0, out.w1)
               : model2::homogenized_first_order_diffeo(*b.diffeo, b.spec.profile, r, b.super, b.ref.w0, out.w1,
                                                        b.ref.A_per_star);
  return out;
}

struct EtaLevel {
  std::vector<CorrectorSolution> w;
  Mat A;
};

EtaLevel eta_level(const Block& b, const Realization& r, double eta) {
  const int dim = b.super.dim();
  EtaLevel out;
  for (int j = 0; j < dim; ++j) {
    const Vec p = unit_vector(dim, j);
    if (b.spec.model == 1) {
      out.w.push_back(model1::solve_corrector_eta(*b.coeffs, r, eta, b.super, p, b.settings));
    } else {
      out.w.push_back(model2::solve_corrector_eta_diffeo(*b.diffeo, b.spec.profile, r, eta, b.super, p, b.settings));
    }
  }
  out.A = b.spec.model == 1 ? model1::homogenized_eta(*b.coeffs, r, eta, b.super, out.w)
                            : model2::homogenized_eta_diffeo(*b.diffeo, b.spec.profile, r, eta, b.super, out.w,
                                                             b.spec.model2_options.normalization);
  return out;
}

std::string failure_message(const std::exception& e) { return e.what(); }

struct Families {
  std::optional<Model1Coefficients> coeffs;
  std::optional<Model2Diffeomorphism> diffeo;
};

Families make_families(const SweepSpec& spec) {
  Families f;
  if (spec.model == 1) {
    f.coeffs.emplace(spec.model1_coefficients());
  } else {
    f.diffeo.emplace(spec.model2_diffeomorphism());
  }
  return f;
}

using SeedOutcome = std::variant<HomogenizedReport, SeedFailure>;

EnsembleStats merge_row(const SweepSpec& spec, double eta, int N, int s, const std::vector<SeedOutcome>& outcomes) {
  EnsembleStats row;
  row.model = spec.model;
  row.eta = eta;
  row.N = N;
  row.subdivisions = s;
  for (const SeedOutcome& o : outcomes) {
    if (const auto* rep = std::get_if<HomogenizedReport>(&o)) {
      row.reports.push_back(*rep);
    } else {
      row.failures.push_back(std::get<SeedFailure>(o));
    }
  }
  row.n_seeds = static_cast<int>(row.reports.size());
  std::vector<Mat> a_eta, a_per, a1, res;
  std::vector<double> rmax, rfro, z, v;
  for (const HomogenizedReport& rep : row.reports) {
    a_eta.push_back(rep.A_eta_star);
    a_per.push_back(rep.A_per_star);
    a1.push_back(rep.A1_star);
    res.push_back(rep.residual_matrix);
    rmax.push_back(rep.residual_max);
    rfro.push_back(rep.residual_frobenius);
    z.push_back(rep.z_norm);
    v.push_back(rep.v_norm);
  }
  row.matrices = {summarize("A_eta_star", a_eta), summarize("A_per_star", a_per), summarize("A1_star", a1),
                  summarize("residual_matrix", res)};
  row.scalars = {summarize("residual_max", rmax), summarize("residual_frobenius", rfro), summarize("z_norm", z),
                 summarize("v_norm", v)};
  return row;
}

}  // namespace

std::vector<EnsembleStats> run_sweep(const SweepSpec& spec, int workers, const PoisonHook& poison,
                                     const RowCallback& on_row) {
  spec.validate();
  const SolverSettings settings = spec.effective_solver();
  const Families fam = make_families(spec);
  std::map<int, UnitMesh> units;
  std::map<int, model1::PeriodicReference> refs;
  for (int s : spec.subdivisions) {
    if (units.count(s)) continue;
    units.emplace(s, build_unit_mesh(spec.dim, s));
    refs.emplace(s, model1::periodic_reference(spec.profile, units.at(s), settings));
  }

  std::vector<double> etas;
  for (double eta : spec.etas) {
    if (eta != 0.0) etas.push_back(eta);
  }

  std::vector<EnsembleStats> rows;
  for (int N : spec.Ns) {
    for (int s : spec.subdivisions) {
      const SuperMesh super = replicate(units.at(s), N);
      const Block block{spec, super, refs.at(s), fam.coeffs, fam.diffeo, settings};
      // outcomes[seed][eta]
      std::vector<std::vector<SeedOutcome>> outcomes(spec.seed_count);
      parallel_for(spec.seed_count, workers, [&](int i) {
        const std::uint64_t seed = spec.seed_at(i);
        const Realization r(seed);
        std::vector<SeedOutcome>& out = outcomes[i];
        out.reserve(etas.size());
        std::optional<FirstOrder> fo;
        std::string fo_error;
        try {
          fo.emplace(first_order(block, r));
        } catch (const std::exception& e) {
          fo_error = failure_message(e);
        }
        for (double eta : etas) {
          if (!fo) {
            out.emplace_back(SeedFailure{seed, fo_error});
            continue;
          }
          try {
            if (poison && poison(eta, N, s, seed)) throw SolverError("forced solver failure (test hook)");
            const EtaLevel lvl = eta_level(block, r, eta);
            out.emplace_back(make_residual_report(spec.model, super, eta, seed, lvl.A, block.ref.A_per_star, fo->A1,
                                                  lvl.w, block.ref.w0, fo->w1));
          } catch (const std::exception& e) {
            out.emplace_back(SeedFailure{seed, failure_message(e)});
          }
        }
      });
      for (std::size_t e = 0; e < etas.size(); ++e) {
        std::vector<SeedOutcome> per_seed;
        per_seed.reserve(spec.seed_count);
        for (int i = 0; i < spec.seed_count; ++i) per_seed.push_back(outcomes[i][e]);
        rows.push_back(merge_row(spec, etas[e], N, s, per_seed));
        if (on_row) on_row(rows.back());
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Studies

std::vector<Lemma21Row> lemma21_study(const SweepSpec& spec, int workers) {
  if (spec.model != 1) throw std::invalid_argument("model: the first-order limit study needs model 1");
  spec.validate();
  const SolverSettings settings = spec.effective_solver();
  const Families fam = make_families(spec);
  std::vector<Lemma21Row> rows;
  for (int N : spec.Ns) {
    for (int s : spec.subdivisions) {
      const UnitMesh unit = build_unit_mesh(spec.dim, s);
      const model1::PeriodicReference ref = model1::periodic_reference(spec.profile, unit, settings);
      const SuperMesh super = replicate(unit, N);
      const Block block{spec, super, ref, fam.coeffs, fam.diffeo, settings};
      Lemma21Row row;
      row.N = N;
      row.subdivisions = s;
      row.limit = model1::lemma21_limit(*fam.coeffs, unit, ref.w0);
      std::vector<std::optional<Mat>> a1(spec.seed_count);
      std::vector<std::string> errors(spec.seed_count);
      parallel_for(spec.seed_count, workers, [&](int i) {
        try {
          a1[i] = first_order(block, Realization(spec.seed_at(i))).A1;
        } catch (const std::exception& e) {
          errors[i] = failure_message(e);
        }
      });
      std::vector<Mat> values;
      std::vector<double> dev;
      for (int i = 0; i < spec.seed_count; ++i) {
        if (!a1[i]) {
          row.failures.push_back({spec.seed_at(i), errors[i]});
          continue;
        }
        values.push_back(*a1[i]);
        dev.push_back(max_norm(*a1[i] - row.limit));
      }
      row.A1_star = summarize("A1_star", values);
      row.deviation = summarize("deviation", dev);
      row.n_seeds = static_cast<int>(dev.size());
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string RichardsonEntry::order_label() const {
  if (exact) return "exact";
  if (std::isnan(order)) return "non-asymptotic";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", order);
  return buf;
}

RichardsonEntry richardson(const std::vector<int>& subdivisions, const std::vector<double>& values) {
  const std::size_t n = subdivisions.size();
  if (n < 3 || values.size() != n) throw std::invalid_argument("Richardson extrapolation needs >= 3 levels");
  const int s1 = subdivisions[n - 3];
  const int s2 = subdivisions[n - 2];
  const int s3 = subdivisions[n - 1];
  if (s1 <= 0 || s2 % s1 != 0 || s3 * s1 != s2 * s2 || s2 <= s1) {
    throw std::invalid_argument("Richardson extrapolation needs subdivisions in geometric progression");
  }
  const double ratio = static_cast<double>(s2) / s1;
  RichardsonEntry out;
  out.subdivisions = subdivisions;
  out.values = values;
  const double v1 = values[n - 3];
  const double v2 = values[n - 2];
  const double v3 = values[n - 1];
  const double d1 = v1 - v2;
  const double d2 = v2 - v3;
  const double tol = 1e-9 * std::max(1.0, std::abs(v3));
  if (std::abs(d1) <= tol && std::abs(d2) <= tol) {
    out.exact = true;
    out.order = std::numeric_limits<double>::infinity();
    out.extrapolated = v3;
  } else if (d1 * d2 > 0.0) {
    out.order = std::log(d1 / d2) / std::log(ratio);
    out.extrapolated = v3 - d2 / (std::pow(ratio, out.order) - 1.0);
  } else {
    out.order = std::numeric_limits<double>::quiet_NaN();
    out.extrapolated = v3;
  }
  return out;
}

std::vector<RichardsonEntry> h_refinement_study(const SweepSpec& spec, const std::vector<EnsembleStats>& sweep_rows) {
  const SolverSettings settings = spec.effective_solver();
  std::vector<int> levels = spec.subdivisions;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::vector<Mat> a_per;
  for (int s : levels) {
    const UnitMesh unit = build_unit_mesh(spec.dim, s);
    a_per.push_back(model1::periodic_reference(spec.profile, unit, settings).A_per_star);
  }
  std::vector<RichardsonEntry> out;
  for (int i = 0; i < spec.dim; ++i) {
    for (int j = 0; j < spec.dim; ++j) {
      std::vector<double> v;
      for (const Mat& m : a_per) v.push_back(m(i, j));
      RichardsonEntry e = richardson(levels, v);
      e.quantity = "A_per_star";
      e.i = i;
      e.j = j;
      e.eta = std::numeric_limits<double>::quiet_NaN();
      out.push_back(std::move(e));
    }
  }
  if (sweep_rows.empty()) return out;
  for (const std::string quantity : {"residual_max", "z_norm"}) {
    for (double eta : spec.etas) {
      if (eta == 0.0) continue;
      for (int N : spec.Ns) {
        std::vector<double> v;
        for (int s : levels) {
          for (const EnsembleStats& row : sweep_rows) {
            if (row.eta == eta && row.N == N && row.subdivisions == s) v.push_back(row.scalar(quantity).mean);
          }
        }
        if (v.size() != levels.size()) continue;
        RichardsonEntry e = richardson(levels, v);
        e.quantity = quantity;
        e.eta = eta;
        e.N = N;
        out.push_back(std::move(e));
      }
    }
  }
  return out;
}

std::vector<DerivativeRow> derivative_study(const SweepSpec& spec, double eta, int workers) {
  if (!(eta > 0.0)) throw std::invalid_argument("derivative study needs eta > 0");
  spec.validate();
  const SolverSettings settings = spec.effective_solver();
  const Families fam = make_families(spec);
  if (spec.model == 1) fam.coeffs->check_eta(eta);
  if (spec.model == 2) fam.diffeo->check_eta(eta);
  std::vector<DerivativeRow> rows;
  for (int N : spec.Ns) {
    for (int s : spec.subdivisions) {
      const UnitMesh unit = build_unit_mesh(spec.dim, s);
      const model1::PeriodicReference ref = model1::periodic_reference(spec.profile, unit, settings);
      const SuperMesh super = replicate(unit, N);
      const Block block{spec, super, ref, fam.coeffs, fam.diffeo, settings};
      std::vector<DerivativeRow> block_rows(spec.seed_count);
      parallel_for(spec.seed_count, workers, [&](int i) {
        DerivativeRow& row = block_rows[i];
        row.N = N;
        row.subdivisions = s;
        row.seed = spec.seed_at(i);
        row.eta = eta;
        try {
          const Realization r(row.seed);
          row.A1_star = first_order(block, r).A1;
          const Mat plus = eta_level(block, r, eta).A;
          const Mat minus = eta_level(block, r, -eta).A;
          row.central_difference = (plus - minus) / (2.0 * eta);
          const double scale = max_norm(row.A1_star);
          const double err = max_norm(row.central_difference - row.A1_star);
          row.relative_error = scale > 0.0 ? err / scale : (err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        } catch (const std::exception& e) {
          row.failure = failure_message(e);
        }
      });
      for (DerivativeRow& r : block_rows) rows.push_back(std::move(r));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Verdicts

BandVerdict band_check(const std::vector<EnsembleStats>& rows, const std::string& quantity, double ref_eta,
                       int ref_N, int ref_subdivisions, double factor, double noise_floor) {
  BandVerdict v;
  v.quantity = quantity;
  v.factor = factor;
  v.noise_floor = noise_floor;
  bool have_ref = false;
  for (const EnsembleStats& row : rows) {
    if (row.n_seeds == 0) continue;
    const double m = row.scalar(quantity).max_abs;
    if (row.eta == ref_eta && row.N == ref_N && row.subdivisions == ref_subdivisions) {
      v.reference = m;
      have_ref = true;
    }
    if (m > v.maximum || (v.maximum == 0.0 && m == 0.0 && v.worst_subdivisions == 0)) {
      v.maximum = m;
      v.worst_eta = row.eta;
      v.worst_N = row.N;
      v.worst_subdivisions = row.subdivisions;
    }
  }
  v.pass = have_ref && (v.maximum <= factor * v.reference || v.maximum <= noise_floor);
  return v;
}

}  // namespace perthom
