#include "perthom/suites.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace perthom {

using nlohmann::ordered_json;

namespace {

// Reference grid point of the band check, defaulting to (largest eta,
// smallest N, smallest s).
void band_reference(const RunConfig& c, double& eta, int& N, int& s) {
  const SweepSpec& sw = c.sweep;
  const BandStudy& b = c.studies.band;
  eta = b.reference_eta;
  if (eta == 0.0) {
    for (double e : sw.etas) eta = std::max(eta, std::abs(e));
    if (std::find(sw.etas.begin(), sw.etas.end(), eta) == sw.etas.end()) eta = -eta;
  }
  N = b.reference_N >= 0 ? b.reference_N : *std::min_element(sw.Ns.begin(), sw.Ns.end());
  s = b.reference_subdivisions >= 1 ? b.reference_subdivisions
                                    : *std::min_element(sw.subdivisions.begin(), sw.subdivisions.end());
}

SuiteVerdict band_verdict(const std::string& name, const BandVerdict& v) {
  SuiteVerdict out;
  out.name = name;
  out.pass = v.pass;
  out.details = {{"quantity", v.quantity},
                 {"reference", v.reference},
                 {"maximum", v.maximum},
                 {"ratio", v.reference > 0.0 ? v.maximum / v.reference : 0.0},
                 {"factor", v.factor},
                 {"noise_floor", v.noise_floor},
                 {"worst_eta", v.worst_eta},
                 {"worst_N", v.worst_N},
                 {"worst_subdivisions", v.worst_subdivisions}};
  return out;
}

}  // namespace

SweepOutputs run_sweep_studies(const RunConfig& config, int workers) {
  SweepOutputs out;
  if (!config.sweep.etas.empty()) out.rows = run_sweep(config.sweep, workers);
  if (config.studies.first_order_limit.enabled) out.lemma21 = lemma21_study(config.sweep, workers);
  if (config.studies.h_refinement.enabled) out.richardson = h_refinement_study(config.sweep, out.rows);
  if (config.studies.derivative.enabled) {
    out.derivative = derivative_study(config.sweep, config.studies.derivative.eta, workers);
  }
  return out;
}

SuiteVerdict lemma21_verdict(const std::vector<Lemma21Row>& rows, double max_ratio) {
  SuiteVerdict out;
  out.name = "first_order_limit_convergence";
  out.pass = !rows.empty();
  std::map<int, std::vector<const Lemma21Row*>> by_s;
  for (const Lemma21Row& r : rows) by_s[r.subdivisions].push_back(&r);
  ordered_json levels = ordered_json::array();
  for (auto& [s, list] : by_s) {
    std::sort(list.begin(), list.end(), [](const Lemma21Row* a, const Lemma21Row* b) { return a->N < b->N; });
    const double first = list.front()->deviation.mean;
    const double last = list.back()->deviation.mean;
    bool monotone = true;
    for (std::size_t k = 1; k < list.size(); ++k) {
      monotone = monotone && list[k]->deviation.mean < list[k - 1]->deviation.mean;
    }
    const bool ok = list.size() >= 2 && last < first && last <= max_ratio * first && list.back()->failures.empty();
    out.pass = out.pass && ok;
    levels.push_back({{"subdivisions", s},
                      {"N_first", list.front()->N},
                      {"N_last", list.back()->N},
                      {"deviation_first", first},
                      {"deviation_last", last},
                      {"ratio", first > 0.0 ? last / first : 0.0},
                      {"monotone", monotone},
                      {"pass", ok}});
  }
  out.details = {{"max_ratio", max_ratio}, {"levels", levels}};
  return out;
}

SuiteVerdict h_refinement_verdict(const std::vector<RichardsonEntry>& entries, const HRefinementStudy& study) {
  SuiteVerdict out;
  out.name = "h_refinement";
  out.pass = true;
  ordered_json list = ordered_json::array();
  for (const RichardsonEntry& e : entries) {
    if (e.quantity != "A_per_star") continue;
    bool ok = true;
    double target = std::nan("");
    if (!study.reference.empty()) {
      target = e.i == e.j ? study.reference.at(e.i) : 0.0;
      ok = ok && std::abs(e.extrapolated - target) <= study.tolerance;
    }
    if (study.min_order > 0.0) ok = ok && (e.exact || (!std::isnan(e.order) && e.order >= study.min_order));
    out.pass = out.pass && ok;
    list.push_back({{"i", e.i},
                    {"j", e.j},
                    {"extrapolated", e.extrapolated},
                    {"reference", target},
                    {"order", e.order_label()},
                    {"pass", ok}});
  }
  out.details = {{"tolerance", study.tolerance}, {"min_order", study.min_order}, {"entries", list}};
  return out;
}

SuiteVerdict derivative_verdict(const std::vector<DerivativeRow>& rows, double relative_factor) {
  SuiteVerdict out;
  out.name = "first_derivative";
  out.pass = !rows.empty();
  double worst = 0.0;
  int failures = 0;
  double eta = rows.empty() ? 0.0 : rows.front().eta;
  for (const DerivativeRow& r : rows) {
    if (!r.failure.empty()) {
      ++failures;
      out.pass = false;
      continue;
    }
    worst = std::max(worst, r.relative_error);
    if (!(r.relative_error <= relative_factor * r.eta)) out.pass = false;
  }
  out.details = {{"eta", eta},
                 {"threshold", relative_factor * eta},
                 {"worst_relative_error", worst},
                 {"seeds", rows.size()},
                 {"failures", failures}};
  return out;
}

std::vector<SuiteVerdict> sweep_verdicts(const RunConfig& config, const SweepOutputs& out) {
  std::vector<SuiteVerdict> verdicts;
  if (config.studies.band.enabled && !out.rows.empty()) {
    double eta;
    int N, s;
    band_reference(config, eta, N, s);
    const BandStudy& b = config.studies.band;
    verdicts.push_back(
        band_verdict("band_residual", band_check(out.rows, "residual_max", eta, N, s, b.factor, b.noise_floor)));
    verdicts.push_back(band_verdict("band_z_norm", band_check(out.rows, "z_norm", eta, N, s, b.factor, b.noise_floor)));
  }
  if (config.studies.first_order_limit.enabled) verdicts.push_back(lemma21_verdict(out.lemma21, config.studies.first_order_limit.max_ratio));
  if (config.studies.h_refinement.enabled) {
    verdicts.push_back(h_refinement_verdict(out.richardson, config.studies.h_refinement));
  }
  if (config.studies.derivative.enabled) {
    verdicts.push_back(derivative_verdict(out.derivative, config.studies.derivative.relative_factor));
  }
  SuiteVerdict failures;
  failures.name = "no_seed_failures";
  std::size_t n = 0;
  ordered_json examples = ordered_json::array();
  for (const EnsembleStats& r : out.rows) {
    n += r.failures.size();
    for (const SeedFailure& f : r.failures) {
      if (examples.size() < 5) {
        examples.push_back({{"eta", r.eta}, {"N", r.N}, {"subdivisions", r.subdivisions}, {"seed", f.seed},
                            {"message", f.message}});
      }
    }
  }
  failures.pass = n == 0;
  failures.details = {{"failures", n}, {"examples", examples}};
  verdicts.push_back(failures);
  return verdicts;
}

std::vector<SuiteVerdict> validate_verdicts(const RunConfig& config) {
  const SweepSpec& sw = config.sweep;
  const ValidateSettings& v = config.validate;
  std::vector<SuiteVerdict> verdicts;

  // Expansions of the inverse Jacobian and determinant.
  {
    const Model2Diffeomorphism diffeo = sw.model2_diffeomorphism();
    const model2::Lemma31Record rec =
        model2::lemma31_validate(diffeo, Realization(sw.base_seed), v.etas, v.samples, 0, v.band_factor);
    SuiteVerdict s;
    s.name = "diffeomorphism_expansion";
    s.pass = rec.pass();
    ordered_json rows = ordered_json::array();
    for (const model2::Lemma31Row& r : rec.rows) {
      rows.push_back({{"eta", r.eta},
                      {"gamma_sup", r.gamma_sup},
                      {"sigma_sup", r.sigma_sup},
                      {"gamma_over_eta2", r.gamma_ratio},
                      {"sigma_over_eta2", r.sigma_ratio},
                      {"eig_min", r.eig_min},
                      {"eig_max", r.eig_max},
                      {"det_min", r.det_min},
                      {"eigen_window", r.eigen_window}});
    }
    s.details = {{"samples", v.samples},
                 {"eta0", diffeo.eta0()},
                 {"nu", diffeo.nu()},
                 {"m_prime", diffeo.m_prime()},
                 {"gamma_band", rec.gamma_band},
                 {"sigma_band", rec.sigma_band},
                 {"band_factor", rec.band_factor},
                 {"eigen_pass", rec.eigen_pass},
                 {"rows", rows}};
    verdicts.push_back(s);
  }

  // Shift consistency F(x + k, omega) = F(x, tau_k omega).
  {
    const Model1Coefficients coeffs(sw.profile, sw.model1);
    const Model2Diffeomorphism diffeo = sw.model2_diffeomorphism();
    std::vector<std::pair<std::string, FieldEvaluator>> fields = {
        {"model1_A1", [&](const Vec& x, const Realization& r) { return coeffs.a1(x, r); }},
        {"model2_grad_psi", [&](const Vec& x, const Realization& r) { return diffeo.grad_psi(x, r); }},
        {"model2_det_grad_phi",
         [&](const Vec& x, const Realization& r) {
           return Mat::Constant(1, 1, diffeo.det_grad_phi(x, r, diffeo.eta_max()));
         }},
    };
    if (v.inject_nonstationary) {
      fields.push_back({"injected_x1", [](const Vec& x, const Realization&) { return Mat::Constant(1, 1, x(0)); }});
    }
    SuiteVerdict s;
    s.name = "stationarity";
    s.pass = true;
    ordered_json per_field = ordered_json::object();
    std::mt19937_64 gen(sw.base_seed);
    std::uniform_int_distribution<int> mag(1, 5);
    std::uniform_int_distribution<int> sign(0, 1);
    std::vector<std::pair<std::uint64_t, LatticeVector>> pairs;
    for (int i = 0; i < v.stationarity_pairs; ++i) {
      LatticeVector k{};
      for (int a = 0; a < sw.dim; ++a) k[a] = (sign(gen) ? 1 : -1) * mag(gen);
      pairs.emplace_back(sw.seed_at(i), k);
    }
    for (const auto& [name, f] : fields) {
      double worst = 0.0;
      for (const auto& [seed, k] : pairs) {
        worst = std::max(worst, stationarity_check(f, Realization(seed), k, 50, sw.dim, seed));
      }
      per_field[name] = worst;
      s.pass = s.pass && worst <= 1e-12;
    }
    s.details = {{"pairs", v.stationarity_pairs}, {"tolerance", 1e-12}, {"max_discrepancy", per_field}};
    verdicts.push_back(s);
  }

  // Lattice averages of the i.i.d. cell draw concentrate at the CLT rate.
  {
    SuiteVerdict s;
    s.name = "ergodic_average";
    s.pass = true;
    ordered_json rows = ordered_json::array();
    const ScalarEvaluator draw = [](const Vec& x, const Realization& r) {
      return r.cell_draw(lattice_cell_of(x), 0);
    };
    for (int N : v.ergodic_N) {
      const double cells = std::pow(2.0 * N + 1.0, sw.dim);
      const double bound = 4.0 / std::sqrt(3.0 * cells);
      int inside = 0;
      double sum = 0.0;
      for (int i = 0; i < v.ergodic_seeds; ++i) {
        const double avg = ergodic_average(draw, Realization(sw.seed_at(i)), N, Vec::Zero(sw.dim));
        sum += avg;
        if (std::abs(avg) <= bound) ++inside;
      }
      const double fraction = static_cast<double>(inside) / v.ergodic_seeds;
      const bool ok = fraction >= 0.99;
      s.pass = s.pass && ok;
      rows.push_back({{"N", N}, {"bound", bound}, {"fraction_within", fraction}, {"mean", sum / v.ergodic_seeds},
                      {"pass", ok}});
    }
    s.details = {{"seeds", v.ergodic_seeds}, {"rows", rows}};
    verdicts.push_back(s);
  }
  return verdicts;
}

}  // namespace perthom
