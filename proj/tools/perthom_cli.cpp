// perthom: single solves, sweeps and validation suites driven by a TOML config.
//
// Exit codes: 0 success, 1 I/O or internal error, 2 config/argument error,
// 3 solver or coercivity failure, 4 an enabled suite failed.

#include "perthom/config.hpp"
#include "perthom/output.hpp"
#include "perthom/suites.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace perthom;
using nlohmann::ordered_json;

constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitSuite = 4;

struct CommonArgs {
  std::string config_path;
  std::string out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed_base;
  std::string normalization;
};

struct SingleArgs {
  std::optional<double> eta;
  std::optional<std::uint64_t> seed;
  int direction = 0;
  std::optional<int> N;
  std::optional<int> subdivisions;
  std::string level = "eta";
  bool dump_mesh = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "TOML run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", a.out, "output directory (overrides PERTHOM_OUT and the config)");
  cmd->add_option("--workers", a.workers, "worker threads, 0 = available parallelism (overrides PERTHOM_WORKERS)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed-base", a.seed_base, "base seed; seed i is base + i");
  cmd->add_option("--normalization", a.normalization, "model 2 homogenized-matrix normalization")
      ->check(CLI::IsMember({"as-printed", "volume-normalized"}));
}

void add_single(CLI::App* cmd, SingleArgs& a, bool with_corrector_flags) {
  cmd->add_option("--eta", a.eta, "perturbation size (default: first grid eta, else 0)");
  cmd->add_option("--seed", a.seed, "realization seed (default: base seed)");
  cmd->add_option("--N", a.N, "supercell half-width (default: first grid N)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--subdivisions", a.subdivisions, "unit-cell subdivisions (default: first grid value)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--dump-mesh", a.dump_mesh, "also write mesh.json");
  if (with_corrector_flags) {
    cmd->add_option("--direction", a.direction, "canonical direction index of p")->check(CLI::NonNegativeNumber);
    cmd->add_option("--level", a.level, "corrector level: eta, 0 (periodic) or 1 (first order)")
        ->check(CLI::IsMember({"eta", "0", "1"}));
  }
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

// Flag > environment > config for the output directory and worker count.
struct Resolved {
  RunConfig config;
  std::string out_dir;
  int workers = 0;
};

Resolved resolve(const CommonArgs& a) {
  Resolved r;
  r.config = load_config(a.config_path);
  if (a.seed_base) r.config.sweep.base_seed = *a.seed_base;
  if (!a.normalization.empty()) {
    r.config.sweep.model2_options.normalization = model2::normalization_from_string(a.normalization);
  }
  r.out_dir = !a.out.empty() ? a.out : env("PERTHOM_OUT").value_or(r.config.output_dir);
  if (a.workers) {
    r.workers = *a.workers;
  } else if (auto w = env("PERTHOM_WORKERS")) {
    try {
      std::size_t used = 0;
      r.workers = std::stoi(*w, &used);
      if (used != w->size() || r.workers < 0) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError("PERTHOM_WORKERS: expected a non-negative integer, got '" + *w + "'");
    }
  }
  return r;
}

ordered_json envelope(const std::string& command, const RunConfig& config) {
  ordered_json o;
  o["schema_version"] = kSchemaVersion;
  o["command"] = command;
  o["generated_at"] = utc_timestamp();
  o["config_toml"] = serialize_config(config);
  o["config"] = ordered_json::parse(config_as_json(config));
  return o;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

struct SingleSetup {
  double eta = 0.0;
  std::uint64_t seed = 0;
  int N = 0;
  int subdivisions = 0;
};

SingleSetup single_setup(const RunConfig& c, const SingleArgs& a) {
  SingleSetup s;
  const SweepSpec& sw = c.sweep;
  s.eta = a.eta.value_or(sw.etas.empty() ? 0.0 : sw.etas.front());
  s.seed = a.seed.value_or(sw.base_seed);
  s.N = a.N.value_or(sw.Ns.front());
  s.subdivisions = a.subdivisions.value_or(sw.subdivisions.front());
  return s;
}

ordered_json vector_json(const Vec& v) {
  ordered_json out = ordered_json::array();
  for (int a = 0; a < v.size(); ++a) out.push_back(v(a));
  return out;
}

int cmd_corrector(const CommonArgs& common, const SingleArgs& args) {
  const Resolved res = resolve(common);
  const SweepSpec& sw = res.config.sweep;
  const SingleSetup s = single_setup(res.config, args);
  if (args.direction >= sw.dim) {
    throw ConfigError("--direction: index " + std::to_string(args.direction) + " out of range for dim " +
                      std::to_string(sw.dim));
  }
  const Vec p = unit_vector(sw.dim, args.direction);
  const SolverSettings settings = sw.effective_solver();
  const UnitMesh unit = build_unit_mesh(sw.dim, s.subdivisions);
  const SuperMesh super = replicate(unit, s.N);
  const Realization r(s.seed);

  CorrectorSolution sol;
  const SimplexMesh* mesh = &super.mesh;
  if (args.level == "0") {
    sol = model1::solve_corrector_0(sw.profile, unit, p, settings);
    mesh = &unit.mesh;
  } else if (sw.model == 1) {
    const Model1Coefficients coeffs = sw.model1_coefficients();
    if (args.level == "eta") {
      sol = model1::solve_corrector_eta(coeffs, r, s.eta, super, p, settings);
    } else {
      const CorrectorSolution w0 = model1::solve_corrector_0(sw.profile, unit, p, settings);
      sol = model1::solve_corrector_1(coeffs, r, super, w0, p, settings);
    }
  } else {
    const Model2Diffeomorphism diffeo = sw.model2_diffeomorphism();
    if (args.level == "eta") {
      sol = model2::solve_corrector_eta_diffeo(diffeo, sw.profile, r, s.eta, super, p, settings);
    } else {
      const CorrectorSolution w0 = model1::solve_corrector_0(sw.profile, unit, p, settings);
      sol = model2::solve_corrector_1_diffeo(diffeo, sw.profile, r, super, w0, p, sw.model2_options.sign, settings);
    }
  }

  ordered_json o = envelope("corrector", res.config);
  o["metadata"] = {{"model", sw.model},
                   {"level", to_string(sol.level)},
                   {"eta", sol.eta},
                   {"seed", s.seed},
                   {"N", args.level == "0" ? 0 : s.N},
                   {"subdivisions", s.subdivisions},
                   {"direction", vector_json(p)},
                   {"n_dofs", mesh->n_dofs},
                   {"n_cells", mesh->n_cells()},
                   {"iterations", sol.iterations},
                   {"relative_residual", sol.relative_residual},
                   {"rtol", settings.rtol},
                   {"mean", sol.field.mean}};
  // Values per vertex (periodic images repeat their DOF value).
  ordered_json values = ordered_json::array();
  for (int v = 0; v < mesh->n_vertices(); ++v) values.push_back(sol.field.values(mesh->vertex_dof[v]));
  o["values"] = values;
  ordered_json grads = ordered_json::array();
  for (const Vec& g : sol.gradients) grads.push_back(vector_json(g));
  o["gradients"] = grads;

  std::ostringstream csv;
  csv << "cell";
  for (int a = 0; a < sw.dim; ++a) csv << ",x" << a;
  for (int a = 0; a < sw.dim; ++a) csv << ",g" << a;
  csv << '\n';
  for (int c = 0; c < mesh->n_cells(); ++c) {
    csv << c;
    for (int a = 0; a < sw.dim; ++a) csv << ',' << format_double(mesh->barycenter[c](a));
    for (int a = 0; a < sw.dim; ++a) csv << ',' << format_double(sol.gradients[c](a));
    csv << '\n';
  }
  write_output(res.out_dir, "corrector.json", dump(o));
  write_output(res.out_dir, "corrector_gradients.csv", csv.str());
  if (args.dump_mesh) {
    write_output(res.out_dir, "mesh.json", dump(args.level == "0" ? mesh_json(replicate(unit, 0)) : mesh_json(super)));
  }
  std::cout << "corrector written to " << res.out_dir << " (" << sol.iterations << " iterations, residual "
            << sol.relative_residual << ")\n";
  return 0;
}

// Report with eta = 0: only the periodic and first-order matrices are defined.
HomogenizedReport first_order_only(const SweepSpec& sw, const Realization& r, std::uint64_t seed,
                                   const SuperMesh& super, const model1::PeriodicReference& ref,
                                   const SolverSettings& settings) {
  std::vector<CorrectorSolution> w1;
  Mat A1;
  if (sw.model == 1) {
    const Model1Coefficients coeffs = sw.model1_coefficients();
    for (int j = 0; j < sw.dim; ++j) {
      w1.push_back(model1::solve_corrector_1(coeffs, r, super, ref.w0[j], unit_vector(sw.dim, j), settings));
    }
    A1 = model1::homogenized_first_order(coeffs, r, super, ref.w0, w1);
  } else {
    const Model2Diffeomorphism diffeo = sw.model2_diffeomorphism();
    for (int j = 0; j < sw.dim; ++j) {
      w1.push_back(model2::solve_corrector_1_diffeo(diffeo, sw.profile, r, super, ref.w0[j],
                                                    unit_vector(sw.dim, j), sw.model2_options.sign, settings));
    }
    A1 = model2::homogenized_first_order_diffeo(diffeo, sw.profile, r, super, ref.w0, w1, ref.A_per_star);
  }
  HomogenizedReport rep;
  rep.model = sw.model;
  rep.A_eta_star = ref.A_per_star;
  rep.A_per_star = ref.A_per_star;
  rep.A1_star = A1;
  rep.residual_matrix = Mat::Zero(sw.dim, sw.dim);
  rep.N = super.N;
  rep.subdivisions = super.base.subdivisions;
  rep.seed = seed;
  return rep;
}

int cmd_homogenize(const CommonArgs& common, const SingleArgs& args) {
  const Resolved res = resolve(common);
  const SweepSpec& sw = res.config.sweep;
  const SingleSetup s = single_setup(res.config, args);
  const SolverSettings settings = sw.effective_solver();
  const UnitMesh unit = build_unit_mesh(sw.dim, s.subdivisions);
  const SuperMesh super = replicate(unit, s.N);
  const Realization r(s.seed);
  const model1::PeriodicReference ref = model1::periodic_reference(sw.profile, unit, settings);

  HomogenizedReport rep;
  if (s.eta == 0.0) {
    rep = first_order_only(sw, r, s.seed, super, ref, settings);
  } else if (sw.model == 1) {
    rep = model1::realization_reports(sw.model1_coefficients(), r, s.seed, {s.eta}, super, ref, settings).front();
  } else {
    rep = model2::realization_reports(sw.model2_diffeomorphism(), sw.profile, r, s.seed, {s.eta}, super, ref,
                                      sw.model2_options, settings)
              .front();
  }
  ordered_json o = envelope("homogenize", res.config);
  o["report"] = report_json(rep);
  write_output(res.out_dir, "homogenize.json", dump(o));
  write_output(res.out_dir, "homogenize.csv", report_csv(rep));
  if (args.dump_mesh) write_output(res.out_dir, "mesh.json", dump(mesh_json(super)));
  std::cout << "A_eta_star =";
  for (int i = 0; i < rep.A_eta_star.rows(); ++i) {
    for (int j = 0; j < rep.A_eta_star.cols(); ++j) std::cout << ' ' << format_double(rep.A_eta_star(i, j));
  }
  std::cout << "\nresidual_max = " << format_double(rep.residual_max) << '\n';
  return 0;
}

int print_verdicts(const std::vector<SuiteVerdict>& verdicts) {
  bool all = true;
  for (const SuiteVerdict& v : verdicts) {
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << '\n';
    if (v.enabled && !v.pass) all = false;
  }
  return all ? 0 : kExitSuite;
}

int cmd_sweep(const CommonArgs& common) {
  const Resolved res = resolve(common);
  const RunConfig& config = res.config;
  const std::string& dir = res.out_dir;

  // Rows stream to sweep.csv as each (N, s) block completes, so an aborted
  // run still leaves the finished blocks on disk.
  write_output(dir, "sweep.csv", sweep_csv_header());
  std::ofstream csv(std::filesystem::path(dir) / "sweep.csv", std::ios::binary | std::ios::app);
  if (!csv) throw std::runtime_error("cannot append to sweep.csv in " + dir);
  SweepOutputs out;
  if (!config.sweep.etas.empty()) {
    out.rows = run_sweep(config.sweep, res.workers, {}, [&](const EnsembleStats& row) {
      csv << sweep_csv_rows(row);
      csv.flush();
    });
  }
  csv.close();
  if (config.studies.first_order_limit.enabled) {
    out.lemma21 = lemma21_study(config.sweep, res.workers);
    write_output(dir, "first_order_limit.csv", first_order_limit_csv(out.lemma21));
  }
  if (config.studies.h_refinement.enabled) {
    out.richardson = h_refinement_study(config.sweep, out.rows);
    write_output(dir, "richardson.csv", richardson_csv(out.richardson));
  }
  if (config.studies.derivative.enabled) {
    out.derivative = derivative_study(config.sweep, config.studies.derivative.eta, res.workers);
    write_output(dir, "derivative.csv", derivative_csv(out.derivative));
  }
  const std::vector<SuiteVerdict> verdicts = sweep_verdicts(config, out);
  write_output(dir, "summary.json", dump(summary_json("sweep", config, verdicts)));
  return print_verdicts(verdicts);
}

int cmd_validate(const CommonArgs& common) {
  const Resolved res = resolve(common);
  const std::vector<SuiteVerdict> verdicts = validate_verdicts(res.config);
  write_output(res.out_dir, "validate.json", dump(summary_json("validate", res.config, verdicts)));
  return print_verdicts(verdicts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly stochastic homogenization: correctors, homogenized matrices, sweeps and validation"};
  app.require_subcommand(1);
  CommonArgs common;
  SingleArgs single;

  CLI::App* corrector = app.add_subcommand("corrector", "solve one corrector and dump values and gradients");
  add_common(corrector, common);
  add_single(corrector, single, true);
  CLI::App* homogenize = app.add_subcommand("homogenize", "homogenized matrices and residuals for one realization");
  add_common(homogenize, common);
  add_single(homogenize, single, false);
  CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo sweep plus the studies enabled in the config");
  add_common(sweep, common);
  CLI::App* validate = app.add_subcommand("validate", "field-level validation suites");
  add_common(validate, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*corrector) return cmd_corrector(common, single);
    if (*homogenize) return cmd_homogenize(common, single);
    if (*sweep) return cmd_sweep(common);
    if (*validate) return cmd_validate(common);
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const CoercivityError& e) {
    std::cerr << "coercivity error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitIo;
}
