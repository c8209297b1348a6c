#include "perthom/output.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace perthom {

using nlohmann::ordered_json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string csv_line(int model, double eta, int N, int s, const std::string& quantity, int i, int j, double mean,
                     double max_abs, double std_error, int n_seeds, int n_failures) {
  std::ostringstream o;
  o << model << ',' << format_double(eta) << ',' << N << ',' << s << ',' << quantity << ',' << i << ',' << j << ','
    << format_double(mean) << ',' << format_double(max_abs) << ',' << format_double(std_error) << ',' << n_seeds
    << ',' << n_failures << '\n';
  return o.str();
}

}  // namespace

std::string sweep_csv_header() {
  return "model,eta,N,subdivisions,quantity,i,j,mean,max_abs,stderr,n_seeds,n_failures\n";
}

std::string sweep_csv_rows(const EnsembleStats& row) {
  std::string out;
  const int nf = static_cast<int>(row.failures.size());
  for (const MatrixStat& m : row.matrices) {
    for (int i = 0; i < m.mean.rows(); ++i) {
      for (int j = 0; j < m.mean.cols(); ++j) {
        out += csv_line(row.model, row.eta, row.N, row.subdivisions, m.quantity, i, j, m.mean(i, j),
                        m.max_abs(i, j), m.std_error(i, j), row.n_seeds, nf);
      }
    }
  }
  for (const ScalarStat& s : row.scalars) {
    out += csv_line(row.model, row.eta, row.N, row.subdivisions, s.quantity, -1, -1, s.mean, s.max_abs,
                    s.std_error, row.n_seeds, nf);
  }
  return out;
}

std::string sweep_csv(const std::vector<EnsembleStats>& rows) {
  std::string out = sweep_csv_header();
  for (const EnsembleStats& row : rows) out += sweep_csv_rows(row);
  return out;
}

std::string report_csv(const HomogenizedReport& r) {
  std::string out = sweep_csv_header();
  const std::pair<const char*, const Mat*> mats[] = {{"A_eta_star", &r.A_eta_star},
                                                     {"A_per_star", &r.A_per_star},
                                                     {"A1_star", &r.A1_star},
                                                     {"residual_matrix", &r.residual_matrix}};
  for (const auto& [name, m] : mats) {
    for (int i = 0; i < m->rows(); ++i) {
      for (int j = 0; j < m->cols(); ++j) {
        const double v = (*m)(i, j);
        out += csv_line(r.model, r.eta, r.N, r.subdivisions, name, i, j, v, std::abs(v), 0.0, 1, 0);
      }
    }
  }
  const std::pair<const char*, double> scalars[] = {{"residual_max", r.residual_max},
                                                    {"residual_frobenius", r.residual_frobenius},
                                                    {"z_norm", r.z_norm},
                                                    {"v_norm", r.v_norm}};
  for (const auto& [name, v] : scalars) {
    out += csv_line(r.model, r.eta, r.N, r.subdivisions, name, -1, -1, v, std::abs(v), 0.0, 1, 0);
  }
  return out;
}

std::string first_order_limit_csv(const std::vector<Lemma21Row>& rows) {
  std::ostringstream o;
  o << "N,subdivisions,quantity,i,j,mean,max_abs,stderr,n_seeds,n_failures\n";
  for (const Lemma21Row& r : rows) {
    const std::size_t nf = r.failures.size();
    const int dim = static_cast<int>(r.limit.rows());
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        o << r.N << ',' << r.subdivisions << ",limit," << i << ',' << j << ',' << format_double(r.limit(i, j)) << ','
          << format_double(std::abs(r.limit(i, j))) << ",0," << r.n_seeds << ',' << nf << '\n';
      }
    }
    for (int i = 0; i < r.A1_star.mean.rows(); ++i) {
      for (int j = 0; j < r.A1_star.mean.cols(); ++j) {
        o << r.N << ',' << r.subdivisions << ",A1_star," << i << ',' << j << ',' << format_double(r.A1_star.mean(i, j))
          << ',' << format_double(r.A1_star.max_abs(i, j)) << ',' << format_double(r.A1_star.std_error(i, j)) << ','
          << r.n_seeds << ',' << nf << '\n';
      }
    }
    o << r.N << ',' << r.subdivisions << ",deviation,-1,-1," << format_double(r.deviation.mean) << ','
      << format_double(r.deviation.max_abs) << ',' << format_double(r.deviation.std_error) << ',' << r.n_seeds << ','
      << nf << '\n';
  }
  return o.str();
}

std::string richardson_csv(const std::vector<RichardsonEntry>& entries) {
  std::ostringstream o;
  o << "quantity,i,j,eta,N,subdivisions,values,order,extrapolated\n";
  for (const RichardsonEntry& e : entries) {
    std::string subs;
    std::string vals;
    for (std::size_t k = 0; k < e.values.size(); ++k) {
      subs += (k ? ";" : "") + std::to_string(e.subdivisions[k]);
      vals += (k ? ";" : "") + format_double(e.values[k]);
    }
    o << e.quantity << ',' << e.i << ',' << e.j << ',' << format_double(e.eta) << ',' << e.N << ',' << subs << ','
      << vals << ',' << e.order_label() << ',' << format_double(e.extrapolated) << '\n';
  }
  return o.str();
}

std::string derivative_csv(const std::vector<DerivativeRow>& rows) {
  std::ostringstream o;
  o << "N,subdivisions,seed,eta,relative_error,failure\n";
  for (const DerivativeRow& r : rows) {
    o << r.N << ',' << r.subdivisions << ',' << r.seed << ',' << format_double(r.eta) << ','
      << format_double(r.relative_error) << ',' << (r.failure.empty() ? "" : "\"" + r.failure + "\"") << '\n';
  }
  return o.str();
}

ordered_json matrix_json(const Mat& m) {
  ordered_json out = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

ordered_json report_json(const HomogenizedReport& r) {
  ordered_json o;
  o["model"] = r.model;
  o["eta"] = r.eta;
  o["N"] = r.N;
  o["subdivisions"] = r.subdivisions;
  o["seed"] = r.seed;
  o["A_eta_star"] = matrix_json(r.A_eta_star);
  o["A_per_star"] = matrix_json(r.A_per_star);
  o["A1_star"] = matrix_json(r.A1_star);
  o["residual_matrix"] = matrix_json(r.residual_matrix);
  o["residual_max"] = r.residual_max;
  o["residual_frobenius"] = r.residual_frobenius;
  o["z_norm"] = r.z_norm;
  o["v_norm"] = r.v_norm;
  return o;
}

ordered_json mesh_json(const SuperMesh& super) {
  const SimplexMesh& m = super.mesh;
  ordered_json o;
  o["dim"] = m.dim;
  o["N"] = super.N;
  o["subdivisions"] = super.base.subdivisions;
  o["h"] = m.h;
  ordered_json verts = ordered_json::array();
  for (const Vec& v : m.vertices) {
    ordered_json p = ordered_json::array();
    for (int a = 0; a < v.size(); ++a) p.push_back(v(a));
    verts.push_back(p);
  }
  o["vertices"] = verts;
  ordered_json cells = ordered_json::array();
  for (int c = 0; c < m.n_cells(); ++c) {
    ordered_json cell = ordered_json::array();
    for (int a = 0; a < m.nodes_per_cell(); ++a) cell.push_back(m.cells[c][a]);
    cells.push_back(cell);
  }
  o["cells"] = cells;
  o["dof_map"] = m.vertex_dof;
  ordered_json lattice = ordered_json::array();
  for (const LatticeCell& lc : super.cell_index) {
    lattice.push_back({{"k", ordered_json::array({lc.k[0], lc.k[1]})}, {"base_cell", lc.base_cell}});
  }
  o["cell_index"] = lattice;
  return o;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json summary_json(const std::string& command, const RunConfig& config,
                          const std::vector<SuiteVerdict>& suites) {
  ordered_json o;
  o["schema_version"] = kSchemaVersion;
  o["command"] = command;
  o["generated_at"] = utc_timestamp();
  o["config_toml"] = serialize_config(config);
  o["config"] = ordered_json::parse(config_as_json(config));
  ordered_json s = ordered_json::array();
  bool all = true;
  for (const SuiteVerdict& v : suites) {
    s.push_back({{"name", v.name}, {"enabled", v.enabled}, {"pass", v.pass}, {"details", v.details}});
    if (v.enabled && !v.pass) all = false;
  }
  o["suites"] = s;
  o["all_pass"] = all;
  return o;
}

std::string write_output(const std::string& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
  return path.string();
}

}  // namespace perthom
