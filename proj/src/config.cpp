#include "perthom/config.hpp"

#include <toml.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace perthom {

namespace {

// Typed access to one TOML table with unknown-key detection.
class Section {
 public:
  Section(const toml::table* table, std::string path) : table_(table), path_(std::move(path)) {}

  bool present() const { return table_ != nullptr; }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const toml::node* node(const std::string& key) {
    known_.insert(key);
    return table_ ? table_->get(key) : nullptr;
  }

  Section sub(const std::string& key) {
    const toml::node* n = node(key);
    if (n && !n->is_table()) throw ConfigError(key_path(key) + ": expected a table");
    return Section(n ? n->as_table() : nullptr, key_path(key));
  }

  double number(const std::string& key, double fallback) {
    const toml::node* n = node(key);
    if (!n) return fallback;
    if (auto v = n->value<double>()) return *v;
    throw ConfigError(key_path(key) + ": expected a number");
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const toml::node* n = node(key);
    if (!n) return fallback;
    if (!n->is_integer()) throw ConfigError(key_path(key) + ": expected an integer");
    return *n->value<std::int64_t>();
  }

  int small_integer(const std::string& key, int fallback) {
    const std::int64_t v = integer(key, fallback);
    if (v < -(1LL << 30) || v > (1LL << 30)) throw ConfigError(key_path(key) + ": integer out of range");
    return static_cast<int>(v);
  }

  bool boolean(const std::string& key, bool fallback) {
    const toml::node* n = node(key);
    if (!n) return fallback;
    if (!n->is_boolean()) throw ConfigError(key_path(key) + ": expected true or false");
    return *n->value<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const toml::node* n = node(key);
    if (!n) return fallback;
    if (!n->is_string()) throw ConfigError(key_path(key) + ": expected a string");
    return *n->value<std::string>();
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) {
    const toml::node* n = node(key);
    if (!n) return fallback;
    const toml::array* arr = n->as_array();
    if (!arr) throw ConfigError(key_path(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const toml::node& e : *arr) {
      auto v = e.value<double>();
      if (!v) throw ConfigError(key_path(key) + ": expected an array of numbers");
      out.push_back(*v);
    }
    return out;
  }

  std::vector<int> integers(const std::string& key, const std::vector<int>& fallback) {
    const toml::node* n = node(key);
    if (!n) return fallback;
    const toml::array* arr = n->as_array();
    if (!arr) throw ConfigError(key_path(key) + ": expected an array of integers");
    std::vector<int> out;
    for (const toml::node& e : *arr) {
      if (!e.is_integer()) throw ConfigError(key_path(key) + ": expected an array of integers");
      const std::int64_t v = *e.value<std::int64_t>();
      if (v < -(1LL << 30) || v > (1LL << 30)) throw ConfigError(key_path(key) + ": integer out of range");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  void reject_unknown() const {
    if (!table_) return;
    for (auto&& [k, v] : *table_) {
      const std::string key(k.str());
      if (!known_.count(key)) throw ConfigError(key_path(key) + ": unknown key");
    }
  }

 private:
  const toml::table* table_;
  std::string path_;
  std::set<std::string> known_;
};

template <class F>
auto field(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string toml_string(const std::string& s) {
  std::ostringstream out;
  out << toml::value<std::string>(s);
  return out.str();
}

std::string toml_numbers(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_roundtrip(v[i]);
  return out + "]";
}

std::string toml_integers(const std::vector<int>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
  return out + "]";
}

const char* toml_bool(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string format_roundtrip(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

RunConfig parse_config(const std::string& toml_text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ": TOML parse error at line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  RunConfig cfg;
  SweepSpec& sw = cfg.sweep;
  Section top(&root, "");
  sw.model = top.small_integer("model", 1);
  sw.dim = top.small_integer("dim", 2);
  if (sw.model != 1 && sw.model != 2) throw ConfigError("model: must be 1 or 2");
  if (sw.dim != 1 && sw.dim != 2) throw ConfigError("dim: must be 1 or 2");

  Section profile = top.sub("profile");
  {
    const std::string kind = profile.string("kind", "constant");
    const std::vector<double> values = profile.numbers("values", std::vector<double>(sw.dim, 1.0));
    sw.profile = field("profile", [&] { return PeriodicProfile(profile_kind_from_string(kind), sw.dim, values); });
  }
  profile.reject_unknown();

  Section m1 = top.sub("model1");
  sw.model1.perturb_amplitude = m1.number("perturb_amplitude", 0.0);
  sw.model1.perturb_mean = m1.number("perturb_mean", 0.0);
  sw.model1.remainder = field("model1.remainder", [&] { return remainder_from_string(m1.string("remainder", "none")); });
  sw.model1.remainder_amplitude = m1.number("remainder_amplitude", -1.0);
  sw.model1.eta_max = m1.number("eta_max", 1.0);
  m1.reject_unknown();

  Section m2 = top.sub("model2");
  sw.model2.amplitude = m2.number("amplitude", 0.0);
  sw.model2.theta_amplitude = m2.number("theta_amplitude", 0.0);
  sw.model2.eta_max = m2.number("eta_max", 0.2);
  sw.model2_options.normalization = field("model2.normalization", [&] {
    return model2::normalization_from_string(m2.string("normalization", "volume-normalized"));
  });
  sw.model2_options.sign = field("model2.first_order_sign", [&] {
    return model2::first_order_sign_from_string(m2.string("first_order_sign", "derived"));
  });
  m2.reject_unknown();

  Section grid = top.sub("grid");
  sw.etas = grid.numbers("eta", {});
  sw.Ns = grid.integers("N", {1});
  sw.subdivisions = grid.integers("subdivisions", {4});
  grid.reject_unknown();

  Section seeds = top.sub("seeds");
  const std::int64_t base = seeds.integer("base", 0);
  if (base < 0) throw ConfigError("seeds.base: must be >= 0");
  sw.base_seed = static_cast<std::uint64_t>(base);
  sw.seed_count = seeds.small_integer("count", 1);
  seeds.reject_unknown();

  Section solver = top.sub("solver");
  sw.solver.rtol = solver.number("rtol", 1e-10);
  sw.solver.max_iter_factor = solver.small_integer("max_iter_factor", 50);
  solver.reject_unknown();

  Section studies = top.sub("studies");
  {
    Section band = studies.sub("band");
    BandStudy& b = cfg.studies.band;
    b.enabled = band.boolean("enabled", b.enabled);
    b.factor = band.number("factor", b.factor);
    b.noise_floor = band.number("noise_floor", b.noise_floor);
    b.reference_eta = band.number("reference_eta", b.reference_eta);
    b.reference_N = band.small_integer("reference_N", b.reference_N);
    b.reference_subdivisions = band.small_integer("reference_subdivisions", b.reference_subdivisions);
    band.reject_unknown();

    Section fol = studies.sub("first_order_limit");
    cfg.studies.first_order_limit.enabled = fol.boolean("enabled", false);
    cfg.studies.first_order_limit.max_ratio = fol.number("max_ratio", 0.5);
    fol.reject_unknown();

    Section hr = studies.sub("h_refinement");
    HRefinementStudy& h = cfg.studies.h_refinement;
    h.enabled = hr.boolean("enabled", false);
    h.reference = hr.numbers("reference", {});
    h.tolerance = hr.number("tolerance", h.tolerance);
    h.min_order = hr.number("min_order", h.min_order);
    hr.reject_unknown();

    Section der = studies.sub("derivative");
    DerivativeStudy& d = cfg.studies.derivative;
    d.enabled = der.boolean("enabled", false);
    d.eta = der.number("eta", d.eta);
    d.relative_factor = der.number("relative_factor", d.relative_factor);
    der.reject_unknown();
  }
  studies.reject_unknown();

  Section val = top.sub("validate");
  ValidateSettings& v = cfg.validate;
  v.etas = val.numbers("eta", v.etas);
  v.samples = val.small_integer("samples", v.samples);
  v.stationarity_pairs = val.small_integer("stationarity_pairs", v.stationarity_pairs);
  v.inject_nonstationary = val.boolean("inject_nonstationary", v.inject_nonstationary);
  v.ergodic_N = val.integers("ergodic_N", v.ergodic_N);
  v.ergodic_seeds = val.small_integer("ergodic_seeds", v.ergodic_seeds);
  v.band_factor = val.number("band_factor", v.band_factor);
  val.reject_unknown();

  Section out = top.sub("output");
  cfg.output_dir = out.string("dir", cfg.output_dir);
  out.reject_unknown();
  top.reject_unknown();

  // Semantic checks; messages already name the field.
  try {
    sw.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (v.samples < 1) throw ConfigError("validate.samples: must be >= 1");
  if (v.ergodic_seeds < 1) throw ConfigError("validate.ergodic_seeds: must be >= 1");
  if (cfg.studies.h_refinement.enabled && sw.subdivisions.size() < 3) {
    throw ConfigError("grid.subdivisions: h-refinement needs at least three levels");
  }
  if (cfg.studies.derivative.enabled && !(cfg.studies.derivative.eta > 0.0)) {
    throw ConfigError("studies.derivative.eta: must be > 0");
  }
  if (cfg.studies.derivative.enabled) {
    try {
      if (sw.model == 1) {
        sw.model1_coefficients().check_eta(cfg.studies.derivative.eta);
      } else {
        sw.model2_diffeomorphism().check_eta(cfg.studies.derivative.eta);
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("studies.derivative.eta: ") + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

std::string serialize_config(const RunConfig& c) {
  const SweepSpec& sw = c.sweep;
  std::ostringstream o;
  o << "model = " << sw.model << "\n";
  o << "dim = " << sw.dim << "\n\n";
  o << "[profile]\n";
  o << "kind = " << toml_string(to_string(sw.profile.kind())) << "\n";
  o << "values = " << toml_numbers(sw.profile.values()) << "\n\n";
  o << "[model1]\n";
  o << "perturb_amplitude = " << format_roundtrip(sw.model1.perturb_amplitude) << "\n";
  o << "perturb_mean = " << format_roundtrip(sw.model1.perturb_mean) << "\n";
  o << "remainder = " << toml_string(to_string(sw.model1.remainder)) << "\n";
  o << "remainder_amplitude = " << format_roundtrip(sw.model1.remainder_amplitude) << "\n";
  o << "eta_max = " << format_roundtrip(sw.model1.eta_max) << "\n\n";
  o << "[model2]\n";
  o << "amplitude = " << format_roundtrip(sw.model2.amplitude) << "\n";
  o << "theta_amplitude = " << format_roundtrip(sw.model2.theta_amplitude) << "\n";
  o << "eta_max = " << format_roundtrip(sw.model2.eta_max) << "\n";
  o << "normalization = " << toml_string(model2::to_string(sw.model2_options.normalization)) << "\n";
  o << "first_order_sign = " << toml_string(model2::to_string(sw.model2_options.sign)) << "\n\n";
  o << "[grid]\n";
  o << "eta = " << toml_numbers(sw.etas) << "\n";
  o << "N = " << toml_integers(sw.Ns) << "\n";
  o << "subdivisions = " << toml_integers(sw.subdivisions) << "\n\n";
  o << "[seeds]\n";
  o << "base = " << sw.base_seed << "\n";
  o << "count = " << sw.seed_count << "\n\n";
  o << "[solver]\n";
  o << "rtol = " << format_roundtrip(sw.solver.rtol) << "\n";
  o << "max_iter_factor = " << sw.solver.max_iter_factor << "\n\n";
  const BandStudy& b = c.studies.band;
  o << "[studies.band]\n";
  o << "enabled = " << toml_bool(b.enabled) << "\n";
  o << "factor = " << format_roundtrip(b.factor) << "\n";
  o << "noise_floor = " << format_roundtrip(b.noise_floor) << "\n";
  o << "reference_eta = " << format_roundtrip(b.reference_eta) << "\n";
  o << "reference_N = " << b.reference_N << "\n";
  o << "reference_subdivisions = " << b.reference_subdivisions << "\n\n";
  o << "[studies.first_order_limit]\n";
  o << "enabled = " << toml_bool(c.studies.first_order_limit.enabled) << "\n";
  o << "max_ratio = " << format_roundtrip(c.studies.first_order_limit.max_ratio) << "\n\n";
  const HRefinementStudy& h = c.studies.h_refinement;
  o << "[studies.h_refinement]\n";
  o << "enabled = " << toml_bool(h.enabled) << "\n";
  o << "reference = " << toml_numbers(h.reference) << "\n";
  o << "tolerance = " << format_roundtrip(h.tolerance) << "\n";
  o << "min_order = " << format_roundtrip(h.min_order) << "\n\n";
  const DerivativeStudy& d = c.studies.derivative;
  o << "[studies.derivative]\n";
  o << "enabled = " << toml_bool(d.enabled) << "\n";
  o << "eta = " << format_roundtrip(d.eta) << "\n";
  o << "relative_factor = " << format_roundtrip(d.relative_factor) << "\n\n";
  const ValidateSettings& v = c.validate;
  o << "[validate]\n";
  o << "eta = " << toml_numbers(v.etas) << "\n";
  o << "samples = " << v.samples << "\n";
  o << "stationarity_pairs = " << v.stationarity_pairs << "\n";
  o << "inject_nonstationary = " << toml_bool(v.inject_nonstationary) << "\n";
  o << "ergodic_N = " << toml_integers(v.ergodic_N) << "\n";
  o << "ergodic_seeds = " << v.ergodic_seeds << "\n";
  o << "band_factor = " << format_roundtrip(v.band_factor) << "\n\n";
  o << "[output]\n";
  o << "dir = " << toml_string(c.output_dir) << "\n";
  return o.str();
}

std::string config_as_json(const RunConfig& config) {
  const toml::table t = toml::parse(serialize_config(config));
  std::ostringstream out;
  out << toml::json_formatter{t};
  return out.str();
}

}  // namespace perthom
