#include "perthom/config.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace perthom;

namespace {

const char* kFull = R"(
model = 2
dim = 2

[profile]
kind = "laminate"
values = [1.0, 4.0]

[model2]
amplitude = 0.1
theta_amplitude = 0.03
eta_max = 0.15
normalization = "as-printed"
first_order_sign = "as-stated"

[grid]
eta = [0.15, 0.1, 0.07, 0.025]
N = [0, 2]
subdivisions = [4, 8, 16]

[seeds]
base = 12345678901
count = 7

[solver]
rtol = 3e-11
max_iter_factor = 20

[studies.band]
factor = 3.5
reference_eta = 0.1

[studies.h_refinement]
enabled = true
reference = [1.6, 2.5]

[studies.derivative]
enabled = true
eta = 0.05

[validate]
eta = [0.1]
inject_nonstationary = true

[output]
dir = "somewhere/else"
)";

std::string expect_config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return {};
}

}  // namespace

TEST(Config, DefaultsForAMinimalFile) {
  const RunConfig c = parse_config("model = 1\n");
  EXPECT_EQ(c.sweep.model, 1);
  EXPECT_EQ(c.sweep.dim, 2);
  EXPECT_TRUE(c.sweep.etas.empty());
  EXPECT_EQ(c.sweep.Ns, std::vector<int>{1});
  EXPECT_EQ(c.sweep.seed_count, 1);
  EXPECT_TRUE(c.studies.band.enabled);
  EXPECT_EQ(c.output_dir, "out");
}

TEST(Config, ParsesEveryField) {
  const RunConfig c = parse_config(kFull);
  EXPECT_EQ(c.sweep.model, 2);
  EXPECT_EQ(c.sweep.profile.kind(), ProfileKind::laminate);
  EXPECT_DOUBLE_EQ(c.sweep.model2.theta_amplitude, 0.03);
  EXPECT_EQ(c.sweep.model2_options.normalization, model2::Normalization::as_printed);
  EXPECT_EQ(c.sweep.model2_options.sign, model2::FirstOrderSign::as_stated);
  EXPECT_EQ(c.sweep.base_seed, 12345678901u);
  EXPECT_EQ(c.sweep.subdivisions, (std::vector<int>{4, 8, 16}));
  EXPECT_DOUBLE_EQ(c.sweep.solver.rtol, 3e-11);
  EXPECT_DOUBLE_EQ(c.studies.band.factor, 3.5);
  EXPECT_TRUE(c.studies.h_refinement.enabled);
  EXPECT_TRUE(c.validate.inject_nonstationary);
  EXPECT_EQ(c.output_dir, "somewhere/else");
}

TEST(Config, RoundTripIsLossless) {
  const RunConfig c = parse_config(kFull);
  const std::string once = serialize_config(c);
  const RunConfig back = parse_config(once);
  EXPECT_EQ(serialize_config(back), once);
  EXPECT_EQ(back.sweep.etas, c.sweep.etas);
  EXPECT_EQ(back.sweep.base_seed, c.sweep.base_seed);
  EXPECT_EQ(back.sweep.model2.amplitude, c.sweep.model2.amplitude);
  EXPECT_EQ(back.studies.h_refinement.reference, c.studies.h_refinement.reference);
  EXPECT_EQ(config_as_json(back), config_as_json(c));
}

TEST(Config, DoublesRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678901234567, 0.0, -2.5, 5e-324}) {
    EXPECT_EQ(std::strtod(format_roundtrip(v).c_str(), nullptr), v) << format_roundtrip(v);
  }
  // Integral values keep a decimal point so TOML reads them back as floats.
  EXPECT_NE(format_roundtrip(2.0).find_first_of(".e"), std::string::npos);
}

TEST(Config, ShippedConfigsParseAndRoundTrip) {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(PERTHOM_CONFIGS)) {
    if (entry.path().extension() != ".toml") continue;
    const RunConfig c = load_config(entry.path().string());
    EXPECT_EQ(serialize_config(parse_config(serialize_config(c))), serialize_config(c)) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 5);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(expect_config_error("model = 3\n").find("model"), std::string::npos);
  EXPECT_NE(expect_config_error("model = 1\n[grid]\nN = []\n").find("grid.N"), std::string::npos);
  EXPECT_NE(expect_config_error("model = 1\n[grid]\nN = [1.5]\n").find("grid.N"), std::string::npos);
  EXPECT_NE(expect_config_error("model = 1\n[seeds]\ncount = 0\n").find("seeds.count"), std::string::npos);
  EXPECT_NE(expect_config_error("model = 1\n[grid]\nfoo = 1\n").find("grid.foo"), std::string::npos);
  EXPECT_NE(expect_config_error("model = 1\nbar = 1\n").find("bar"), std::string::npos);
  EXPECT_NE(expect_config_error("model = 2\n[model2]\nnormalization = \"raw\"\n").find("model2.normalization"),
            std::string::npos);
  EXPECT_NE(expect_config_error("model = 1\n[profile]\nkind = \"stripes\"\nvalues = [1.0, 2.0]\n").find("profile"),
            std::string::npos);
  EXPECT_NE(expect_config_error("model = 1\n[grid]\nsubdivisions = [4, 8]\n[studies.h_refinement]\nenabled = true\n")
                .find("grid.subdivisions"),
            std::string::npos);
  EXPECT_NE(expect_config_error("model = 1\n[grid\n").find("config"), std::string::npos);
}

TEST(Config, EtaOutsideFamilyValidity) {
  const std::string msg =
      expect_config_error("model = 1\n[model1]\nperturb_amplitude = 0.5\neta_max = 0.2\n[grid]\neta = [0.3]\n");
  EXPECT_NE(msg.find("eta exceeds family validity"), std::string::npos);
  const std::string der = expect_config_error(
      "model = 2\n[model2]\namplitude = 0.1\neta_max = 0.2\n[studies.derivative]\nenabled = true\neta = 0.4\n");
  EXPECT_NE(der.find("studies.derivative.eta"), std::string::npos);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/run.toml"), ConfigError); }
