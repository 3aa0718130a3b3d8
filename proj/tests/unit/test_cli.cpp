#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli_commands.hpp"
#include "iqcrad/dynamic_iqc.hpp"
#include "iqcrad/problem_io.hpp"
#include "iqcrad/radius.hpp"
#include "instances.hpp"

using namespace iqcrad;
using namespace iqcrad::cli;
using namespace iqcrad::testing;

namespace {

std::string temp_path(const std::string& name) { return ::testing::TempDir() + "iqcrad_" + name; }

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_json(const std::string& path, const io::json& j) {
  std::ofstream(path, std::ios::binary) << j.dump(2);
}

struct CommandRun {
  int code;
  std::string out, err;
};

CommandRun radius(const std::string& problem, const std::optional<std::string>& out_path,
           RadiusFlags flags = {}) {
  std::ostringstream out, err;
  flags.out = out_path;
  const int code = cmd_radius(problem, flags, out, err);
  return {code, out.str(), err.str()};
}

CommandRun worst(const std::string& problem, const std::optional<std::string>& out_path,
          std::optional<int> horizon = 2000) {
  std::ostringstream out, err;
  const int code = cmd_worst_case(problem, WorstCaseFlags{horizon, out_path}, out, err);
  return {code, out.str(), err.str()};
}

CommandRun verify(const std::string& report, const std::string& problem) {
  std::ostringstream out, err;
  const int code = cmd_verify(report, problem, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(CliRadius, JordanBlockNotAttained) {
  const std::string out = temp_path("jordan_radius.json");
  const CommandRun r = radius(data_path("jordan.json"), out);
  EXPECT_EQ(r.code, ok);
  const io::json rep = io::load_json(out);
  EXPECT_NEAR(rep["certificate"]["rho"].get<double>(), 1.0, 1e-5);
  EXPECT_FALSE(rep["certificate"]["attained"].get<bool>());
}

TEST(CliRadius, ScalarExampleReportsZeroRadius) {
  const std::string out = temp_path("pm_radius.json");
  EXPECT_EQ(radius(data_path("scalar_pm1.json"), out).code, ok);
  EXPECT_LE(io::load_json(out)["certificate"]["rho"].get<double>(), 1e-5);
}

TEST(CliRadius, RaggedRowsAreInputErrors) {
  const CommandRun r = radius(data_path("ragged.json"), std::nullopt);
  EXPECT_EQ(r.code, input_error);
  EXPECT_NE(r.err.find("row 1"), std::string::npos);
  EXPECT_EQ(radius(data_path("missing.json"), std::nullopt).code, input_error);
  const CommandRun s = radius(data_path("syntax_error.json"), std::nullopt);
  EXPECT_EQ(s.code, input_error);
  EXPECT_NE(s.err.find("line 4"), std::string::npos);
}

TEST(CliRadius, NoCertificateBelowRhoMax) {
  RadiusFlags flags;
  flags.rho_max = 0.5;
  const std::string out = temp_path("nocert.json");
  const CommandRun r = radius(data_path("jordan.json"), out, flags);
  EXPECT_EQ(r.code, no_certificate);
  const io::json rep = io::load_json(out);
  EXPECT_TRUE(rep["certificate"]["rho"].is_null());
  EXPECT_EQ(rep["status"], "no-certificate");
}

TEST(CliRadius, FlagsOverrideEnvironment) {
  ::setenv("IQCRAD_RHO_MAX", "0.5", 1);
  EXPECT_EQ(radius(data_path("jordan.json"), std::nullopt).code, no_certificate);
  RadiusFlags flags;
  flags.rho_max = 4.0;
  EXPECT_EQ(radius(data_path("jordan.json"), std::nullopt, flags).code, ok);
  ::setenv("IQCRAD_RHO_MAX", "abc", 1);
  EXPECT_EQ(radius(data_path("jordan.json"), std::nullopt).code, input_error);
  ::unsetenv("IQCRAD_RHO_MAX");
}

TEST(CliWorstCase, RotationWitness) {
  const std::string out = temp_path("rot_wc.json");
  const CommandRun r = worst(data_path("rotation.json"), out);
  EXPECT_EQ(r.code, ok) << r.out << r.err;
  const io::json rep = io::load_json(out);
  EXPECT_EQ(rep["status"], "witness");
  EXPECT_EQ(rep["witness"]["d"], 2);
}

TEST(CliWorstCase, NoWitnessNamesStage) {
  const std::string out = temp_path("stable_wc.json");
  const CommandRun r = worst(data_path("stable.json"), out);
  EXPECT_EQ(r.code, no_witness);
  EXPECT_NE(r.out.find("radius-precheck"), std::string::npos);
  EXPECT_EQ(io::load_json(out)["stage"], "radius-precheck");
}

TEST(CliVerify, FreshReportsPass) {
  const std::string rr = temp_path("v_radius.json");
  ASSERT_EQ(radius(data_path("stable.json"), rr).code, ok);
  EXPECT_EQ(verify(rr, data_path("stable.json")).code, ok);
  const std::string wr = temp_path("v_wc.json");
  ASSERT_EQ(worst(data_path("identity_indefinite.json"), wr).code, ok);
  const CommandRun v = verify(wr, data_path("identity_indefinite.json"));
  EXPECT_EQ(v.code, ok) << v.out;
}

TEST(CliVerify, CorruptedCertificateFails) {
  const std::string rr = temp_path("c_radius.json");
  ASSERT_EQ(radius(data_path("stable.json"), rr).code, ok);
  io::json rep = io::load_json(rr);
  rep["certificate"]["P"]["data"][0] = rep["certificate"]["P"]["data"][0].get<double>() * 100.0;
  write_json(rr, rep);
  const CommandRun v = verify(rr, data_path("stable.json"));
  EXPECT_EQ(v.code, verification_failed);
  EXPECT_NE(v.out.find("FAIL  lmi_margin reproduces"), std::string::npos);
}

TEST(CliVerify, CorruptedDirectionFailsTechnicalCondition) {
  const std::string wr = temp_path("c_wc.json");
  ASSERT_EQ(worst(data_path("identity_indefinite.json"), wr).code, ok);
  io::json rep = io::load_json(wr);
  const Matrix X = io::matrix_from_json(rep["witness"]["X"], "/X");
  // Point X v along the second state, where the IQC form is negative.
  const Vector v = X.colPivHouseholderQr().solve(Vector::Unit(2, 1));
  rep["witness"]["v"] = {v(0), v(1)};
  write_json(wr, rep);
  const CommandRun r = verify(wr, data_path("identity_indefinite.json"));
  EXPECT_EQ(r.code, verification_failed);
  EXPECT_NE(r.out.find("FAIL  technical-condition "), std::string::npos);
}

TEST(CliVerify, MismatchedDimensionsAreInputErrors) {
  const std::string rr = temp_path("m_radius.json");
  ASSERT_EQ(radius(data_path("stable.json"), rr).code, ok);
  EXPECT_EQ(verify(rr, data_path("scalar_pm1.json")).code, input_error);
}

TEST(CliAugment, RoundTripMatchesInProcess) {
  const std::string out = temp_path("aug.json");
  std::ostringstream o, e;
  ASSERT_EQ(cmd_augment(data_path("delay_filter.json"), out, o, e), ok);
  const io::Problem file = io::load_problem(out);
  const io::Problem src = io::load_problem(data_path("delay_filter.json"));
  const Augmented a = augment(*src.plant, src.filters);
  EXPECT_EQ(file.sys->A(), a.sys.A());
  EXPECT_EQ(file.iqcs[0], a.iqcs[0]);
  const CommandRun r = radius(out, std::nullopt);
  EXPECT_EQ(r.code, ok);
  EXPECT_NEAR(spectral_radius(a.sys, a.iqcs).rho, (0.5 + std::sqrt(4.25)) / 2, 1e-5);
}

TEST(CliAugment, MissingBlocksAreInputErrors) {
  std::ostringstream o, e;
  EXPECT_EQ(cmd_augment(data_path("jordan.json"), std::nullopt, o, e), input_error);
}

TEST(CliAugment, IdentityFilterReproducesSystem) {
  std::ostringstream o, e;
  ASSERT_EQ(cmd_augment(data_path("identity_filter.json"), std::nullopt, o, e), ok);
  const io::Problem p = io::parse_problem(o.str());
  EXPECT_EQ(p.sys->n(), 1);
  EXPECT_DOUBLE_EQ(p.sys->A()(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(p.iqcs[0](1, 1), -1.0);
}

TEST(CliDeterminism, ReportsAreByteIdentical) {
  for (int i = 0; i < 2; ++i) {
    radius(data_path("jordan.json"), temp_path("det_r" + std::to_string(i)));
    worst(data_path("rotation.json"), temp_path("det_w" + std::to_string(i)));
  }
  EXPECT_EQ(slurp(temp_path("det_r0")), slurp(temp_path("det_r1")));
  EXPECT_EQ(slurp(temp_path("det_w0")), slurp(temp_path("det_w1")));
}
