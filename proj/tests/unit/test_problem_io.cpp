#include <gtest/gtest.h>

#include "iqcrad/problem_io.hpp"
#include "instances.hpp"

using namespace iqcrad;
using namespace iqcrad::testing;

TEST(ProblemIo, ParsesBothMatrixForms) {
  const io::Problem p = io::load_problem(data_path("jordan.json"));
  ASSERT_TRUE(p.sys.has_value());
  EXPECT_EQ(p.sys->A(), jordan_block());
  EXPECT_EQ(p.sys->m(), 0);
  EXPECT_EQ(p.iqcs.size(), 0);
}

TEST(ProblemIo, RaggedRowsCiteRow) {
  try {
    io::load_problem(data_path("ragged.json"));
    FAIL() << "expected a parse error";
  } catch (const io::ParseError& e) {
    EXPECT_EQ(e.field(), "/A/1");
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
}

TEST(ProblemIo, SyntaxErrorHasLineAndColumn) {
  try {
    io::load_problem(data_path("syntax_error.json"));
    FAIL() << "expected a parse error";
  } catch (const io::ParseError& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_GT(e.column(), 0);
  }
}

TEST(ProblemIo, DimensionMismatchNamesField) {
  const std::string text = R"({"dims": {"n": 2, "m": 0}, "A": [[1]]})";
  try {
    io::parse_problem(text);
    FAIL();
  } catch (const io::ParseError& e) {
    EXPECT_EQ(e.field(), "/A");
  }
  const std::string iqc = R"({"A": [[1]], "iqcs": [[[1, 0], [0, 1]]]})";
  EXPECT_THROW(io::parse_problem(iqc), io::ParseError);
  EXPECT_THROW(io::parse_problem(R"({"A": [[1]], "B": {"rows": 1, "cols": 2, "data": [1]}})"),
               io::ParseError);
  EXPECT_THROW(io::parse_problem(R"({"iqcs": []})"), io::ParseError);
}

TEST(ProblemIo, OptionsBlock) {
  const io::Problem p = io::parse_problem(
      R"({"A": [[0.5]], "options": {"bisect_tol": 1e-7, "rho_max": 5, "horizon": 100}})");
  EXPECT_DOUBLE_EQ(*p.options.bisect_tol, 1e-7);
  EXPECT_DOUBLE_EQ(*p.options.rho_max, 5.0);
  EXPECT_EQ(*p.options.horizon, 100);
  EXPECT_FALSE(p.options.strict_eps.has_value());
}

TEST(ProblemIo, ProblemRoundTrip) {
  const Instance inst = rotation_with_input();
  const io::json j = io::problem_to_json(inst.sys, inst.iqcs, {});
  const io::Problem back = io::parse_problem(j.dump());
  EXPECT_EQ(back.sys->A(), inst.sys.A());
  EXPECT_EQ(back.sys->B(), inst.sys.B());
  EXPECT_EQ(back.iqcs[0], inst.iqcs[0]);
  const Matrix empty(3, 0);
  EXPECT_EQ(io::matrix_from_json(io::matrix_to_json(empty), "/x").rows(), 3);
}

TEST(ProblemIo, CertificateRoundTripIsExact) {
  RadiusCertificate c;
  c.rho = 0.123456789012345678;
  c.rho_lo = 0.1;
  c.rho_hi = c.rho;
  c.P = Matrix::Identity(2, 2) * (1.0 / 3.0);
  c.lambdas = {0.1, 1e-300};
  c.margin = -std::sqrt(2.0);
  c.attained = true;
  const RadiusCertificate back = io::certificate_from_json(io::certificate_to_json(c));
  EXPECT_EQ(back.rho, c.rho);
  EXPECT_EQ(back.P, c.P);
  EXPECT_EQ(back.lambdas, c.lambdas);
  EXPECT_EQ(back.margin, c.margin);
  RadiusCertificate none;
  none.rho_hi = std::numeric_limits<double>::infinity();
  const io::json j = io::certificate_to_json(none);
  EXPECT_TRUE(j["rho"].is_null());
  EXPECT_FALSE(io::certificate_from_json(j).finite());
}

TEST(ProblemIo, WitnessRoundTripIsExact) {
  const Instance inst = rotation_indefinite();
  const WorstCaseOutcome out = worst_case(inst.sys, inst.iqcs);
  ASSERT_TRUE(out.report);
  const WitnessReport back = io::witness_from_json(io::witness_to_json(*out.report));
  EXPECT_EQ(back.modes.F, out.report->modes.F);
  EXPECT_EQ(*back.modes.v, *out.report->modes.v);
  EXPECT_EQ(back.beta, out.report->beta);
  ASSERT_EQ(back.modes.groups.size(), out.report->modes.groups.size());
  EXPECT_EQ(back.modes.groups[0].W, out.report->modes.groups[0].W);
  EXPECT_EQ(back.modes.groups[0].theta, out.report->modes.groups[0].theta);
}

TEST(ProblemIo, PlantAndFilters) {
  const io::Problem p = io::load_problem(data_path("two_filters.json"));
  ASSERT_TRUE(p.plant.has_value());
  EXPECT_EQ(p.filters.size(), 2u);
  EXPECT_FALSE(p.sys.has_value());
  EXPECT_THROW(io::parse_problem(R"({"A": [[1]], "filters": []})"), io::ParseError);
}
