#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "iqcrad/dynamic_iqc.hpp"
#include "iqcrad/model.hpp"
#include "iqcrad/radius.hpp"
#include "iqcrad/stability.hpp"
#include "iqcrad/verify.hpp"
#include "iqcrad/worstcase.hpp"

namespace iqcrad::io {

using json = nlohmann::json;

/// Input error tied to a field path (e.g. "/iqcs/1") and, for syntax errors,
/// a line and column in the source text.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, const std::string& message, int line = 0, int column = 0);
  const std::string& field() const { return field_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string field_;
  int line_;
  int column_;
};

struct ProblemOptions {
  std::optional<double> bisect_tol;
  std::optional<double> rho_max;
  std::optional<double> strict_eps;
  std::optional<int> horizon;
};

struct Problem {
  std::optional<SystemData> sys;
  IqcSet iqcs;
  std::optional<PlantData> plant;
  std::vector<IqcFilter> filters;
  ProblemOptions options;
};

/// Matrices are either {"rows": r, "cols": c, "data": [row-major]} or an
/// array of rows. The first form is needed for r x 0 matrices.
Matrix matrix_from_json(const json& j, const std::string& field);
json matrix_to_json(const Matrix& M);

Problem parse_problem(const std::string& text);
Problem load_problem(const std::string& path);
json parse_json(const std::string& text);
json load_json(const std::string& path);

json problem_to_json(const SystemData& sys, const IqcSet& iqcs, const ProblemOptions& options);

json certificate_to_json(const RadiusCertificate& cert);
RadiusCertificate certificate_from_json(const json& j);

json witness_to_json(const WitnessReport& report);
WitnessReport witness_from_json(const json& j);

json checks_to_json(const CheckReport& checks);

}  // namespace iqcrad::io
