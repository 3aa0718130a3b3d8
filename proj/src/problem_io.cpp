#include "iqcrad/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace iqcrad::io {
namespace {

std::pair<int, int> line_column(const std::string& text, std::size_t offset) {
  int line = 1, column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ParseError(field, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ParseError(field, "expected a nonnegative integer");
  }
  return static_cast<int>(j.get<long long>());
}

const json& member(const json& obj, const char* key, const std::string& field) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(field + "/" + key, "missing required field");
  }
  return obj.at(key);
}

// Doubles that JSON cannot carry are written as strings.
json real_to_json(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double real_from_json(const json& j, const std::string& field) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  return number(j, field);
}

Vector vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw ParseError(field, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(j[i], field + "/" + std::to_string(i));
  }
  return v;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

PlantData plant_from_json(const json& j, const std::string& field) {
  PlantData p;
  p.A = matrix_from_json(member(j, "A", field), field + "/A");
  const auto n = p.A.rows();
  p.B = j.contains("B") ? matrix_from_json(j["B"], field + "/B") : Matrix(n, 0);
  p.C = matrix_from_json(member(j, "C", field), field + "/C");
  p.D = j.contains("D") ? matrix_from_json(j["D"], field + "/D")
                        : Matrix(Matrix::Zero(p.C.rows(), p.B.cols()));
  try {
    p.validate();
  } catch (const DimensionError& e) {
    throw ParseError(field, e.what());
  }
  return p;
}

IqcFilter filter_from_json(const json& j, const std::string& field, const PlantData& plant) {
  IqcFilter f;
  f.M = matrix_from_json(member(j, "M", field), field + "/M");
  const auto q = f.M.rows();
  f.A_psi = j.contains("A_psi") ? matrix_from_json(j["A_psi"], field + "/A_psi") : Matrix(0, 0);
  const auto np = f.A_psi.rows();
  auto opt = [&](const char* key, Eigen::Index r, Eigen::Index c) {
    return j.contains(key) ? matrix_from_json(j[key], field + "/" + key)
                           : Matrix(Matrix::Zero(r, c));
  };
  f.B1 = opt("B1", np, plant.p());
  f.B2 = opt("B2", np, plant.m());
  f.C_psi = opt("C_psi", q, np);
  f.D1 = opt("D1", q, plant.p());
  f.D2 = opt("D2", q, plant.m());
  try {
    f.validate(plant);
  } catch (const DimensionError& e) {
    throw ParseError(field, e.what());
  }
  return f;
}

}  // namespace

ParseError::ParseError(std::string field, const std::string& message, int line, int column)
    : std::runtime_error([&] {
        std::ostringstream os;
        if (line > 0) os << "line " << line << ", column " << column << ": ";
        if (!field.empty()) os << field << ": ";
        os << message;
        return os.str();
      }()),
      field_(std::move(field)),
      line_(line),
      column_(column) {}

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (j.is_object()) {
    const int rows = integer(member(j, "rows", field), field + "/rows");
    const int cols = integer(member(j, "cols", field), field + "/cols");
    const json& data = member(j, "data", field);
    if (!data.is_array()) throw ParseError(field + "/data", "expected an array");
    if (data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
      throw ParseError(field + "/data", "has " + std::to_string(data.size()) + " entries, expected " +
                                            std::to_string(rows) + "*" + std::to_string(cols));
    }
    Matrix M(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const auto k = static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                       static_cast<std::size_t>(c);
        M(r, c) = number(data[k], field + "/data/" + std::to_string(k));
      }
    }
    return M;
  }
  if (j.is_array()) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) return Matrix(0, 0);
    if (!j[0].is_array()) throw ParseError(field + "/0", "expected an array of rows");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix M(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const std::string rf = field + "/" + std::to_string(r);
      const json& row = j[static_cast<std::size_t>(r)];
      if (!row.is_array()) throw ParseError(rf, "expected an array of numbers");
      if (static_cast<Eigen::Index>(row.size()) != cols) {
        throw ParseError(rf, "row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                                 " entries, expected " + std::to_string(cols) + " (ragged rows)");
      }
      for (Eigen::Index c = 0; c < cols; ++c) {
        M(r, c) = number(row[static_cast<std::size_t>(c)], rf + "/" + std::to_string(c));
      }
    }
    return M;
  }
  throw ParseError(field, "expected a matrix ({rows, cols, data} or an array of rows)");
}

json matrix_to_json(const Matrix& M) {
  json data = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) data.push_back(M(r, c));
  }
  return json{{"rows", M.rows()}, {"cols", M.cols()}, {"data", data}};
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    const auto pos = msg.find("; ");
    if (pos != std::string::npos) msg = msg.substr(pos + 2);
    throw ParseError("", msg, line, column);
  }
}

json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("", "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_json(os.str());
}

namespace {

Problem problem_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("", "problem must be a JSON object");
  Problem p;
  std::optional<int> n_dim, m_dim;
  if (j.contains("dims")) {
    const json& d = j["dims"];
    if (d.contains("n")) n_dim = integer(d["n"], "/dims/n");
    if (d.contains("m")) m_dim = integer(d["m"], "/dims/m");
  }
  if (j.contains("A")) {
    Matrix A = matrix_from_json(j["A"], "/A");
    if (A.rows() != A.cols()) throw ParseError("/A", "A must be square");
    if (n_dim && A.rows() != *n_dim) {
      throw ParseError("/A", "A is " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()) +
                                 " but dims.n = " + std::to_string(*n_dim));
    }
    Matrix B = j.contains("B") ? matrix_from_json(j["B"], "/B") : Matrix(A.rows(), m_dim.value_or(0));
    if (B.size() == 0 && B.rows() == 0 && A.rows() > 0) B = Matrix(A.rows(), m_dim.value_or(0));
    if (m_dim && B.cols() != *m_dim) {
      throw ParseError("/B", "B has " + std::to_string(B.cols()) + " columns but dims.m = " +
                                 std::to_string(*m_dim));
    }
    try {
      p.sys.emplace(std::move(A), std::move(B));
    } catch (const DimensionError& e) {
      throw ParseError("/B", e.what());
    }
    if (j.contains("iqcs")) {
      const json& list = j["iqcs"];
      if (!list.is_array()) throw ParseError("/iqcs", "expected an array of matrices");
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string f = "/iqcs/" + std::to_string(i);
        try {
          p.iqcs.add(matrix_from_json(list[i], f));
        } catch (const DimensionError& e) {
          throw ParseError(f, e.what());
        }
      }
      try {
        p.iqcs.check_compatible(*p.sys);
      } catch (const DimensionError& e) {
        throw ParseError("/iqcs", e.what());
      }
    }
  } else if (j.contains("iqcs") && !j["iqcs"].empty()) {
    throw ParseError("/A", "iqcs given without a system");
  }
  if (j.contains("plant")) p.plant = plant_from_json(j["plant"], "/plant");
  if (j.contains("filters")) {
    if (!p.plant) throw ParseError("/plant", "filters need a plant block");
    const json& list = j["filters"];
    if (!list.is_array()) throw ParseError("/filters", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      p.filters.push_back(filter_from_json(list[i], "/filters/" + std::to_string(i), *p.plant));
    }
  }
  if (!p.sys && !p.plant) throw ParseError("/A", "missing required field");
  if (j.contains("options")) {
    const json& o = j["options"];
    if (!o.is_object()) throw ParseError("/options", "expected an object");
    if (o.contains("bisect_tol")) p.options.bisect_tol = number(o["bisect_tol"], "/options/bisect_tol");
    if (o.contains("rho_max")) p.options.rho_max = number(o["rho_max"], "/options/rho_max");
    if (o.contains("strict_eps")) p.options.strict_eps = number(o["strict_eps"], "/options/strict_eps");
    if (o.contains("horizon")) p.options.horizon = integer(o["horizon"], "/options/horizon");
  }
  return p;
}

}  // namespace

Problem parse_problem(const std::string& text) { return problem_from_json(parse_json(text)); }

Problem load_problem(const std::string& path) { return problem_from_json(load_json(path)); }

json problem_to_json(const SystemData& sys, const IqcSet& iqcs, const ProblemOptions& options) {
  json out;
  out["dims"] = {{"n", sys.n()}, {"m", sys.m()}};
  out["A"] = matrix_to_json(sys.A());
  out["B"] = matrix_to_json(sys.B());
  json list = json::array();
  for (const auto& M : iqcs) list.push_back(matrix_to_json(M));
  out["iqcs"] = list;
  json o = json::object();
  if (options.bisect_tol) o["bisect_tol"] = *options.bisect_tol;
  if (options.rho_max) o["rho_max"] = *options.rho_max;
  if (options.strict_eps) o["strict_eps"] = *options.strict_eps;
  if (options.horizon) o["horizon"] = *options.horizon;
  if (!o.empty()) out["options"] = o;
  return out;
}

json certificate_to_json(const RadiusCertificate& cert) {
  json out;
  out["rho"] = cert.finite() ? json(cert.rho) : json(nullptr);
  out["bracket"] = {real_to_json(cert.rho_lo), real_to_json(cert.rho_hi)};
  out["attained"] = cert.attained;
  out["attainment_margin"] = real_to_json(cert.attainment_margin);
  out["probes"] = cert.probes;
  out["diagnostics"] = cert.diagnostics;
  if (cert.finite()) {
    out["P"] = matrix_to_json(cert.P);
    out["lambdas"] = cert.lambdas;
    out["margin"] = real_to_json(cert.margin);
  }
  return out;
}

RadiusCertificate certificate_from_json(const json& j) {
  RadiusCertificate c;
  const std::string f = "/certificate";
  const json& rho = member(j, "rho", f);
  c.rho = rho.is_null() ? std::numeric_limits<double>::infinity() : number(rho, f + "/rho");
  const json& br = member(j, "bracket", f);
  if (!br.is_array() || br.size() != 2) throw ParseError(f + "/bracket", "expected two numbers");
  c.rho_lo = real_from_json(br[0], f + "/bracket/0");
  c.rho_hi = real_from_json(br[1], f + "/bracket/1");
  c.attained = member(j, "attained", f).get<bool>();
  if (j.contains("attainment_margin")) {
    c.attainment_margin = real_from_json(j["attainment_margin"], f + "/attainment_margin");
  }
  if (c.finite()) {
    c.P = matrix_from_json(member(j, "P", f), f + "/P");
    const Vector l = vector_from_json(member(j, "lambdas", f), f + "/lambdas");
    c.lambdas.assign(l.data(), l.data() + l.size());
    c.margin = real_from_json(member(j, "margin", f), f + "/margin");
  }
  return c;
}

json witness_to_json(const WitnessReport& report) {
  const WorstCaseModes& m = report.modes;
  json out;
  out["Q"] = matrix_to_json(m.Q);
  out["d"] = m.d;
  out["X"] = matrix_to_json(m.X);
  out["U"] = matrix_to_json(m.U);
  out["F"] = matrix_to_json(m.F);
  json groups = json::array();
  for (const auto& g : m.groups) {
    groups.push_back({{"theta", g.theta},
                      {"multiplicity", g.multiplicity()},
                      {"W_real", matrix_to_json(g.W.real())},
                      {"W_imag", matrix_to_json(g.W.imag())}});
  }
  out["eigen_groups"] = groups;
  json H = json::array();
  for (const auto& h : m.H) H.push_back(matrix_to_json(h));
  out["H"] = H;
  out["v"] = m.v ? vector_to_json(*m.v) : json(nullptr);
  out["K"] = report.K ? matrix_to_json(*report.K) : json(nullptr);
  out["beta"] = report.beta;
  out["hard_shift"] = report.hard_shift ? json(*report.hard_shift) : json(nullptr);
  out["pointwise"] = report.pointwise;
  out["horizon"] = report.trajectory.steps();
  out["warnings"] = m.warnings;
  return out;
}

WitnessReport witness_from_json(const json& j) {
  const std::string f = "/witness";
  WitnessReport r;
  WorstCaseModes& m = r.modes;
  m.Q = matrix_from_json(member(j, "Q", f), f + "/Q");
  m.d = integer(member(j, "d", f), f + "/d");
  m.X = matrix_from_json(member(j, "X", f), f + "/X");
  m.U = matrix_from_json(member(j, "U", f), f + "/U");
  m.F = matrix_from_json(member(j, "F", f), f + "/F");
  // Zero-size matrices lose their other dimension in row-list form only;
  // the {rows, cols, data} form written here keeps it.
  const json& groups = member(j, "eigen_groups", f);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const std::string gf = f + "/eigen_groups/" + std::to_string(i);
    EigenGroup g;
    g.theta = number(member(groups[i], "theta", gf), gf + "/theta");
    const Matrix re = matrix_from_json(member(groups[i], "W_real", gf), gf + "/W_real");
    const Matrix im = matrix_from_json(member(groups[i], "W_imag", gf), gf + "/W_imag");
    if (re.rows() != im.rows() || re.cols() != im.cols()) {
      throw ParseError(gf, "W_real and W_imag differ in shape");
    }
    g.W = re.cast<std::complex<double>>() + std::complex<double>(0, 1) * im.cast<std::complex<double>>();
    m.groups.push_back(std::move(g));
  }
  const json& H = member(j, "H", f);
  for (std::size_t i = 0; i < H.size(); ++i) {
    m.H.push_back(matrix_from_json(H[i], f + "/H/" + std::to_string(i)));
  }
  const json& v = member(j, "v", f);
  if (!v.is_null()) m.v = vector_from_json(v, f + "/v");
  const json& K = member(j, "K", f);
  if (!K.is_null()) r.K = matrix_from_json(K, f + "/K");
  const Vector beta = vector_from_json(member(j, "beta", f), f + "/beta");
  r.beta.assign(beta.data(), beta.data() + beta.size());
  const json& hs = member(j, "hard_shift", f);
  if (!hs.is_null()) r.hard_shift = integer(hs, f + "/hard_shift");
  r.pointwise = member(j, "pointwise", f).get<bool>();
  if (j.contains("horizon")) {
    const int horizon = integer(j["horizon"], f + "/horizon");
    r.trajectory.inputs.resize(static_cast<std::size_t>(horizon));
  }
  return r;
}

json checks_to_json(const CheckReport& checks) {
  json out = json::object();
  for (const auto& c : checks.checks) {
    out[c.name] = {{"passed", c.passed}, {"value", real_to_json(c.value)}, {"bound", c.bound}};
  }
  return out;
}

}  // namespace iqcrad::io
