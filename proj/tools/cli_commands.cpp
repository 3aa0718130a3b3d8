#include "cli_commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>

#include "iqcrad/dynamic_iqc.hpp"
#include "iqcrad/linalg.hpp"
#include "iqcrad/lyapunov_sdp.hpp"
#include "iqcrad/problem_io.hpp"
#include "iqcrad/radius.hpp"
#include "iqcrad/verify.hpp"
#include "iqcrad/worstcase.hpp"

namespace iqcrad::cli {
namespace {

using io::json;

constexpr double kReproduceTol = 1e-9;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::optional<double> env_double(const char* name) {
  const char* raw = std::getenv(name);
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !std::isfinite(v) || v <= 0.0) {
    throw InputError(std::string(name) + " must be a positive number, got '" + raw + "'");
  }
  return v;
}

// Flags override the problem file, which overrides the environment.
RadiusOptions resolve_options(const io::ProblemOptions& file, const RadiusFlags& flags) {
  RadiusOptions opts;
  if (auto v = env_double("IQCRAD_BISECT_TOL")) opts.bisect_tol = *v;
  if (auto v = env_double("IQCRAD_STRICT_EPS")) opts.strict_eps = *v;
  if (auto v = env_double("IQCRAD_RHO_MAX")) opts.rho_max = *v;
  if (file.bisect_tol) opts.bisect_tol = *file.bisect_tol;
  if (file.strict_eps) opts.strict_eps = *file.strict_eps;
  if (file.rho_max) opts.rho_max = *file.rho_max;
  if (flags.tol) opts.bisect_tol = *flags.tol;
  if (flags.strict_eps) opts.strict_eps = *flags.strict_eps;
  if (flags.rho_max) opts.rho_max = *flags.rho_max;
  if (!(opts.bisect_tol > 0) || !(opts.strict_eps > 0) || !(opts.rho_max > 0)) {
    throw InputError("tolerances and rho_max must be positive");
  }
  return opts;
}

struct StaticProblem {
  SystemData sys;
  IqcSet iqcs;
  io::ProblemOptions options;
};

StaticProblem load_static(const std::string& path) {
  io::Problem p = io::load_problem(path);
  if (!p.sys) throw io::ParseError("/A", "problem has no static system (run augment first)");
  return StaticProblem{*p.sys, p.iqcs, p.options};
}

void write_report(const json& report, const std::optional<std::string>& path) {
  if (!path) return;
  std::ofstream f(*path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write " + *path);
  f << report.dump(2) << '\n';
}

bool reproduces(double recorded, double recomputed) {
  if (std::isnan(recorded) || std::isnan(recomputed)) return false;
  if (recorded == recomputed) return true;
  return std::abs(recorded - recomputed) <= kReproduceTol * std::max(1.0, std::abs(recorded));
}

double number_or_nan(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::string verdict_for(const RadiusCertificate& cert, const RadiusOptions& opts) {
  if (!cert.finite()) return "inconclusive";
  if (cert.rho < 1.0 - opts.bisect_tol) return "asymptotically-stable";
  if (cert.rho <= 1.0 + 2.0 * opts.bisect_tol && cert.attained) return "bounded";
  return "inconclusive";
}

json radius_verification(const SystemData& sys, const IqcSet& iqcs,
                         const RadiusCertificate& cert) {
  json v = json::object();
  if (!cert.finite()) return v;
  v["lmi_margin"] = lmi_margin(sys, iqcs, cert.rho_hi, cert.P, cert.lambdas);
  v["p_min_eigenvalue"] = linalg::min_eigenvalue(cert.P);
  double lmin = 0.0;
  for (double l : cert.lambdas) lmin = std::min(lmin, l);
  v["lambda_min"] = lmin;
  return v;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const io::ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return input_error;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return input_error;
  } catch (const DimensionError& e) {
    err << "input error: " << e.what() << '\n';
    return input_error;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return numerical_failure;
  }
}

}  // namespace

int cmd_radius(const std::string& problem_path, const RadiusFlags& flags, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    const StaticProblem prob = load_static(problem_path);
    const RadiusOptions opts = resolve_options(prob.options, flags);
    for (const auto& w : prob.iqcs.warnings()) err << "warning: " << w << '\n';
    const RadiusCertificate cert = spectral_radius(prob.sys, prob.iqcs, opts);

    json report;
    report["command"] = "radius";
    report["status"] = cert.finite() ? "certified" : "no-certificate";
    report["certificate"] = io::certificate_to_json(cert);
    report["verdict"] = verdict_for(cert, opts);
    report["options"] = {{"bisect_tol", opts.bisect_tol},
                         {"rho_max", opts.rho_max},
                         {"strict_eps", opts.strict_eps}};
    report["verification"] = radius_verification(prob.sys, prob.iqcs, cert);
    write_report(report, flags.out);

    out << std::setprecision(10);
    if (!cert.finite()) {
      out << "no certificate for rho <= " << opts.rho_max << '\n';
      return no_certificate;
    }
    out << "rho = " << cert.rho << "  bracket [" << cert.rho_lo << ", " << cert.rho_hi << "]\n"
        << "attained: " << (cert.attained ? "yes" : "no") << '\n'
        << "verdict: " << report["verdict"].get<std::string>() << '\n'
        << "lmi margin: " << cert.margin << '\n';
    return ok;
  });
}

int cmd_worst_case(const std::string& problem_path, const WorstCaseFlags& flags,
                   std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const StaticProblem prob = load_static(problem_path);
    WorstCaseOptions opts;
    opts.radius = resolve_options(prob.options, RadiusFlags{});
    if (prob.options.horizon) opts.horizon = *prob.options.horizon;
    if (flags.horizon) opts.horizon = *flags.horizon;
    if (opts.horizon <= 0) throw InputError("horizon must be positive");
    for (const auto& w : prob.iqcs.warnings()) err << "warning: " << w << '\n';
    const WorstCaseOutcome outcome = worst_case(prob.sys, prob.iqcs, opts);

    json report;
    report["command"] = "worst-case";
    report["stage"] = to_string(outcome.stage);
    report["reason"] = outcome.reason;
    report["radius"] = outcome.radius ? io::certificate_to_json(*outcome.radius) : json(nullptr);
    if (outcome.report) {
      const CheckReport checks = check_witness(*outcome.report, prob.sys, prob.iqcs, opts.horizon);
      report["status"] = "witness";
      report["verdict"] = "not-asymptotically-stable";
      report["witness"] = io::witness_to_json(*outcome.report);
      report["verification"] = io::checks_to_json(checks);
    } else {
      report["status"] = "no-witness";
      report["witness"] = nullptr;
      report["verification"] = json::object();
    }
    write_report(report, flags.out);

    out << std::setprecision(10);
    if (!outcome.report) {
      out << "no witness (stage " << to_string(outcome.stage) << "): " << outcome.reason << '\n';
      return no_witness;
    }
    const WitnessReport& w = *outcome.report;
    out << "witness found: d = " << w.modes.d << ", horizon " << opts.horizon << '\n';
    for (const auto& g : w.modes.groups) {
      out << "  eigen-group theta = " << g.theta << " multiplicity " << g.multiplicity() << '\n';
    }
    out << "feedback gain: " << (w.K ? "yes" : "no") << '\n';
    if (w.hard_shift) out << "hard IQC after shift " << *w.hard_shift << '\n';
    for (const auto& warning : w.modes.warnings) out << "warning: " << warning << '\n';
    return ok;
  });
}

int cmd_verify(const std::string& report_path, const std::string& problem_path,
               std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json report = io::load_json(report_path);
    const StaticProblem prob = load_static(problem_path);
    if (!report.is_object() || !report.contains("command")) {
      throw io::ParseError("/command", "not a report");
    }
    const std::string command = report["command"].get<std::string>();
    const json& recorded = report.contains("verification") ? report["verification"] : json();
    bool all_ok = true;
    auto line = [&](const std::string& name, bool passed, const std::string& detail) {
      out << (passed ? "ok    " : "FAIL  ") << name << "  " << detail << '\n';
      all_ok = all_ok && passed;
    };

    if (command == "radius") {
      const RadiusCertificate cert = io::certificate_from_json(report.at("certificate"));
      if (!cert.finite()) {
        out << "report has no certificate; nothing to verify\n";
        return ok;
      }
      if (cert.P.rows() != prob.sys.n() || cert.P.cols() != prob.sys.n() ||
          static_cast<int>(cert.lambdas.size()) != prob.iqcs.size()) {
        throw InputError("report certificate does not match the problem dimensions");
      }
      const json fresh = radius_verification(prob.sys, prob.iqcs, cert);
      for (const auto& [key, value] : fresh.items()) {
        const double a = recorded.contains(key) ? number_or_nan(recorded[key])
                                                : std::numeric_limits<double>::quiet_NaN();
        const double b = value.get<double>();
        std::ostringstream os;
        os << std::setprecision(17) << "recorded " << a << " recomputed " << b;
        line(key + " reproduces", reproduces(a, b), os.str());
      }
      const double margin = fresh["lmi_margin"].get<double>();
      line("lmi strictly feasible", margin < 0.0, "lambda_max " + std::to_string(margin));
      line("P positive definite", fresh["p_min_eigenvalue"].get<double>() > 0.0, "");
      line("multipliers nonnegative", fresh["lambda_min"].get<double>() >= 0.0, "");
    } else if (command == "worst-case") {
      if (report.at("witness").is_null()) {
        out << "report has no witness; nothing to verify\n";
        return ok;
      }
      const WitnessReport w = io::witness_from_json(report["witness"]);
      const auto& m = w.modes;
      if (m.X.rows() != prob.sys.n() || m.U.rows() != prob.sys.m() || m.X.cols() != m.d ||
          m.U.cols() != m.d || static_cast<int>(m.H.size()) != prob.iqcs.size() ||
          static_cast<int>(w.beta.size()) != prob.iqcs.size()) {
        throw InputError("report witness does not match the problem dimensions");
      }
      const int horizon = report["witness"].value("horizon", 10000);
      const CheckReport checks = check_witness(w, prob.sys, prob.iqcs, horizon);
      for (const auto& c : checks.checks) {
        double a = std::numeric_limits<double>::quiet_NaN();
        if (recorded.contains(c.name)) a = number_or_nan(recorded[c.name]["value"]);
        std::ostringstream os;
        os << std::setprecision(17) << "value " << c.value << " bound " << c.bound;
        line(c.name, c.passed, os.str());
        line(c.name + " reproduces", reproduces(a, c.value) || (std::isinf(a) && a == c.value),
             "");
      }
    } else {
      throw io::ParseError("/command", "unknown report command '" + command + "'");
    }
    out << (all_ok ? "verification passed" : "verification FAILED") << '\n';
    return all_ok ? ok : verification_failed;
  });
}

int cmd_augment(const std::string& problem_path, const std::optional<std::string>& out_path,
                std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const io::Problem p = io::load_problem(problem_path);
    if (!p.plant) throw io::ParseError("/plant", "missing required field");
    if (p.filters.empty()) throw io::ParseError("/filters", "missing required field");
    const Augmented aug = augment(*p.plant, p.filters);
    const json doc = io::problem_to_json(aug.sys, aug.iqcs, p.options);
    if (out_path) {
      write_report(doc, out_path);
    } else {
      out << doc.dump(2) << '\n';
      return ok;
    }
    out << "augmented system: n = " << aug.sys.n() << ", m = " << aug.sys.m() << ", "
        << aug.iqcs.size() << " IQC(s)\n";
    return ok;
  });
}

}  // namespace iqcrad::cli
