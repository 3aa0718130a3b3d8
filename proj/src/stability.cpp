#include "iqcrad/stability.hpp"

#include <cmath>
#include <sstream>

namespace iqcrad {

std::string to_string(Classification c) {
  switch (c) {
    case Classification::asymptotically_stable:
      return "asymptotically-stable";
    case Classification::bounded:
      return "bounded";
    case Classification::inconclusive:
      return "inconclusive";
    case Classification::witness_unstable:
      return "witness-unstable";
  }
  return "unknown";
}

StabilityVerdict classify(const SystemData& sys, const IqcSet& iqcs,
                          const WorstCaseOptions& opts) {
  StabilityVerdict out;
  out.certificate = spectral_radius(sys, iqcs, opts.radius);
  const double rho = out.certificate.rho;
  const double tol = opts.radius.bisect_tol;
  std::ostringstream os;
  os << "rho = " << rho;

  if (!out.certificate.finite()) {
    out.classification = Classification::inconclusive;
    out.reasons.push_back("no certificate up to rho_max");
    return out;
  }
  if (rho < 1.0 - tol) {
    out.classification = Classification::asymptotically_stable;
    out.robustly_bounded = true;
    out.reasons.push_back(os.str() + " < 1");
    return out;
  }
  if (rho > 1.0 + 2.0 * tol) {
    out.classification = Classification::inconclusive;
    out.reasons.push_back(os.str() + " > 1; the LMI proves nothing at rho = 1");
    return out;
  }

  out.robustly_bounded = out.certificate.attained;
  out.classification =
      out.certificate.attained ? Classification::bounded : Classification::inconclusive;
  out.reasons.push_back(out.certificate.attained ? "rho = 1 and the optimum is attained"
                                                 : "rho = 1 but the optimum is not attained");

  WorstCaseOptions wopts = opts;
  wopts.skip_precheck = true;
  WorstCaseOutcome wc = worst_case(sys, iqcs, wopts);
  out.witness_stage = wc.stage;
  if (wc.report) {
    out.classification = Classification::witness_unstable;
    out.witness = std::move(wc.report);
    out.reasons.push_back("non-convergent IQC-satisfying trajectory constructed");
  } else {
    out.reasons.push_back("no witness (" + to_string(wc.stage) + "): " + wc.reason);
  }
  if (!out.certificate.attained) {
    out.growth = defective_unit_circle_diagnostic(sys);
    if (out.growth) out.reasons.push_back("free response from a Jordan chain grows");
  }
  return out;
}

}  // namespace iqcrad
