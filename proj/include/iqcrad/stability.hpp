#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iqcrad/radius.hpp"
#include "iqcrad/worstcase.hpp"

namespace iqcrad {

enum class Classification { asymptotically_stable, bounded, inconclusive, witness_unstable };

std::string to_string(Classification c);

struct StabilityVerdict {
  Classification classification = Classification::inconclusive;
  RadiusCertificate certificate;
  /// rho <= 1 with the optimum attained: every IQC-satisfying trajectory is
  /// bounded. Can hold together with witness_unstable.
  bool robustly_bounded = false;
  std::optional<WitnessReport> witness;
  std::optional<PipelineStage> witness_stage;
  /// Growing free response for m = 0 with a defective unit-circle eigenvalue.
  std::optional<DefectiveDiagnostic> growth;
  std::vector<std::string> reasons;
};

/// rho < 1 - tol: asymptotically stable. rho = 1: bounded if attained, and in
/// any case the witness pipeline is attempted; a witness makes the verdict
/// witness-unstable (not asymptotically stable). Otherwise inconclusive.
StabilityVerdict classify(const SystemData& sys, const IqcSet& iqcs,
                          const WorstCaseOptions& opts = {});

}  // namespace iqcrad
