#pragma once

#include <optional>
#include <ostream>
#include <string>

namespace iqcrad::cli {

/// Process exit codes. Each failure mode has its own code.
enum ExitCode : int {
  ok = 0,
  input_error = 1,
  no_certificate = 2,
  no_witness = 3,
  verification_failed = 4,
  numerical_failure = 5,
};

struct RadiusFlags {
  std::optional<double> tol;
  std::optional<double> rho_max;
  std::optional<double> strict_eps;
  std::optional<std::string> out;
};

struct WorstCaseFlags {
  std::optional<int> horizon;
  std::optional<std::string> out;
};

int cmd_radius(const std::string& problem_path, const RadiusFlags& flags, std::ostream& out,
               std::ostream& err);
int cmd_worst_case(const std::string& problem_path, const WorstCaseFlags& flags,
                   std::ostream& out, std::ostream& err);
int cmd_verify(const std::string& report_path, const std::string& problem_path,
               std::ostream& out, std::ostream& err);
int cmd_augment(const std::string& problem_path, const std::optional<std::string>& out_path,
                std::ostream& out, std::ostream& err);

}  // namespace iqcrad::cli
