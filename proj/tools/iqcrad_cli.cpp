#include <iostream>

#include "CLI11.hpp"

#include "cli_commands.hpp"

int main(int argc, char** argv) {
  using namespace iqcrad::cli;
  CLI::App app{"Generalized spectral radius, stability certificates and worst-case witnesses "
               "for discrete-time systems under IQCs"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 ok, 1 input error, 2 no certificate, 3 no witness, "
      "4 verification failed, 5 numerical failure.\n"
      "Environment: IQCRAD_BISECT_TOL, IQCRAD_STRICT_EPS, IQCRAD_RHO_MAX set default "
      "tolerances (problem options and flags take precedence).");

  std::string problem, report;
  RadiusFlags rflags;
  WorstCaseFlags wflags;
  std::optional<std::string> augment_out;

  auto* radius = app.add_subcommand("radius", "Bisect for rho and emit a Lyapunov certificate");
  radius->add_option("problem", problem, "Problem file")->required();
  radius->add_option("--tol", rflags.tol, "Bisection tolerance");
  radius->add_option("--rho-max", rflags.rho_max, "Largest rho to search");
  radius->add_option("--strict-eps", rflags.strict_eps, "Strict feasibility margin");
  radius->add_option("--out", rflags.out, "Write the machine-readable report here");

  auto* worst = app.add_subcommand("worst-case", "Construct a non-convergent witness at rho = 1");
  worst->add_option("problem", problem, "Problem file")->required();
  worst->add_option("--horizon", wflags.horizon, "Trajectory horizon");
  worst->add_option("--out", wflags.out, "Write the machine-readable report here");

  auto* verify = app.add_subcommand("verify", "Re-check a report against its problem");
  verify->add_option("report", report, "Report file")->required();
  verify->add_option("problem", problem, "Problem file")->required();

  auto* aug = app.add_subcommand("augment", "Absorb dynamic IQC filters into a static problem");
  aug->add_option("problem", problem, "Problem file with plant and filters blocks")->required();
  aug->add_option("--out", augment_out, "Write the static problem here (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : input_error;
  }

  if (radius->parsed()) return cmd_radius(problem, rflags, std::cout, std::cerr);
  if (worst->parsed()) return cmd_worst_case(problem, wflags, std::cout, std::cerr);
  if (verify->parsed()) return cmd_verify(report, problem, std::cout, std::cerr);
  return cmd_augment(problem, augment_out, std::cout, std::cerr);
}
