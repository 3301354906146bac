#include <omp.h>

#include <CLI11.hpp>
#include <iostream>
#include <map>

#include "commands.hpp"
#include "igagrf/error.hpp"

namespace {

using igagrf::cli::Command;
using igagrf::cli::RunConfig;

struct RangeText {
  std::string levels, degrees, betas, quadrature, khat;
};

void add_common_options(CLI::App& app, RunConfig& config, RangeText& ranges, int& threads) {
  app.add_option("--geometry,-g", config.geometry, "builtin surface (sphere, torus) or geometry file")
      ->capture_default_str();
  app.add_option("--levels,-j", ranges.levels, "refinement levels, e.g. 3, 1..5 or 1,3,5");
  app.add_option("--degrees,-p", ranges.degrees, "spline degrees, e.g. 2 or 1..3");
  app.add_option("--betas,-b", ranges.betas, "fractional exponents, e.g. 1 or 0.15,0.3,0.5");
  app.add_option("--kappa,-k", config.kappa, "inverse correlation length")->capture_default_str();
  app.add_option("--seed", config.seed, "noise seed")->capture_default_str();
  app.add_option("--tol", config.tolerance, "relative preconditioned residual for CG")->capture_default_str();
  app.add_option("--maxit", config.max_iterations, "CG iteration limit")->capture_default_str();
  app.add_option("--variant", config.variant, "BPX smoother: diag or ssor (precond-bench: also both)")
      ->capture_default_str();
  app.add_option("--quadrature,-K", ranges.quadrature, "sinc quadrature K per stage; 0 selects the default");
  app.add_option("--khat", ranges.khat, "terms of the square-root expansion");
  app.add_flag("--plain{false},--improved{true}", config.improved, "splitting of beta (default improved)");
  app.add_option("--csv,-o", config.csv_path, "CSV output file (default standard output)");
  app.add_option("--vtk", config.vtk_path, "VTK output file for solve and sample");
  app.add_option("--vtk-refine", config.vtk_refine, "VTK supersampling exponent r")->capture_default_str();
  app.add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)")->capture_default_str();
}

void apply_ranges(const RangeText& ranges, RunConfig& config) {
  using igagrf::cli::parse_int_range;
  using igagrf::cli::parse_real_range;
  if (!ranges.levels.empty()) config.levels = parse_int_range(ranges.levels);
  if (!ranges.degrees.empty()) config.degrees = parse_int_range(ranges.degrees);
  if (!ranges.betas.empty()) config.betas = parse_real_range(ranges.betas);
  if (!ranges.quadrature.empty()) config.quadrature = parse_int_range(ranges.quadrature);
  if (!ranges.khat.empty()) config.khat = parse_int_range(ranges.khat);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whittle-Matern random fields and fractional surface PDEs with isogeometric discretizations"};
  app.require_subcommand(1);

  const std::map<std::string, std::pair<Command, std::string>> commands{
      {"solve", {Command::Solve, "solve (kappa^2 - Laplace)^beta u = Y_{1,-1} and report the L2 error"}},
      {"sample", {Command::Sample, "draw one Whittle-Matern field sample"}},
      {"precond-bench", {Command::PrecondBench, "CG iteration counts with the BPX preconditioner"}},
      {"sinc-study", {Command::SincStudy, "fractional solve error against the sinc quadrature K"}},
      {"sqrt-study", {Command::SqrtStudy, "square-root expansion error proxy against Khat"}},
  };

  RunConfig config;
  RangeText ranges;
  int threads = 0;
  std::map<CLI::App*, Command> selected;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    add_common_options(*sub, config, ranges, threads);
    selected[sub] = entry.first;
  }

  CLI11_PARSE(app, argc, argv);

  try {
    apply_ranges(ranges, config);
    if (threads < 0) throw igagrf::Error(igagrf::ErrorKind::InvalidArgument, "threads: must be non-negative");
    if (threads > 0) omp_set_num_threads(threads);
    for (const auto& [sub, command] : selected)
      if (sub->parsed()) igagrf::cli::execute(command, config);
  } catch (const igagrf::Error& e) {
    std::cerr << "igagrf: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
