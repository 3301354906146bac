#pragma once

// Experiment drivers behind the igagrf command-line tool. Every command
// validates its configuration, runs, and only then writes its outputs.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "igagrf/assembly.hpp"
#include "igagrf/fractional.hpp"
#include "igagrf/linalg.hpp"
#include "igagrf/sampler.hpp"

namespace igagrf::cli {

enum class Command { Solve, Sample, PrecondBench, SincStudy, SqrtStudy };

struct RunConfig {
  std::string geometry = "sphere";  ///< builtin name or geometry file path
  std::vector<int> levels{3};
  std::vector<int> degrees{2};
  std::vector<double> betas{1.0};
  double kappa = 1.0;
  std::uint64_t seed = 42;
  double tolerance = 1e-12;
  int max_iterations = 10000;
  /// "ssor" or "diag"; precond-bench also accepts "both".
  std::string variant = "ssor";
  /// Sinc quadrature K per stage; 0 selects the level-dependent default.
  std::vector<int> quadrature{0};
  /// Terms of the square-root expansion.
  std::vector<int> khat{12};
  bool improved = true;
  std::string csv_path;  ///< empty writes the table to standard output
  std::string vtk_path;  ///< empty skips the export
  int vtk_refine = 2;    ///< (2^r)^2 quads per knot span
};

/// Throws InvalidArgument naming the first offending field.
void validate(const RunConfig& config, Command command);

/// One line of the fixed CSV schema. Unused numeric fields hold NaN and are
/// written empty.
struct CsvRow {
  std::string geometry;
  int j = 0;
  int p = 0;
  double beta = std::numeric_limits<double>::quiet_NaN();
  double kappa = std::numeric_limits<double>::quiet_NaN();
  int k = 0;
  int khat = 0;
  std::string variant;
  long iterations = 0;
  double l2_error = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr const char* kCsvHeader = "geometry,j,p,beta,kappa,K,Khat,variant,iterations,l2_error,wall_seconds,seed";

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);

/// "0..5", "1..9:2" or "1,3,5".
std::vector<int> parse_int_range(const std::string& text);
/// "0.15,0.3,0.5" or "0.5..1.5:0.25".
std::vector<double> parse_real_range(const std::string& text);

/// Builtin geometry by name, otherwise a geometry file.
assembly::SurfacePtr open_geometry(const std::string& name_or_path);

/// Compact description of a plan, e.g. "improved:int1;sinc0.4@K45;sinc0.4@K45".
std::string describe_plan(const fractional::FractionalPlan& plan);

/// The model problem (kappa^2 - Laplace)^beta u = f with f = Y_{1,-1} on the
/// sphere (and its linear extension f = sqrt(3 / 4 pi) y elsewhere), whose
/// exact solution is known on the sphere.
class ModelProblem {
 public:
  ModelProblem(assembly::SurfacePtr surface, int level, int degree, double kappa,
               fractional::SolverOptions options = {});

  [[nodiscard]] const linalg::Hierarchy& hierarchy() const { return *hierarchy_; }
  [[nodiscard]] const assembly::DiscreteSpace& space() const { return hierarchy_->finest(); }
  [[nodiscard]] const SparseMatrix& mass() const { return pencil_->mass(); }
  [[nodiscard]] const SparseMatrix& stiffness() const { return stiffness_; }
  [[nodiscard]] const SparseMatrix& operator_a() const { return pencil_->operator_a(); }
  [[nodiscard]] const fractional::PencilSolver& solver() const { return *solver_; }
  [[nodiscard]] const Vector& load() const { return load_; }
  [[nodiscard]] double kappa() const noexcept { return kappa_; }
  [[nodiscard]] bool has_exact() const noexcept { return on_sphere_; }

  /// L2 distance to the exact solution for beta; NaN off the sphere.
  [[nodiscard]] double error(const Vector& u, double beta) const;

 private:
  std::shared_ptr<const linalg::Hierarchy> hierarchy_;
  std::shared_ptr<const linalg::PencilHierarchy> pencil_;
  SparseMatrix stiffness_;
  std::unique_ptr<fractional::PencilSolver> solver_;
  Vector load_;
  double kappa_;
  bool on_sphere_;
};

/// Plan for beta with K from the configuration or the default for (j, p).
fractional::FractionalPlan make_plan(double beta, bool improved, int quadrature, int level, int degree);

std::vector<CsvRow> run_solve(const RunConfig& config);
std::vector<CsvRow> run_sample(const RunConfig& config);
std::vector<CsvRow> run_precond_bench(const RunConfig& config);
std::vector<CsvRow> run_sinc_study(const RunConfig& config);
std::vector<CsvRow> run_sqrt_study(const RunConfig& config);

/// Validates, runs and writes the CSV (and VTK where requested). Returns the
/// rows written.
std::vector<CsvRow> execute(Command command, const RunConfig& config);

}  // namespace igagrf::cli
