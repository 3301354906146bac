#pragma once

// Negative fractional powers of the pencil (A, M), A = kappa^2 M + S:
// successive integer solves, sinc quadrature of the Balakrishnan integral for
// exponents in (0,1), and the splitting of beta into stages.

#include <memory>
#include <vector>

#include "igagrf/linalg.hpp"
#include "igagrf/types.hpp"

namespace igagrf::fractional {

struct Stage {
  enum class Kind { Integer, Sinc };
  Kind kind = Kind::Integer;
  int solves = 0;         ///< Integer: number of chained solves
  double exponent = 0.0;  ///< Integer: solves; Sinc: beta* in (0,1)
  int quadrature = 0;     ///< Sinc: K, giving 2K + 1 shifted solves
};

struct FractionalPlan {
  double beta = 0.0;
  bool improved = false;  ///< splitting requested by the caller
  std::vector<Stage> stages;
  /// Improved splitting was requested but beta < 1/3 leaves no integer solve
  /// to borrow from; the plain plan is used instead.
  bool fallback = false;

  [[nodiscard]] double exponent_sum() const;
  /// Linear systems solved when executing the plan.
  [[nodiscard]] int total_solves() const;
  /// Sets K on every sinc stage.
  void set_quadrature(int k);
};

/// Plain: floor(beta) integer solves and one sinc stage for the remainder.
/// Improved: remainders below 1/3 borrow one integer solve and become two
/// sinc stages of (beta' + 1)/2; remainders above 2/3 become two sinc stages
/// of beta'/2. Sinc stages get quadrature K (0 leaves it unset).
FractionalPlan split_beta(double beta, bool improved, int quadrature = 0);

/// K such that exp(-2 min(b, 1-b) sqrt(K)) <= 2^{-j(p+1)} for the sinc
/// exponent b.
int default_quadrature(double sinc_exponent, int level, int degree);

struct SolverOptions {
  double tolerance = 1e-12;
  int max_iterations = 10000;
  linalg::Smoother smoother = linalg::Smoother::Ssor;
};

struct SolveStats {
  int solves = 0;
  long iterations = 0;
  double seconds = 0.0;
};

/// Solves shifted systems (alpha M + gamma A) x = b by PCG, with the BPX
/// preconditioner of the shifted operator when a hierarchy is given and
/// Jacobi otherwise.
class PencilSolver {
 public:
  PencilSolver(SparseMatrix mass, SparseMatrix operator_a, SolverOptions options = {});
  PencilSolver(std::shared_ptr<const linalg::PencilHierarchy> hierarchy, SolverOptions options = {});

  [[nodiscard]] const SparseMatrix& mass() const;
  [[nodiscard]] const SparseMatrix& operator_a() const;
  [[nodiscard]] int size() const { return static_cast<int>(mass().rows()); }
  [[nodiscard]] const SolverOptions& options() const noexcept { return options_; }

  Vector solve(double alpha, double gamma, const Vector& rhs, SolveStats* stats = nullptr) const;

 private:
  SparseMatrix mass_;
  SparseMatrix a_;
  std::shared_ptr<const linalg::PencilHierarchy> hierarchy_;
  SolverOptions options_;
};

/// w_1 = A^{-1} f, w_k = A^{-1} M w_{k-1}; returns w_n.
Vector solve_integer(const PencilSolver& solver, const Vector& f, int n, SolveStats* stats = nullptr);

/// u_K = (2 sin(pi b) / (pi sqrt(K))) sum_{k=-K..K} e^{2 b t_k} (M + e^{2 t_k} A)^{-1} f
/// with t_k = k / sqrt(K).
Vector sinc_apply(const PencilSolver& solver, const Vector& f, double beta, int k, SolveStats* stats = nullptr);

/// Runs the stages in order; each stage after the first receives M times the
/// previous result as right-hand side.
Vector solve_fractional(const PencilSolver& solver, const Vector& f, const FractionalPlan& plan,
                        SolveStats* stats = nullptr);

}  // namespace igagrf::fractional
