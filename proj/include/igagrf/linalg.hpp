#pragma once

// Conjugate gradients, the BPX additive multilevel preconditioner over the
// dyadic space hierarchy, and spectral bounds by (inverse) power iteration.

#include <memory>
#include <vector>

#include "igagrf/assembly.hpp"
#include "igagrf/types.hpp"

namespace igagrf::linalg {

/// Symmetric linear map used as a preconditioner.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  [[nodiscard]] virtual int size() const = 0;
  virtual void apply(const Vector& in, Vector& out) const = 0;
};

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(int n) : n_(n) {}
  [[nodiscard]] int size() const override { return n_; }
  void apply(const Vector& in, Vector& out) const override { out = in; }

 private:
  int n_;
};

struct SolveReport {
  int iterations = 0;
  /// Relative preconditioned residual sqrt(r^T C r / b^T C b) at exit; this
  /// is the quantity compared against the tolerance.
  double residual = 0.0;
  /// Relative Euclidean residual ||b - A x|| / ||b|| at exit.
  double true_residual = 0.0;
  double seconds = 0.0;
};

struct CgOptions {
  double tolerance = 1e-12;
  int max_iterations = 10000;
};

struct CgResult {
  Vector x;
  SolveReport report;
};

/// Preconditioned conjugate gradients from the zero initial guess. Throws
/// IndefiniteOperator if a curvature p^T A p (or r^T C r) is not positive and
/// MaxIterations if the tolerance is not reached.
CgResult cg(const SparseMatrix& a, const Vector& b, const CgOptions& options = {},
            const LinearOperator* preconditioner = nullptr);

/// Spaces of levels 0..j on one surface and the glued prolongations between
/// consecutive levels.
class Hierarchy {
 public:
  Hierarchy(assembly::SurfacePtr surface, int level, int degree);

  [[nodiscard]] int finest_level() const noexcept { return static_cast<int>(spaces_.size()) - 1; }
  [[nodiscard]] int degree() const noexcept { return spaces_.front().degree(); }
  [[nodiscard]] const assembly::DiscreteSpace& space(int level) const { return spaces_.at(static_cast<std::size_t>(level)); }
  [[nodiscard]] const assembly::DiscreteSpace& finest() const { return spaces_.back(); }
  /// Coefficient map from level l to level l + 1.
  [[nodiscard]] const SparseMatrix& prolongation(int level) const {
    return prolongations_.at(static_cast<std::size_t>(level));
  }

  /// Galerkin operators A_l = P_l^T A_{l+1} P_l for all levels, finest last.
  [[nodiscard]] std::vector<SparseMatrix> coarsen(const SparseMatrix& finest) const;

 private:
  std::vector<assembly::DiscreteSpace> spaces_;
  std::vector<SparseMatrix> prolongations_;
};

enum class Smoother { Diagonal, Ssor };

/// BPX preconditioner C v = sum_l Pt_l G_l Pt_l^T v, where Pt_l prolongs from
/// level l to the finest level and G_l is the inverse diagonal of A_l or one
/// symmetric Gauss-Seidel sweep on A_l.
class Bpx final : public LinearOperator {
 public:
  /// levels[l] is the operator on level l; prolongations are taken from the
  /// hierarchy, which must outlive the preconditioner.
  Bpx(const Hierarchy& hierarchy, std::vector<SparseMatrix> levels, Smoother smoother);

  [[nodiscard]] int size() const override { return static_cast<int>(levels_.back().rows()); }
  void apply(const Vector& in, Vector& out) const override;
  [[nodiscard]] Smoother smoother() const noexcept { return smoother_; }

 private:
  void smooth(int level, const Vector& r, Vector& z) const;

  const Hierarchy* hierarchy_;
  std::vector<SparseMatrix> levels_;
  std::vector<Vector> inverse_diagonal_;
  Smoother smoother_;
};

/// Level operators of a matrix pencil (M, A) for preconditioning the shifted
/// systems alpha M + gamma A without recomputing Galerkin products.
class PencilHierarchy {
 public:
  PencilHierarchy(const Hierarchy& hierarchy, const SparseMatrix& mass, const SparseMatrix& operator_a);

  [[nodiscard]] const Hierarchy& hierarchy() const noexcept { return *hierarchy_; }
  [[nodiscard]] const SparseMatrix& mass() const { return mass_.back(); }
  [[nodiscard]] const SparseMatrix& operator_a() const { return a_.back(); }

  /// The finest-level matrix alpha M + gamma A.
  [[nodiscard]] SparseMatrix combine(double alpha, double gamma) const;
  /// BPX for alpha M + gamma A.
  [[nodiscard]] Bpx preconditioner(double alpha, double gamma, Smoother smoother) const;

 private:
  const Hierarchy* hierarchy_;
  std::vector<SparseMatrix> mass_;
  std::vector<SparseMatrix> a_;
};

struct SpectralBounds {
  double lambda_min = 0.0;  ///< inverse power estimate (from above)
  double lambda_max = 0.0;  ///< power estimate (from below)
  double lower = 0.0;       ///< 0.9 lambda_min
  double upper = 0.0;       ///< 1.1 lambda_max
};

/// Power iteration for the largest and CG-based inverse iteration for the
/// smallest eigenvalue of an SPD matrix, with safety factors 0.9 / 1.1.
SpectralBounds power_bounds(const SparseMatrix& m, int steps = 20);

}  // namespace igagrf::linalg
