#pragma once

// Univariate B-spline bases on p-open knot vectors.

#include <cstddef>
#include <span>
#include <vector>

#include "igagrf/types.hpp"

namespace igagrf::splines {

/// p-open knot vector on [0, 1] with simple interior knots.
class KnotVector {
 public:
  KnotVector(int degree, std::vector<double> knots);

  /// Dyadic knot vector of the given refinement level: 0 and 1 repeated
  /// degree+1 times, interior knots k 2^-level.
  static KnotVector dyadic(int level, int degree);

  [[nodiscard]] int degree() const noexcept { return degree_; }
  [[nodiscard]] std::span<const double> knots() const noexcept { return knots_; }
  [[nodiscard]] double operator[](std::size_t i) const { return knots_[i]; }

  /// Number of basis functions (control points).
  [[nodiscard]] int size() const noexcept { return static_cast<int>(knots_.size()) - degree_ - 1; }
  /// Number of non-empty knot spans.
  [[nodiscard]] int num_spans() const noexcept { return size() - degree_; }
  /// Knot index of the left end of the e-th non-empty span.
  [[nodiscard]] int span_index(int e) const noexcept { return e + degree_; }

  /// Largest knot distance.
  [[nodiscard]] double mesh_size() const noexcept { return mesh_size_; }
  /// Quasi-uniformity constant: smallest non-empty span divided by the mesh size.
  [[nodiscard]] double theta() const noexcept { return theta_; }

  /// Knot average associated with basis function i.
  [[nodiscard]] double greville(int i) const;

  friend bool operator==(const KnotVector&, const KnotVector&) = default;

 private:
  int degree_;
  std::vector<double> knots_;
  double mesh_size_ = 0.0;
  double theta_ = 0.0;
};

struct DyadicKnots {
  int level = 0;
  int degree = 1;

  [[nodiscard]] KnotVector expand() const { return KnotVector::dyadic(level, degree); }
  [[nodiscard]] int basis_count() const noexcept { return (1 << level) + degree; }
};

/// Returns l with knots[l] <= x < knots[l+1]; x = 1 maps to the last non-empty span.
int find_span(const KnotVector& kv, double x);

/// Nonzero basis functions at a point together with derivatives.
struct BasisValues {
  int first = 0;   ///< global index of the first nonzero function
  int degree = 0;
  int max_order = 0;
  std::vector<double> data;  ///< (max_order+1) x (degree+1), row per derivative order

  [[nodiscard]] double operator()(int order, int r) const {
    return data[static_cast<std::size_t>(order * (degree + 1) + r)];
  }
  [[nodiscard]] int count() const noexcept { return degree + 1; }
};

/// Evaluates the degree+1 nonzero B-splines at x and their derivatives up to
/// order max_order (<= degree).
BasisValues eval_basis(const KnotVector& kv, double x, int max_order = 0);

/// Value of the full spline sum_l coeffs[l] b_l(x).
double eval_spline(const KnotVector& kv, std::span<const double> coeffs, double x);

/// Knot-insertion matrix T with (fine coefficients) = T (coarse coefficients);
/// the fine knot vector must contain the coarse one.
SparseMatrix insertion_matrix(const KnotVector& coarse, const KnotVector& fine);

/// Two-scale relation between dyadic levels j and j+1.
SparseMatrix prolongation_1d(int degree, int level);

}  // namespace igagrf::splines
