#pragma once

// Globally continuous spline spaces on multipatch surfaces and Galerkin
// assembly by pull-back quadrature on the reference square.

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "igagrf/geometry.hpp"
#include "igagrf/splines.hpp"
#include "igagrf/types.hpp"

namespace igagrf::assembly {

using SurfacePtr = std::shared_ptr<const geometry::MultipatchSurface>;

/// A point on the surface together with its patch coordinates.
struct SurfacePoint {
  int patch = 0;
  Vec2 xhat;
  Vec3 point;
};

using SurfaceFunction = std::function<double(const SurfacePoint&)>;

/// Continuous spline space of degree p on the dyadic level j of every patch.
/// Patch-local functions (m, l1, l2) are glued by matching the images of
/// their Greville points.
class DiscreteSpace {
 public:
  DiscreteSpace(SurfacePtr surface, int level, int degree);

  [[nodiscard]] const geometry::MultipatchSurface& surface() const noexcept { return *surface_; }
  [[nodiscard]] const SurfacePtr& surface_ptr() const noexcept { return surface_; }
  [[nodiscard]] int level() const noexcept { return level_; }
  [[nodiscard]] int degree() const noexcept { return degree_; }
  [[nodiscard]] const splines::KnotVector& knots() const noexcept { return knots_; }
  /// Local functions per direction, 2^j + p.
  [[nodiscard]] int local_size() const noexcept { return local_size_; }
  /// Global dimension N.
  [[nodiscard]] int size() const noexcept { return size_; }
  /// Dimension of the patchwise (discontinuous) space, n (2^j + p)^2.
  [[nodiscard]] int broken_size() const noexcept { return surface_->num_patches() * local_size_ * local_size_; }

  [[nodiscard]] int global_index(int patch, int l1, int l2) const {
    return dof_map_[static_cast<std::size_t>((patch * local_size_ + l1) * local_size_ + l2)];
  }
  [[nodiscard]] std::span<const int> dof_map() const noexcept { return dof_map_; }

  /// Value of the field with the given coefficients at a patch point.
  [[nodiscard]] double evaluate(std::span<const double> coeffs, int patch, const Vec2& xhat) const;

 private:
  SurfacePtr surface_;
  int level_;
  int degree_;
  splines::KnotVector knots_;
  int local_size_;
  int size_ = 0;
  std::vector<int> dof_map_;
};

DiscreteSpace build_space(SurfacePtr surface, int level, int degree);

struct AssemblyOptions {
  /// Gauss points per direction and knot span; 0 selects p + 1.
  int quadrature_points = 0;
};

struct GalerkinSystem {
  SparseMatrix mass;
  SparseMatrix stiffness;
};

/// Mass and stiffness matrices in a single sweep over the elements.
GalerkinSystem assemble_system(const DiscreteSpace& space, const AssemblyOptions& options = {});
SparseMatrix assemble_mass(const DiscreteSpace& space, const AssemblyOptions& options = {});
SparseMatrix assemble_stiffness(const DiscreteSpace& space, const AssemblyOptions& options = {});

/// Load vector [<f, phi_i>]; uses the same quadrature as the matrices.
Vector assemble_load(const DiscreteSpace& space, const SurfaceFunction& f, const AssemblyOptions& options = {});

/// L2(Gamma) distance between the discrete field and f, with p + 3 Gauss
/// points per direction unless overridden.
double l2_error(const DiscreteSpace& space, std::span<const double> coeffs, const SurfaceFunction& f,
                int quadrature_points = 0);

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace igagrf::assembly
