#pragma once

// Patch parametrizations F_m : [0,1]^2 -> R^3 and closed multipatch surfaces.

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "igagrf/splines.hpp"
#include "igagrf/types.hpp"

namespace igagrf::geometry {

struct PatchEval {
  Vec3 point;
  Jacobian jacobian;
};

class Patch {
 public:
  virtual ~Patch() = default;
  [[nodiscard]] virtual PatchEval eval(const Vec2& xhat) const = 0;
};

using PatchPtr = std::shared_ptr<const Patch>;

/// Tensor-product NURBS patch. Control points are indexed (l1, l2) with l2
/// running fastest.
class NurbsPatch final : public Patch {
 public:
  NurbsPatch(splines::KnotVector u, splines::KnotVector v, std::vector<Vec3> control_points,
             std::vector<double> weights);

  [[nodiscard]] PatchEval eval(const Vec2& xhat) const override;

  [[nodiscard]] const splines::KnotVector& knots_u() const noexcept { return u_; }
  [[nodiscard]] const splines::KnotVector& knots_v() const noexcept { return v_; }
  [[nodiscard]] const std::vector<Vec3>& control_points() const noexcept { return points_; }
  [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  splines::KnotVector u_;
  splines::KnotVector v_;
  std::vector<Vec3> points_;
  std::vector<double> weights_;
};

/// Closed-form parametrization; the Jacobian is checked against central
/// differences on a sample grid at construction.
class AnalyticPatch final : public Patch {
 public:
  using Map = std::function<Vec3(const Vec2&)>;
  using Derivative = std::function<Jacobian(const Vec2&)>;

  AnalyticPatch(Map map, Derivative derivative);

  [[nodiscard]] PatchEval eval(const Vec2& xhat) const override;

 private:
  Map map_;
  Derivative derivative_;
};

PatchEval eval_patch(const Patch& patch, const Vec2& xhat);

/// First fundamental tensor (dF)^T dF; throws SingularGeometry if degenerate.
Mat2 first_fundamental(const Patch& patch, const Vec2& xhat);
Mat2 first_fundamental(const Jacobian& jacobian);

/// Surface measure |d_x F x d_y F|.
double surface_measure(const Patch& patch, const Vec2& xhat);
double surface_measure(const Jacobian& jacobian);

/// Edges of the reference square: 0 is y = 0, 1 is x = 1, 2 is y = 1, 3 is x = 0.
/// Each edge is parametrized by s in [0,1] along the increasing free coordinate.
Vec2 edge_point(int edge, double s);

struct Interface {
  int patch_a = 0;
  int edge_a = 0;
  int patch_b = 0;
  int edge_b = 0;
  bool reversed = false;  ///< edge_a(s) == edge_b(1 - s) when set
};

class MultipatchSurface {
 public:
  /// Infers interfaces geometrically and verifies the surface is closed.
  explicit MultipatchSurface(std::vector<PatchPtr> patches, std::string name = "custom");

  [[nodiscard]] int num_patches() const noexcept { return static_cast<int>(patches_.size()); }
  [[nodiscard]] const Patch& patch(int m) const { return *patches_[static_cast<std::size_t>(m)]; }
  [[nodiscard]] const std::vector<PatchPtr>& patches() const noexcept { return patches_; }
  [[nodiscard]] const std::vector<Interface>& interfaces() const noexcept { return interfaces_; }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }

  /// Number of distinct patch corners.
  [[nodiscard]] int num_vertices() const noexcept { return num_vertices_; }
  /// V - E + F of the patch adjacency complex.
  [[nodiscard]] int euler_characteristic() const noexcept {
    return num_vertices_ - static_cast<int>(interfaces_.size()) + num_patches();
  }

  /// Numerical surface area: each patch is split into subdivisions^2 cells
  /// with an n-point Gauss rule per direction on each.
  [[nodiscard]] double area(int gauss_points = 12, int subdivisions = 2) const;

 private:
  std::vector<PatchPtr> patches_;
  std::vector<Interface> interfaces_;
  std::string name_;
  int num_vertices_ = 0;
};

/// Unit sphere as six normalized cube faces.
MultipatchSurface builtin_sphere();
/// Torus with radii (major, minor) split into a 3 x 3 layout of patches.
MultipatchSurface builtin_torus(double major = 2.0, double minor = 1.0);
/// "sphere" or "torus".
MultipatchSurface builtin(const std::string& name);

/// Bilinear NURBS patch through four corners given in the order
/// (0,0), (1,0), (0,1), (1,1) of the reference square.
std::shared_ptr<NurbsPatch> bilinear_patch(const Vec3& c00, const Vec3& c10, const Vec3& c01,
                                           const Vec3& c11);

MultipatchSurface read_geometry(std::istream& in, std::string name = "file");
MultipatchSurface load_geometry(const std::string& path);
/// Only surfaces made of NURBS patches can be written.
void write_geometry(std::ostream& out, const MultipatchSurface& surface);
void save_geometry(const std::string& path, const MultipatchSurface& surface);

}  // namespace igagrf::geometry
