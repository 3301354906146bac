#include "igagrf/geometry.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "igagrf/error.hpp"
#include "igagrf/quadrature.hpp"

namespace igagrf::geometry {

namespace {

constexpr double kMatchTolerance = 1e-10;
constexpr int kEdgeSamples = 17;

void check_reference_point(const Vec2& xhat) {
  if (!(xhat.x() >= 0.0 && xhat.x() <= 1.0 && xhat.y() >= 0.0 && xhat.y() <= 1.0))
    throw Error(ErrorKind::Domain, "reference point outside [0,1]^2");
}

}  // namespace

NurbsPatch::NurbsPatch(splines::KnotVector u, splines::KnotVector v, std::vector<Vec3> control_points,
                       std::vector<double> weights)
    : u_(std::move(u)), v_(std::move(v)), points_(std::move(control_points)), weights_(std::move(weights)) {
  const auto expected = static_cast<std::size_t>(u_.size()) * static_cast<std::size_t>(v_.size());
  if (points_.size() != expected || weights_.size() != expected)
    throw Error(ErrorKind::InvalidArgument, "control net does not match the knot vectors");
  for (double w : weights_) {
    if (!(w > 0.0)) throw Error(ErrorKind::InvalidArgument, "NURBS weights must be positive");
  }
}

PatchEval NurbsPatch::eval(const Vec2& xhat) const {
  check_reference_point(xhat);
  const auto bu = splines::eval_basis(u_, xhat.x(), std::min(1, u_.degree()));
  const auto bv = splines::eval_basis(v_, xhat.y(), std::min(1, v_.degree()));
  const bool du = u_.degree() > 0;
  const bool dv = v_.degree() > 0;
  Vec3 num = Vec3::Zero(), num_u = Vec3::Zero(), num_v = Vec3::Zero();
  double den = 0.0, den_u = 0.0, den_v = 0.0;
  const int kv = v_.size();
  for (int a = 0; a < bu.count(); ++a) {
    for (int b = 0; b < bv.count(); ++b) {
      const auto idx = static_cast<std::size_t>((bu.first + a) * kv + bv.first + b);
      const double w = weights_[idx];
      const double n0 = bu(0, a) * bv(0, b) * w;
      const double nu = du ? bu(1, a) * bv(0, b) * w : 0.0;
      const double nv = dv ? bu(0, a) * bv(1, b) * w : 0.0;
      num += n0 * points_[idx];
      num_u += nu * points_[idx];
      num_v += nv * points_[idx];
      den += n0;
      den_u += nu;
      den_v += nv;
    }
  }
  PatchEval out;
  out.point = num / den;
  out.jacobian.col(0) = (num_u - den_u * out.point) / den;
  out.jacobian.col(1) = (num_v - den_v * out.point) / den;
  return out;
}

AnalyticPatch::AnalyticPatch(Map map, Derivative derivative)
    : map_(std::move(map)), derivative_(std::move(derivative)) {
  const double h = 1e-6;
  for (int i = 0; i <= 4; ++i) {
    for (int k = 0; k <= 4; ++k) {
      const Vec2 x(0.1 + 0.2 * i, 0.1 + 0.2 * k);
      const Jacobian jac = derivative_(x);
      const Vec3 dx = (map_(x + Vec2(h, 0)) - map_(x - Vec2(h, 0))) / (2 * h);
      const Vec3 dy = (map_(x + Vec2(0, h)) - map_(x - Vec2(0, h))) / (2 * h);
      const double scale = std::max(1.0, jac.norm());
      if ((dx - jac.col(0)).norm() > 1e-6 * scale || (dy - jac.col(1)).norm() > 1e-6 * scale)
        throw Error(ErrorKind::InvalidArgument, "analytic patch derivative inconsistent with its map");
    }
  }
}

PatchEval AnalyticPatch::eval(const Vec2& xhat) const {
  check_reference_point(xhat);
  return {map_(xhat), derivative_(xhat)};
}

PatchEval eval_patch(const Patch& patch, const Vec2& xhat) { return patch.eval(xhat); }

Mat2 first_fundamental(const Jacobian& jacobian) {
  const Mat2 k = jacobian.transpose() * jacobian;
  const double det = k.determinant();
  if (!(det > 1e-14 * k.trace() * k.trace()))
    throw Error(ErrorKind::SingularGeometry, "patch Jacobian is rank deficient");
  return k;
}

Mat2 first_fundamental(const Patch& patch, const Vec2& xhat) {
  return first_fundamental(patch.eval(xhat).jacobian);
}

double surface_measure(const Jacobian& jacobian) {
  const double a = jacobian.col(0).cross(jacobian.col(1)).norm();
  if (!(a > 0.0)) throw Error(ErrorKind::SingularGeometry, "vanishing surface measure");
  return a;
}

double surface_measure(const Patch& patch, const Vec2& xhat) { return surface_measure(patch.eval(xhat).jacobian); }

Vec2 edge_point(int edge, double s) {
  switch (edge) {
    case 0: return {s, 0.0};
    case 1: return {1.0, s};
    case 2: return {s, 1.0};
    case 3: return {0.0, s};
    default: throw Error(ErrorKind::InvalidArgument, "edge index must be 0..3");
  }
}

namespace {

struct EdgeSamples {
  std::array<Vec3, kEdgeSamples> points;
};

bool samples_match(const EdgeSamples& a, const EdgeSamples& b, bool reversed) {
  for (int i = 0; i < kEdgeSamples; ++i) {
    const Vec3& q = reversed ? b.points[kEdgeSamples - 1 - i] : b.points[i];
    if ((a.points[i] - q).norm() > kMatchTolerance) return false;
  }
  return true;
}

const splines::KnotVector& edge_knots(const NurbsPatch& patch, int edge) {
  return (edge == 0 || edge == 2) ? patch.knots_u() : patch.knots_v();
}

bool same_edge_space(const NurbsPatch& a, int ea, const NurbsPatch& b, int eb, bool reversed) {
  const auto& ka = edge_knots(a, ea);
  const auto& kb = edge_knots(b, eb);
  if (ka.degree() != kb.degree() || ka.knots().size() != kb.knots().size()) return false;
  const std::size_t n = ka.knots().size();
  for (std::size_t i = 0; i < n; ++i) {
    const double other = reversed ? 1.0 - kb[n - 1 - i] : kb[i];
    if (std::abs(ka[i] - other) > 1e-12) return false;
  }
  return true;
}

}  // namespace

MultipatchSurface::MultipatchSurface(std::vector<PatchPtr> patches, std::string name)
    : patches_(std::move(patches)), name_(std::move(name)) {
  if (patches_.empty()) throw Error(ErrorKind::InvalidArgument, "surface without patches");
  const int n = num_patches();
  std::vector<EdgeSamples> edges(static_cast<std::size_t>(4 * n));
  for (int m = 0; m < n; ++m) {
    for (int e = 0; e < 4; ++e) {
      for (int i = 0; i < kEdgeSamples; ++i) {
        edges[static_cast<std::size_t>(4 * m + e)].points[i] =
            patches_[m]->eval(edge_point(e, static_cast<double>(i) / (kEdgeSamples - 1))).point;
      }
    }
  }

  std::vector<bool> matched(edges.size(), false);
  for (std::size_t a = 0; a < edges.size(); ++a) {
    if (matched[a]) continue;
    const auto& ea = edges[a];
    int found = -1;
    bool found_reversed = false;
    int full_matches = 0;
    bool endpoint_candidate = false;
    for (std::size_t b = a + 1; b < edges.size(); ++b) {
      if (matched[b]) continue;
      const auto& eb = edges[b];
      for (bool reversed : {false, true}) {
        const Vec3& b0 = reversed ? eb.points.back() : eb.points.front();
        const Vec3& b1 = reversed ? eb.points.front() : eb.points.back();
        if ((ea.points.front() - b0).norm() > kMatchTolerance || (ea.points.back() - b1).norm() > kMatchTolerance)
          continue;
        endpoint_candidate = true;
        if (samples_match(ea, eb, reversed)) {
          ++full_matches;
          found = static_cast<int>(b);
          found_reversed = reversed;
          break;
        }
      }
    }
    const int pa = static_cast<int>(a / 4), sa = static_cast<int>(a % 4);
    if (found < 0) {
      if (endpoint_candidate)
        throw Error(ErrorKind::IncompatibleInterface, "edge " + std::to_string(sa) + " of patch " +
                                                          std::to_string(pa) +
                                                          " shares its corners with another edge but the curves differ");
      throw Error(ErrorKind::OpenSurface,
                  "edge " + std::to_string(sa) + " of patch " + std::to_string(pa) + " has no matching edge");
    }
    if (full_matches > 1)
      throw Error(ErrorKind::IncompatibleInterface,
                  "edge " + std::to_string(sa) + " of patch " + std::to_string(pa) + " matches several edges");
    const int pb = found / 4, sb = found % 4;
    const auto* na = dynamic_cast<const NurbsPatch*>(patches_[pa].get());
    const auto* nb = dynamic_cast<const NurbsPatch*>(patches_[pb].get());
    if (na != nullptr && nb != nullptr && !same_edge_space(*na, sa, *nb, sb, found_reversed))
      throw Error(ErrorKind::IncompatibleInterface, "patches " + std::to_string(pa) + " and " + std::to_string(pb) +
                                                        " use different degrees or knots along their interface");
    matched[a] = true;
    matched[static_cast<std::size_t>(found)] = true;
    interfaces_.push_back({pa, sa, pb, sb, found_reversed});
  }

  std::vector<Vec3> corners;
  for (const auto& e : edges) {
    for (const Vec3& c : {e.points.front(), e.points.back()}) {
      bool seen = false;
      for (const Vec3& q : corners) seen = seen || (q - c).norm() <= kMatchTolerance;
      if (!seen) corners.push_back(c);
    }
  }
  num_vertices_ = static_cast<int>(corners.size());
}

double MultipatchSurface::area(int gauss_points, int subdivisions) const {
  if (subdivisions < 1) throw Error(ErrorKind::InvalidArgument, "subdivisions must be positive");
  const GaussRule rule = gauss_legendre(gauss_points);
  const double h = 1.0 / subdivisions;
  double total = 0.0;
  for (const auto& patch : patches_) {
    for (int cx = 0; cx < subdivisions; ++cx) {
      for (int cy = 0; cy < subdivisions; ++cy) {
        for (int i = 0; i < rule.size(); ++i) {
          for (int k = 0; k < rule.size(); ++k) {
            const Vec2 x((cx + rule.points[i]) * h, (cy + rule.points[k]) * h);
            total += rule.weights[i] * rule.weights[k] * h * h * surface_measure(*patch, x);
          }
        }
      }
    }
  }
  return total;
}

namespace {

std::shared_ptr<AnalyticPatch> cube_face_patch(const Vec3& center, const Vec3& e1, const Vec3& e2) {
  auto cube = [=](const Vec2& x) -> Vec3 { return center + (2 * x.x() - 1) * e1 + (2 * x.y() - 1) * e2; };
  auto map = [=](const Vec2& x) -> Vec3 { return cube(x).normalized(); };
  auto derivative = [=](const Vec2& x) -> Jacobian {
    const Vec3 q = cube(x);
    const double r = q.norm();
    const Vec3 f = q / r;
    const Eigen::Matrix3d proj = (Eigen::Matrix3d::Identity() - f * f.transpose()) / r;
    Jacobian jac;
    jac.col(0) = proj * (2 * e1);
    jac.col(1) = proj * (2 * e2);
    return jac;
  };
  return std::make_shared<AnalyticPatch>(map, derivative);
}

}  // namespace

MultipatchSurface builtin_sphere() {
  const Vec3 ex = Vec3::UnitX(), ey = Vec3::UnitY(), ez = Vec3::UnitZ();
  std::vector<PatchPtr> patches{
      cube_face_patch(ex, ey, ez),  cube_face_patch(-ex, ez, ey), cube_face_patch(ey, ez, ex),
      cube_face_patch(-ey, ex, ez), cube_face_patch(ez, ex, ey),  cube_face_patch(-ez, ey, ex),
  };
  return MultipatchSurface(std::move(patches), "sphere");
}

MultipatchSurface builtin_torus(double major, double minor) {
  if (!(major > minor && minor > 0.0)) throw Error(ErrorKind::InvalidArgument, "torus radii must satisfy R > r > 0");
  constexpr int kLayout = 3;
  const double step = 2.0 * std::numbers::pi / kLayout;
  std::vector<PatchPtr> patches;
  for (int a = 0; a < kLayout; ++a) {
    for (int b = 0; b < kLayout; ++b) {
      auto map = [=](const Vec2& x) -> Vec3 {
        const double theta = step * (a + x.x());
        const double phi = step * (b + x.y());
        const double rho = major + minor * std::cos(phi);
        return {rho * std::cos(theta), rho * std::sin(theta), minor * std::sin(phi)};
      };
      auto derivative = [=](const Vec2& x) -> Jacobian {
        const double theta = step * (a + x.x());
        const double phi = step * (b + x.y());
        const double rho = major + minor * std::cos(phi);
        Jacobian jac;
        jac.col(0) = step * Vec3(-rho * std::sin(theta), rho * std::cos(theta), 0.0);
        jac.col(1) = step * Vec3(-minor * std::sin(phi) * std::cos(theta), -minor * std::sin(phi) * std::sin(theta),
                                 minor * std::cos(phi));
        return jac;
      };
      patches.push_back(std::make_shared<AnalyticPatch>(map, derivative));
    }
  }
  return MultipatchSurface(std::move(patches), "torus");
}

MultipatchSurface builtin(const std::string& name) {
  if (name == "sphere") return builtin_sphere();
  if (name == "torus") return builtin_torus();
  throw Error(ErrorKind::InvalidArgument, "unknown builtin geometry '" + name + "'");
}

std::shared_ptr<NurbsPatch> bilinear_patch(const Vec3& c00, const Vec3& c10, const Vec3& c01, const Vec3& c11) {
  const splines::KnotVector lin(1, {0, 0, 1, 1});
  // l2 runs fastest: (l1, l2) = (0,0), (0,1), (1,0), (1,1)
  return std::make_shared<NurbsPatch>(lin, lin, std::vector<Vec3>{c00, c01, c10, c11},
                                      std::vector<double>(4, 1.0));
}

}  // namespace igagrf::geometry
