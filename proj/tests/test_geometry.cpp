#include <cmath>
#include <numbers>
#include <random>
#include <algorithm>
#include <iostream>
#include <sstream>

#include "doctest.h"
#include "igagrf/error.hpp"
#include "igagrf/geometry.hpp"

using namespace igagrf;
using namespace igagrf::geometry;

namespace {

std::shared_ptr<NurbsPatch> unit_square() {
  return bilinear_patch({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0});
}

std::vector<PatchPtr> cube_faces(double s = 1.0) {
  auto v = [&](int i, int j, int k) { return Vec3(i ? s : -s, j ? s : -s, k ? s : -s); };
  return {
      bilinear_patch(v(0, 0, 0), v(1, 0, 0), v(0, 1, 0), v(1, 1, 0)),
      bilinear_patch(v(0, 0, 1), v(1, 0, 1), v(0, 1, 1), v(1, 1, 1)),
      bilinear_patch(v(0, 0, 0), v(1, 0, 0), v(0, 0, 1), v(1, 0, 1)),
      bilinear_patch(v(0, 1, 0), v(1, 1, 0), v(0, 1, 1), v(1, 1, 1)),
      bilinear_patch(v(0, 0, 0), v(0, 1, 0), v(0, 0, 1), v(0, 1, 1)),
      bilinear_patch(v(1, 0, 0), v(1, 1, 0), v(1, 0, 1), v(1, 1, 1)),
  };
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("flat unit square patch") {
  const auto sq = unit_square();
  const auto ev = eval_patch(*sq, Vec2(0.3, 0.8));
  CHECK((ev.point - Vec3(0.3, 0.8, 0.0)).norm() < 1e-15);
  Jacobian expected;
  expected << 1, 0, 0, 1, 0, 0;
  CHECK((ev.jacobian - expected).norm() < 1e-15);
  CHECK((first_fundamental(*sq, Vec2(0.5, 0.5)) - Mat2::Identity()).norm() < 1e-15);
  CHECK(surface_measure(*sq, Vec2(0.1, 0.9)) == doctest::Approx(1.0));
  CHECK(kind_of([&] { (void)sq->eval(Vec2(1.5, 0.0)); }) == ErrorKind::Domain);
}

TEST_CASE("scaled patch fundamental tensor") {
  const AnalyticPatch scaled([](const Vec2& x) { return Vec3(2 * x.x(), x.y(), 0.0); },
                             [](const Vec2&) {
                               Jacobian j;
                               j << 2, 0, 0, 1, 0, 0;
                               return j;
                             });
  const Mat2 k = first_fundamental(scaled, Vec2(0.2, 0.4));
  CHECK(k(0, 0) == 4.0);
  CHECK(k(1, 1) == 1.0);
  CHECK(k(0, 1) == 0.0);
  CHECK(surface_measure(scaled, Vec2(0.2, 0.4)) == doctest::Approx(2.0));
}

TEST_CASE("analytic patch derivative check and singular geometry") {
  CHECK(kind_of([] {
          AnalyticPatch bad([](const Vec2& x) { return Vec3(x.x(), x.y(), 0.0); },
                            [](const Vec2&) { return Jacobian::Zero().eval(); });
        }) == ErrorKind::InvalidArgument);
  const AnalyticPatch degenerate([](const Vec2& x) { return Vec3(x.x(), x.x(), 0.0); },
                                 [](const Vec2&) {
                                   Jacobian j;
                                   j << 1, 0, 1, 0, 0, 0;
                                   return j;
                                 });
  CHECK(kind_of([&] { first_fundamental(degenerate, Vec2(0.5, 0.5)); }) == ErrorKind::SingularGeometry);
  CHECK(kind_of([&] { surface_measure(degenerate, Vec2(0.5, 0.5)); }) == ErrorKind::SingularGeometry);
}

TEST_CASE("NURBS quarter circle") {
  // degree 2 in u (quarter arc), degree 1 in v (extrusion along z)
  const splines::KnotVector arc(2, {0, 0, 0, 1, 1, 1});
  const splines::KnotVector lin(1, {0, 0, 1, 1});
  const double w = 1.0 / std::sqrt(2.0);
  std::vector<Vec3> pts{{1, 0, 0}, {1, 0, 1}, {1, 1, 0}, {1, 1, 1}, {0, 1, 0}, {0, 1, 1}};
  std::vector<double> weights{1, 1, w, w, 1, 1};
  const NurbsPatch patch(arc, lin, pts, weights);

  // brute-force rational sum over all Bernstein basis functions
  auto brute = [&](double u, double v) {
    const double bu[3] = {(1 - u) * (1 - u), 2 * u * (1 - u), u * u};
    const double bv[2] = {1 - v, v};
    Vec3 num = Vec3::Zero();
    double den = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 2; ++b) {
        num += bu[a] * bv[b] * weights[2 * a + b] * pts[2 * a + b];
        den += bu[a] * bv[b] * weights[2 * a + b];
      }
    return Vec3(num / den);
  };
  const Vec3 mid = patch.eval(Vec2(0.5, 0.3)).point;
  CHECK((mid - brute(0.5, 0.3)).norm() < 1e-15);
  CHECK(std::hypot(mid.x(), mid.y()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mid.x() == doctest::Approx(w));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 50; ++s) {
    const Vec2 x(u(rng), u(rng));
    const auto ev = patch.eval(x);
    CHECK((ev.point - brute(x.x(), x.y())).norm() < 1e-14);
    CHECK(std::hypot(ev.point.x(), ev.point.y()) == doctest::Approx(1.0).epsilon(1e-14));
    // quotient-rule Jacobian against central differences of the brute-force map
    const double h = 1e-6;
    const Vec2 xc(std::clamp(x.x(), h, 1 - h), std::clamp(x.y(), h, 1 - h));
    const auto evc = patch.eval(xc);
    const Vec3 dx = (brute(xc.x() + h, xc.y()) - brute(xc.x() - h, xc.y())) / (2 * h);
    const Vec3 dy = (brute(xc.x(), xc.y() + h) - brute(xc.x(), xc.y() - h)) / (2 * h);
    CHECK((evc.jacobian.col(0) - dx).norm() < 1e-8);
    CHECK((evc.jacobian.col(1) - dy).norm() < 1e-8);
  }
}

TEST_CASE("NURBS patch validation") {
  const splines::KnotVector lin(1, {0, 0, 1, 1});
  CHECK(kind_of([&] { NurbsPatch(lin, lin, std::vector<Vec3>(3), std::vector<double>(3, 1.0)); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { NurbsPatch(lin, lin, std::vector<Vec3>(4), {1, 1, 0, 1}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("builtin sphere") {
  const auto sphere = builtin_sphere();
  CHECK(sphere.num_patches() == 6);
  CHECK(sphere.interfaces().size() == 12);
  CHECK(sphere.num_vertices() == 8);
  CHECK(sphere.euler_characteristic() == 2);
  CHECK(std::abs(sphere.area(12, 2) - 4 * std::numbers::pi) < 1e-10);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int m = 0; m < 6; ++m) {
    for (int s = 0; s < 100; ++s) {
      const Vec2 x(u(rng), u(rng));
      const auto ev = sphere.patch(m).eval(x);
      CHECK(std::abs(ev.point.norm() - 1.0) <= 1e-14);
      // random Jacobian: fundamental tensor entries are explicit dot products
      const Mat2 k = first_fundamental(sphere.patch(m), x);
      CHECK(k(0, 0) == doctest::Approx(ev.jacobian.col(0).dot(ev.jacobian.col(0))).epsilon(1e-15));
      CHECK(k(0, 1) == doctest::Approx(ev.jacobian.col(0).dot(ev.jacobian.col(1))).epsilon(1e-15));
      CHECK(k(1, 1) == doctest::Approx(ev.jacobian.col(1).dot(ev.jacobian.col(1))).epsilon(1e-15));
      // both measure formulas agree
      CHECK(std::abs(surface_measure(ev.jacobian) - std::sqrt(k.determinant())) <= 1e-12 * surface_measure(ev.jacobian));
      // tangent vectors are orthogonal to the normal
      CHECK(std::abs(ev.jacobian.col(0).dot(ev.point)) < 1e-14);
    }
  }
}

TEST_CASE("interfaces agree pointwise") {
  for (const auto& surface : {builtin_sphere(), builtin_torus(), load_geometry(IGAGRF_DATA_DIR "/drilled_cube.geo")}) {
    for (const auto& itf : surface.interfaces()) {
      for (int i = 0; i <= 16; ++i) {
        const double s = i / 16.0;
        const Vec3 a = surface.patch(itf.patch_a).eval(edge_point(itf.edge_a, s)).point;
        const Vec3 b = surface.patch(itf.patch_b).eval(edge_point(itf.edge_b, itf.reversed ? 1 - s : s)).point;
        CHECK((a - b).norm() <= 1e-10);
      }
    }
  }
}

TEST_CASE("builtin torus") {
  const auto torus = builtin("torus");
  CHECK(torus.num_patches() == 9);
  CHECK(torus.interfaces().size() == 18);
  CHECK(torus.num_vertices() == 9);
  CHECK(torus.euler_characteristic() == 0);
  // area 4 pi^2 R r
  CHECK(torus.area(16) == doctest::Approx(4 * std::numbers::pi * std::numbers::pi * 2.0).epsilon(1e-10));
  CHECK(kind_of([] { builtin("klein"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("cylinder patch measure") {
  const double r = 1.5, alpha = 0.8, len = 2.0;
  const AnalyticPatch cyl(
      [=](const Vec2& x) { return Vec3(r * std::cos(alpha * x.x()), r * std::sin(alpha * x.x()), len * x.y()); },
      [=](const Vec2& x) {
        Jacobian j;
        j.col(0) = Vec3(-r * alpha * std::sin(alpha * x.x()), r * alpha * std::cos(alpha * x.x()), 0.0);
        j.col(1) = Vec3(0, 0, len);
        return j;
      });
  for (double x : {0.0, 0.3, 1.0}) CHECK(surface_measure(cyl, Vec2(x, 0.5)) == doctest::Approx(r * alpha * len));
}

TEST_CASE("closed-surface checks") {
  auto faces = cube_faces();
  const MultipatchSurface cube(faces);
  CHECK(cube.euler_characteristic() == 2);
  CHECK(cube.area(2, 1) == doctest::Approx(24.0));

  auto open = faces;
  open.pop_back();
  CHECK(kind_of([&] { MultipatchSurface s(open); }) == ErrorKind::OpenSurface);

  // same geometry on the last face, but with an extra knot along one direction
  const splines::KnotVector lin(1, {0, 0, 1, 1});
  const splines::KnotVector refined(1, {0, 0, 0.5, 1, 1});
  const Vec3 a(1, -1, -1), b(1, 1, -1), c(1, -1, 1), d(1, 1, 1);
  auto refined_face = std::make_shared<NurbsPatch>(
      refined, lin, std::vector<Vec3>{a, c, 0.5 * (a + b), 0.5 * (c + d), b, d}, std::vector<double>(6, 1.0));
  auto mismatched = faces;
  mismatched.back() = refined_face;
  CHECK(kind_of([&] { MultipatchSurface s(mismatched); }) == ErrorKind::IncompatibleInterface);

  // a bulged face shares corners but not edges
  auto bulged = faces;
  bulged.back() = std::make_shared<AnalyticPatch>(
      [](const Vec2& x) { return Vec3(1.0 + 0.1 * x.x() * (1 - x.x()), 2 * x.x() - 1, 2 * x.y() - 1); },
      [](const Vec2& x) {
        Jacobian j;
        j << 0.1 * (1 - 2 * x.x()), 0, 2, 0, 0, 2;
        return j;
      });
  CHECK(kind_of([&] { MultipatchSurface s(bulged); }) == ErrorKind::IncompatibleInterface);
}

TEST_CASE("geometry file round trip") {
  const auto cube = load_geometry(IGAGRF_DATA_DIR "/drilled_cube.geo");
  CHECK(cube.num_patches() == 16);
  CHECK(cube.euler_characteristic() == 0);

  std::stringstream buffer;
  write_geometry(buffer, cube);
  const auto again = read_geometry(buffer);
  REQUIRE(again.num_patches() == cube.num_patches());
  for (int m = 0; m < cube.num_patches(); ++m) {
    const auto& a = dynamic_cast<const NurbsPatch&>(cube.patch(m));
    const auto& b = dynamic_cast<const NurbsPatch&>(again.patch(m));
    CHECK(a.knots_u() == b.knots_u());
    CHECK(a.knots_v() == b.knots_v());
    CHECK(a.weights() == b.weights());
    for (std::size_t i = 0; i < a.control_points().size(); ++i) CHECK(a.control_points()[i] == b.control_points()[i]);
  }

  // irrational coordinates survive the text format bit-exactly
  const double w = 1.0 / std::sqrt(3.0);
  const MultipatchSurface scaled(cube_faces(w));
  std::stringstream out;
  write_geometry(out, scaled);
  const auto back = read_geometry(out);
  for (int m = 0; m < 6; ++m) {
    const auto& a = dynamic_cast<const NurbsPatch&>(scaled.patch(m)).control_points();
    const auto& b = dynamic_cast<const NurbsPatch&>(back.patch(m)).control_points();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }

  CHECK(kind_of([] { std::ostringstream sink; write_geometry(sink, builtin_sphere()); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { load_geometry("/nonexistent/file.geo"); }) == ErrorKind::Io);
  std::stringstream garbage("multipatch 1\npatch 1 1 two 2\n");
  CHECK(kind_of([&] { read_geometry(garbage); }) == ErrorKind::Parse);
  std::stringstream truncated("multipatch 1\npatch 1 1 2 2\n0 0 1 1\n");
  CHECK(kind_of([&] { read_geometry(truncated); }) == ErrorKind::Parse);
}
