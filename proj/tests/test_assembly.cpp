#include <omp.h>

#include <Eigen/SparseCholesky>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "doctest.h"
#include "igagrf/assembly.hpp"
#include "igagrf/error.hpp"

using namespace igagrf;
using namespace igagrf::assembly;

namespace {

SurfacePtr sphere() {
  static const auto s = std::make_shared<const geometry::MultipatchSurface>(geometry::builtin_sphere());
  return s;
}

SurfacePtr torus() {
  static const auto s = std::make_shared<const geometry::MultipatchSurface>(geometry::builtin_torus());
  return s;
}

/// Axis-aligned cube [0,1]^3 made of six bilinear faces.
SurfacePtr unit_cube() {
  auto v = [](int i, int j, int k) { return Vec3(i, j, k); };
  using geometry::bilinear_patch;
  std::vector<geometry::PatchPtr> faces = {
      bilinear_patch(v(0, 0, 0), v(1, 0, 0), v(0, 1, 0), v(1, 1, 0)),
      bilinear_patch(v(0, 0, 1), v(1, 0, 1), v(0, 1, 1), v(1, 1, 1)),
      bilinear_patch(v(0, 0, 0), v(1, 0, 0), v(0, 0, 1), v(1, 0, 1)),
      bilinear_patch(v(0, 1, 0), v(1, 1, 0), v(0, 1, 1), v(1, 1, 1)),
      bilinear_patch(v(0, 0, 0), v(0, 1, 0), v(0, 0, 1), v(0, 1, 1)),
      bilinear_patch(v(1, 0, 0), v(1, 1, 0), v(1, 0, 1), v(1, 1, 1)),
  };
  return std::make_shared<const geometry::MultipatchSurface>(faces, "cube");
}

double y1m1(const SurfacePoint& x) { return std::sqrt(3.0 / (4.0 * std::numbers::pi)) * x.point.y(); }

Eigen::SparseMatrix<double> col_major(const SparseMatrix& a) { return Eigen::SparseMatrix<double>(a); }

double max_abs(const SparseMatrix& a) {
  double m = 0.0;
  for (int k = 0; k < a.nonZeros(); ++k) m = std::max(m, std::abs(a.valuePtr()[k]));
  return m;
}

/// Identification by comparing every pair of Greville anchors directly.
std::vector<int> brute_force_classes(const DiscreteSpace& space) {
  const int n = space.local_size();
  std::vector<Vec3> anchors;
  for (int m = 0; m < space.surface().num_patches(); ++m)
    for (int l1 = 0; l1 < n; ++l1)
      for (int l2 = 0; l2 < n; ++l2)
        anchors.push_back(space.surface().patch(m).eval(Vec2(space.knots().greville(l1), space.knots().greville(l2))).point);
  std::vector<int> cls(anchors.size(), -1);
  int next = 0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    for (std::size_t k = 0; k < i && cls[i] < 0; ++k)
      if ((anchors[i] - anchors[k]).norm() <= 1e-9) cls[i] = cls[k];
    if (cls[i] < 0) cls[i] = next++;
  }
  return cls;
}

Vector solve_spd(const SparseMatrix& a, const Vector& b) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(col_major(a));
  REQUIRE(ldlt.info() == Eigen::Success);
  return ldlt.solve(b);
}

}  // namespace

TEST_CASE("space dimension on sphere and torus at level 0") {
  CHECK(build_space(sphere(), 0, 1).size() == 8);
  CHECK(build_space(torus(), 0, 1).size() == 9);
  CHECK(build_space(sphere(), 0, 1).broken_size() == 24);
}

TEST_CASE("space identification matches brute-force anchor matching") {
  for (const auto& surf : {sphere(), torus()}) {
    for (int p = 1; p <= 3; ++p) {
      for (int j = 0; j <= 2; ++j) {
        const auto space = build_space(surf, j, p);
        const auto cls = brute_force_classes(space);
        const auto map = space.dof_map();
        REQUIRE(cls.size() == map.size());
        std::map<int, int> forward;
        std::map<int, int> backward;
        bool consistent = true;
        for (std::size_t i = 0; i < cls.size(); ++i) {
          const auto [f, fnew] = forward.emplace(map[i], cls[i]);
          const auto [b, bnew] = backward.emplace(cls[i], map[i]);
          consistent = consistent && f->second == cls[i] && b->second == map[i];
        }
        CHECK(consistent);
        CHECK(static_cast<int>(forward.size()) == space.size());
        CHECK(space.size() < space.broken_size());
        // Closed cube-like layout: every edge function shared by two patches,
        // every corner by three (sphere) or four (torus).
        if (surf == sphere()) CHECK(space.size() == 6 * (space.local_size() - 2) * (space.local_size() - 2) + 12 * (space.local_size() - 2) + 8);
        if (surf == torus()) CHECK(space.size() == 9 * (space.local_size() - 1) * (space.local_size() - 1));
      }
    }
  }
}

TEST_CASE("space rejects unsupported parameters") {
  auto kind = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  CHECK(kind([] { (void)build_space(sphere(), 0, 0); }) == ErrorKind::InvalidArgument);
  CHECK(kind([] { (void)build_space(sphere(), 0, 6); }) == ErrorKind::InvalidArgument);
  CHECK(kind([] { (void)build_space(sphere(), -1, 2); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("global basis is a partition of unity and continuous across interfaces") {
  const auto space = build_space(sphere(), 2, 3);
  const Vector ones = Vector::Ones(space.size());
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const int m = static_cast<int>(rng() % 6);
    CHECK(std::abs(space.evaluate(as_span(ones), m, Vec2(u(rng), u(rng))) - 1.0) <= 1e-12);
  }
  // A random field agrees at points shared by two patches.
  Vector c(space.size());
  for (int i = 0; i < c.size(); ++i) c(i) = u(rng);
  for (const auto& itf : space.surface().interfaces()) {
    for (double s : {0.0, 0.13, 0.5, 0.77, 1.0}) {
      const double t = itf.reversed ? 1.0 - s : s;
      const double va = space.evaluate(as_span(c), itf.patch_a, geometry::edge_point(itf.edge_a, s));
      const double vb = space.evaluate(as_span(c), itf.patch_b, geometry::edge_point(itf.edge_b, t));
      CHECK(std::abs(va - vb) <= 1e-12);
    }
  }
}

TEST_CASE("bilinear cube matrices match the classical element matrices") {
  const auto space = build_space(unit_cube(), 0, 1);
  REQUIRE(space.size() == 8);
  const auto sys = assemble_system(space);
  // Recover the cube vertex of every global index.
  std::vector<Vec3> vertex(8);
  for (int m = 0; m < 6; ++m)
    for (int l1 = 0; l1 < 2; ++l1)
      for (int l2 = 0; l2 < 2; ++l2) vertex[static_cast<std::size_t>(space.global_index(m, l1, l2))] = space.surface().patch(m).eval(Vec2(l1, l2)).point;
  const Eigen::MatrixXd mass(sys.mass);
  const Eigen::MatrixXd stiff(sys.stiffness);
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      const int dist = static_cast<int>(std::lround((vertex[a] - vertex[b]).cwiseAbs().sum()));
      // Bilinear element: mass (1/36)[4 2 2 1], stiffness [2/3 -1/6 -1/6 -1/3]
      // for self, edge, edge and diagonal neighbours; faces shared: 3, 2, 1, 0.
      const double m_expected[] = {3 * 4.0 / 36, 2 * 2.0 / 36, 1.0 / 36, 0.0};
      const double s_expected[] = {3 * 2.0 / 3, 2 * -1.0 / 6, -1.0 / 3, 0.0};
      CHECK(mass(a, b) == doctest::Approx(m_expected[dist]).epsilon(1e-14));
      CHECK(std::abs(stiff(a, b) - s_expected[dist]) <= 1e-14);
    }
  }
}

TEST_CASE("mass and stiffness on the sphere") {
  const auto space = build_space(sphere(), 3, 3);
  const auto sys = assemble_system(space);
  const Vector ones = Vector::Ones(space.size());
  SUBCASE("symmetry") {
    for (const auto* a : {&sys.mass, &sys.stiffness}) {
      const SparseMatrix t = a->transpose();
      CHECK(max_abs(*a - t) <= 1e-13 * max_abs(*a));
    }
  }
  SUBCASE("mass is positive definite and integrates the area") {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(col_major(sys.mass));
    CHECK(llt.info() == Eigen::Success);
    CHECK(std::abs(ones.dot(sys.mass * ones) - 4 * std::numbers::pi) <= 1e-10 * 4 * std::numbers::pi);
  }
  SUBCASE("constants lie in the stiffness kernel") {
    CHECK((sys.stiffness * ones).cwiseAbs().maxCoeff() <= 1e-11 * max_abs(sys.stiffness));
  }
  SUBCASE("load of the constant function is the row sum of M") {
    const Vector f = assemble_load(space, [](const SurfacePoint&) { return 1.0; });
    CHECK((f - sys.mass * ones).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("load of a harmonic is orthogonal to constants") {
    const Vector f = assemble_load(space, y1m1);
    CHECK(std::abs(ones.dot(f)) <= 1e-10);
  }
  SUBCASE("load of a basis function is a column of M") {
    for (int k : {0, 17, space.size() / 2, space.size() - 1}) {
      Vector e = Vector::Zero(space.size());
      e(k) = 1.0;
      const Vector f = assemble_load(space, [&](const SurfacePoint& x) { return space.evaluate(as_span(e), x.patch, x.xhat); });
      CHECK((f - sys.mass * e).cwiseAbs().maxCoeff() <= 1e-15);
    }
  }
}

TEST_CASE("mass and stiffness on the torus") {
  const auto space = build_space(torus(), 3, 2);
  const auto sys = assemble_system(space);
  const Vector ones = Vector::Ones(space.size());
  const double area = 8 * std::numbers::pi * std::numbers::pi;
  CHECK(std::abs(ones.dot(sys.mass * ones) - area) <= 1e-8 * area);
  CHECK((sys.stiffness * ones).cwiseAbs().maxCoeff() <= 1e-11 * max_abs(sys.stiffness));
}

TEST_CASE("Rayleigh quotient of a degree-one harmonic") {
  const auto space = build_space(sphere(), 4, 3);
  const auto sys = assemble_system(space);
  const Vector u = solve_spd(sys.mass, assemble_load(space, y1m1));
  const double rq = u.dot(sys.stiffness * u) / u.dot(sys.mass * u);
  CHECK(std::abs(rq - 2.0) <= 1e-3);
}

TEST_CASE("assembly is bitwise deterministic across thread counts") {
  const auto space = build_space(sphere(), 3, 2);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto a = assemble_system(space);
  omp_set_num_threads(4);
  const auto b = assemble_system(space);
  const auto c = assemble_system(space);
  omp_set_num_threads(saved);
  for (const auto* other : {&b, &c}) {
    REQUIRE(a.mass.nonZeros() == other->mass.nonZeros());
    CHECK(std::equal(a.mass.valuePtr(), a.mass.valuePtr() + a.mass.nonZeros(), other->mass.valuePtr()));
    CHECK(std::equal(a.stiffness.valuePtr(), a.stiffness.valuePtr() + a.stiffness.nonZeros(), other->stiffness.valuePtr()));
    CHECK(std::equal(a.mass.innerIndexPtr(), a.mass.innerIndexPtr() + a.mass.nonZeros(), other->mass.innerIndexPtr()));
  }
}

TEST_CASE("Galerkin solutions converge at the optimal L2 rate") {
  const double kappa = 1.0;
  const double scale = 1.0 / (kappa * kappa + 2.0);
  auto exact = [&](const SurfacePoint& x) { return scale * y1m1(x); };
  for (int p = 1; p <= 3; ++p) {
    std::vector<double> errors;
    // Higher degrees are still pre-asymptotic below level 4.
    for (int j = 4; j <= 5; ++j) {
      const auto space = build_space(sphere(), j, p);
      const auto sys = assemble_system(space);
      const SparseMatrix a = kappa * kappa * sys.mass + sys.stiffness;
      const Vector u = solve_spd(a, assemble_load(space, y1m1));
      errors.push_back(l2_error(space, as_span(u), exact));
    }
    const double rate = std::log2(errors[0] / errors[1]);
    INFO("p = " << p << ", rate = " << rate);
    CHECK(std::abs(rate - (p + 1)) <= 0.1 * (p + 1));
  }
}

TEST_CASE("L2 error of the exact interpolant of a constant vanishes") {
  const auto space = build_space(torus(), 2, 2);
  const Vector c = Vector::Constant(space.size(), 2.5);
  CHECK(l2_error(space, as_span(c), [](const SurfacePoint&) { return 2.5; }) <= 1e-13);
}
