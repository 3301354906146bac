#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "doctest.h"
#include "igagrf/error.hpp"
#include "igagrf/fractional.hpp"

using namespace igagrf;
using namespace igagrf::fractional;

namespace {

SparseMatrix sparse(const Eigen::MatrixXd& a) { return a.sparseView(); }

Eigen::MatrixXd random_spd(int n, std::mt19937& rng, double shift) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) b(i, k) = g(rng);
  return b * b.transpose() / n + shift * Eigen::MatrixXd::Identity(n, n);
}

/// u = V diag(lambda^{-beta}) V^{-1} M^{-1} f for the pencil A V = M V diag(lambda).
Vector dense_power(const Eigen::MatrixXd& a, const Eigen::MatrixXd& m, const Vector& f, double beta) {
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, m);
  const Eigen::MatrixXd& v = eig.eigenvectors();  // M-orthonormal: V^T M V = I
  const Vector lam = eig.eigenvalues().array().pow(-beta);
  return v * lam.asDiagonal() * v.transpose() * f;
}

PencilSolver scalar(double a, double m) {
  return PencilSolver(sparse(Eigen::MatrixXd::Constant(1, 1, m)), sparse(Eigen::MatrixXd::Constant(1, 1, a)),
                      {1e-15, 100});
}

}  // namespace

TEST_CASE("split_beta plans") {
  SUBCASE("improved splitting borrows from the integer part") {
    const auto plan = split_beta(1.2, true, 10);
    REQUIRE(plan.stages.size() == 2);
    for (const auto& st : plan.stages) {
      CHECK(st.kind == Stage::Kind::Sinc);
      CHECK(st.exponent == doctest::Approx(0.6).epsilon(1e-14));
      CHECK(st.quadrature == 10);
    }
    CHECK_FALSE(plan.fallback);
  }
  SUBCASE("improved splitting halves large remainders") {
    const auto plan = split_beta(1.8, true);
    REQUIRE(plan.stages.size() == 3);
    CHECK(plan.stages[0].kind == Stage::Kind::Integer);
    CHECK(plan.stages[0].solves == 1);
    CHECK(plan.stages[1].exponent == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(plan.stages[2].exponent == doctest::Approx(0.4).epsilon(1e-14));
  }
  SUBCASE("middle remainders are untouched") {
    for (bool improved : {false, true}) {
      const auto plan = split_beta(2.5, improved);
      REQUIRE(plan.stages.size() == 2);
      CHECK(plan.stages[0].solves == 2);
      CHECK(plan.stages[1].kind == Stage::Kind::Sinc);
      CHECK(plan.stages[1].exponent == 0.5);
    }
  }
  SUBCASE("plain splitting") {
    const auto plan = split_beta(1.2, false);
    REQUIRE(plan.stages.size() == 2);
    CHECK(plan.stages[0].solves == 1);
    CHECK(plan.stages[1].exponent == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("integers need no sinc stage") {
    for (bool improved : {false, true}) {
      const auto plan = split_beta(3.0, improved);
      REQUIRE(plan.stages.size() == 1);
      CHECK(plan.stages[0].solves == 3);
    }
  }
  SUBCASE("small beta falls back to the plain plan") {
    const auto plan = split_beta(0.2, true);
    CHECK(plan.fallback);
    REQUIRE(plan.stages.size() == 1);
    CHECK(plan.stages[0].exponent == 0.2);
  }
  SUBCASE("invalid beta") {
    for (double b : {0.0, -1.0, std::nan("")}) {
      try {
        (void)split_beta(b, true);
        FAIL("accepted beta " << b);
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Domain);
      }
    }
  }
  SUBCASE("exponent bookkeeping") {
    // beta = q / 20 is exact in binary only for some q; compare with slack.
    for (int q = 1; q <= 100; ++q) {
      const double beta = q / 20.0;
      for (bool improved : {false, true}) {
        const auto plan = split_beta(beta, improved);
        CHECK(plan.exponent_sum() == doctest::Approx(beta).epsilon(1e-14));
        for (const auto& st : plan.stages) {
          if (st.kind != Stage::Kind::Sinc) continue;
          CHECK(st.exponent > 0.0);
          CHECK(st.exponent < 1.0);
          if (improved && !plan.fallback) {
            CHECK(st.exponent > 1.0 / 3.0);
            CHECK(st.exponent <= 2.0 / 3.0 + 1e-15);
          }
        }
      }
    }
  }
}

TEST_CASE("default quadrature count") {
  for (double b : {0.4, 0.5, 0.6}) {
    for (int j : {1, 3, 5}) {
      for (int p : {1, 3}) {
        const int k = default_quadrature(b, j, p);
        const double d = 2.0 * std::min(b, 1.0 - b);
        CHECK(std::exp(-d * std::sqrt(k)) <= std::pow(2.0, -j * (p + 1)) * (1 + 1e-12));
        CHECK(std::exp(-d * std::sqrt(k - 1.0)) > std::pow(2.0, -j * (p + 1)));
      }
    }
  }
}

TEST_CASE("integer solves") {
  CHECK(solve_integer(scalar(3.0, 1.0), Vector::Ones(1), 2)(0) == doctest::Approx(1.0 / 9).epsilon(1e-14));

  std::mt19937 rng(41);
  const Eigen::MatrixXd a = random_spd(10, rng, 1.0);
  const Eigen::MatrixXd m = random_spd(10, rng, 0.5);
  const Vector f = Vector::LinSpaced(10, -1.0, 1.0);
  const PencilSolver solver(sparse(m), sparse(a), {1e-14, 1000});
  const Vector once = a.llt().solve(f);
  const Vector twice = a.llt().solve(m * once);
  CHECK((solve_integer(solver, f, 1) - once).norm() <= 1e-11 * once.norm());
  CHECK((solve_integer(solver, f, 2) - twice).norm() <= 1e-11 * twice.norm());
  // beta = 1 through the plan machinery.
  CHECK((solve_fractional(solver, f, split_beta(1.0, true)) - once).norm() <= 1e-11 * once.norm());
}

TEST_CASE("scalar sinc quadrature") {
  const auto solver = scalar(2.0, 1.0);
  const double u = sinc_apply(solver, Vector::Ones(1), 0.5, 200)(0);
  CHECK(std::abs(u - std::sqrt(0.5)) <= 2e-6);

  // Error <= C exp(-2 min(b, 1-b) sqrt(K)) with one constant for all b.
  std::vector<double> constants;
  for (double b : {0.15, 0.3, 0.5, 0.7, 0.85}) {
    double c = 0.0;
    for (int k : {4, 16, 36, 64, 100, 200}) {
      const double err = std::abs(sinc_apply(solver, Vector::Ones(1), b, k)(0) - std::pow(2.0, -b));
      c = std::max(c, err * std::exp(2.0 * std::min(b, 1.0 - b) * std::sqrt(k)));
    }
    constants.push_back(c);
  }
  const auto [lo, hi] = std::minmax_element(constants.begin(), constants.end());
  CHECK(*hi <= 10.0 * *lo);
  CHECK(*hi <= 5.0);
}

TEST_CASE("sinc quadrature agrees with the scalar integral") {
  // Direct evaluation of the quadrature sum for lambda = 7.
  const double lambda = 7.0, b = 0.35;
  const int k = 30;
  double sum = 0.0;
  for (int i = -k; i <= k; ++i) {
    const double t = i / std::sqrt(k);
    sum += std::exp(2 * b * t) / (1.0 + std::exp(2 * t) * lambda);
  }
  const double expected = 2 * std::sin(std::numbers::pi * b) / (std::numbers::pi * std::sqrt(k)) * sum;
  CHECK(sinc_apply(scalar(lambda, 1.0), Vector::Ones(1), b, k)(0) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("dense fractional solves match the generalized eigendecomposition") {
  std::mt19937 rng(43);
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::MatrixXd a = random_spd(10, rng, 1.0);
    const Eigen::MatrixXd m = random_spd(10, rng, 0.5);
    Vector f(10);
    for (int i = 0; i < 10; ++i) f(i) = std::cos(3.0 * i + trial);
    const PencilSolver solver(sparse(m), sparse(a), {1e-14, 1000});
    for (double beta : {0.3, 0.5, 0.8, 1.2, 1.8, 2.5}) {
      for (bool improved : {false, true}) {
        const auto plan = split_beta(beta, improved, 400);
        const Vector u = solve_fractional(solver, f, plan);
        const Vector exact = dense_power(a, m, f, beta);
        // Quadrature error decays like exp(-2 min(b, 1-b) sqrt(K)) for each
        // sinc exponent b; exponents in (1/3, 2/3] reach 1e-6 at K = 400.
        double worst = 0.5;
        for (const auto& st : plan.stages)
          if (st.kind == Stage::Kind::Sinc) worst = std::min({worst, st.exponent, 1.0 - st.exponent});
        const double tol = worst >= 1.0 / 3.0 ? 1e-6 : 5.0 * std::exp(-2.0 * worst * std::sqrt(400.0));
        INFO("beta = " << beta << ", improved = " << improved);
        CHECK((u - exact).norm() <= tol * exact.norm());
      }
    }
  }
}

TEST_CASE("sinc failures name the shift") {
  const Eigen::MatrixXd a = Eigen::Vector3d(1.0, 100.0, 1e4).asDiagonal();
  const Eigen::MatrixXd m = Eigen::Matrix3d{{2, 1, 0}, {1, 2, 1}, {0, 1, 2}};
  const PencilSolver solver(sparse(m), sparse(a), {1e-14, 1});
  try {
    (void)sinc_apply(solver, Vector::Ones(3), 0.5, 4);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MaxIterations);
    CHECK(std::string(e.what()).find("shift k = ") != std::string::npos);
  }
  CHECK_THROWS_AS((void)sinc_apply(solver, Vector::Ones(3), 1.0, 4), Error);
  CHECK_THROWS_AS((void)sinc_apply(solver, Vector::Ones(3), 0.5, 0), Error);
}

TEST_CASE("multilevel and Jacobi pencil solvers agree") {
  const auto surf = std::make_shared<const geometry::MultipatchSurface>(geometry::builtin_sphere());
  const linalg::Hierarchy h(surf, 3, 2);
  const auto sys = assembly::assemble_system(h.finest());
  const SparseMatrix a = 2.0 * sys.mass + sys.stiffness;
  const auto pencil = std::make_shared<const linalg::PencilHierarchy>(h, sys.mass, a);
  const Vector f = assembly::assemble_load(h.finest(), [](const assembly::SurfacePoint& x) { return x.point.z() * x.point.x(); });
  SolveStats bpx_stats, jacobi_stats;
  const PencilSolver multilevel(pencil, {1e-12, 5000, linalg::Smoother::Ssor});
  const PencilSolver jacobi(sys.mass, a, {1e-12, 5000});
  const auto plan = split_beta(0.75, true, 20);
  const Vector u1 = solve_fractional(multilevel, f, plan, &bpx_stats);
  const Vector u2 = solve_fractional(jacobi, f, plan, &jacobi_stats);
  CHECK((u1 - u2).norm() <= 1e-9 * u2.norm());
  CHECK(bpx_stats.solves == plan.total_solves());
  CHECK(bpx_stats.iterations < jacobi_stats.iterations);
}
