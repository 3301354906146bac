#include "igagrf/reference.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "igagrf/error.hpp"

namespace igagrf::reference {

double spherical_harmonic(const HarmonicIndex& idx, const Vec3& point) {
  const int l = idx.degree;
  const int m = std::abs(idx.order);
  if (l < 0 || m > l) throw Error(ErrorKind::InvalidArgument, "spherical harmonic index needs |m| <= l");
  if (std::abs(point.norm() - 1.0) > 1e-12) throw Error(ErrorKind::Domain, "point is not on the unit sphere");
  const double z = point.z();

  // Q_l^m(z) = P_l^m(z) / (1 - z^2)^{m/2}, without the Condon-Shortley phase,
  // so that Q_l^m(z) Re/Im (x + i y)^m = P_l^m(cos theta) cos/sin(m phi).
  double q_mm = 1.0;
  for (int k = 1; k <= m; ++k) q_mm *= 2.0 * k - 1.0;
  double q = q_mm;
  if (l > m) {
    double prev = q_mm;
    q = z * (2.0 * m + 1.0) * q_mm;
    for (int n = m + 2; n <= l; ++n) {
      const double next = ((2.0 * n - 1.0) * z * q - (n + m - 1.0) * prev) / (n - m);
      prev = q;
      q = next;
    }
  }

  // Re/Im of (x + i y)^m.
  double re = 1.0, im = 0.0;
  for (int k = 0; k < m; ++k) {
    const double r = re * point.x() - im * point.y();
    im = re * point.y() + im * point.x();
    re = r;
  }

  double ratio = 1.0;  // (l - m)! / (l + m)!
  for (int k = l - m + 1; k <= l + m; ++k) ratio /= k;
  const double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * ratio);
  if (m == 0) return norm * q;
  return std::numbers::sqrt2 * norm * q * (idx.order > 0 ? re : im);
}

double exact_sphere_solution(double beta, double kappa, const HarmonicIndex& idx) {
  const double lambda = idx.degree * (idx.degree + 1.0) + kappa * kappa;
  return std::pow(lambda, -beta);
}

MaternParameters matern_link(double beta, double kappa, int dimension) {
  if (dimension < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
  if (!(kappa > 0.0)) throw Error(ErrorKind::Domain, "kappa must be positive");
  MaternParameters out;
  const double half_d = 0.5 * dimension;
  out.nu = 2.0 * beta - half_d;
  out.valid = out.nu > 0.0;
  out.sigma2 = out.valid ? std::tgamma(out.nu) / (std::tgamma(out.nu + half_d) *
                                                  std::pow(4.0 * std::numbers::pi, half_d) *
                                                  std::pow(kappa, 2.0 * out.nu))
                         : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace igagrf::reference
