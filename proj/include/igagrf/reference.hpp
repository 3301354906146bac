#pragma once

// Closed-form references on the unit sphere and Matern parameter links.

#include "igagrf/types.hpp"

namespace igagrf::reference {

struct HarmonicIndex {
  int degree = 0;  ///< l >= 0
  int order = 0;   ///< |m| <= l
};

/// Real spherical harmonic with unit L2(S^2) norm; m < 0 selects the sine
/// family, e.g. Y_{1,-1} = sqrt(3 / (4 pi)) y. The point must lie on the
/// unit sphere within 1e-12.
double spherical_harmonic(const HarmonicIndex& idx, const Vec3& point);

/// Multiplier (l(l+1) + kappa^2)^{-beta} of Y_{l,m} under (kappa^2 - Laplace)^{-beta}.
double exact_sphere_solution(double beta, double kappa, const HarmonicIndex& idx);

struct MaternParameters {
  double nu = 0.0;      ///< smoothness 2 beta - d/2 (= 2 beta - 1 on surfaces)
  double sigma2 = 0.0;  ///< marginal variance; NaN when nu <= 0
  bool valid = false;   ///< nu > 0
};

/// Smoothness and marginal variance of the Matern field with SPDE exponent
/// beta and inverse correlation length kappa in dimension d.
MaternParameters matern_link(double beta, double kappa, int dimension = 2);

}  // namespace igagrf::reference
