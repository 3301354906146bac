#pragma once

#include <vector>

namespace igagrf {

/// Gauss-Legendre rule on [0, 1].
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;

  [[nodiscard]] int size() const noexcept { return static_cast<int>(points.size()); }
};

/// n-point rule, exact for polynomials of degree 2n - 1.
GaussRule gauss_legendre(int n);

}  // namespace igagrf
