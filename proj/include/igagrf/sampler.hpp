#pragma once

// White-noise loads f = sqrt(M) y by an expansion in Jacobi elliptic
// functions, and the Whittle-Matern field sampling pipeline.

#include <cstdint>
#include <memory>
#include <optional>

#include "igagrf/assembly.hpp"
#include "igagrf/fractional.hpp"
#include "igagrf/linalg.hpp"
#include "igagrf/types.hpp"

namespace igagrf::sampler {

struct EllipticIntegrals {
  double k = 0.0;  ///< first kind K(m)
  double e = 0.0;  ///< second kind E(m)
};

/// Complete elliptic integrals for the parameter m = k^2 in [0, 1), by the
/// arithmetic-geometric mean.
EllipticIntegrals complete_elliptic(double m);

struct JacobiValues {
  double sn = 0.0;
  double cn = 1.0;
  double dn = 1.0;
};

/// sn, cn, dn(t | m) for the parameter m in [0, 1), by the descending Landen
/// transformation.
JacobiValues jacobi_elliptic(double t, double m);

/// Reproducible standard normal variates. The i-th uniform is a SplitMix64
/// hash of (seed, i); normals are formed pairwise by Box-Muller.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : seed_(seed) {}

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

  /// Normal variate number `index` of this stream (independent of the counter).
  [[nodiscard]] double normal_at(std::uint64_t index) const;
  double next() { return normal_at(counter_++); }
  Vector draw(int n);

 private:
  [[nodiscard]] double uniform_at(std::uint64_t index) const;

  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Spectral bracket [lower, upper] of M.
struct MassBounds {
  double lower = 0.0;
  double upper = 0.0;
};

MassBounds mass_bounds(const SparseMatrix& mass, int power_steps = 20);

/// f = (2 K sqrt(m) / (pi Khat)) M sum_k dn(t_k)/cn(t_k)^2 (M + w_k^2 I)^{-1} y
/// with parameter 1 - m/Mbar, t_k = (k - 1/2) K / Khat and
/// w_k = sqrt(m) sn(t_k)/cn(t_k). Each shifted mass system is solved by CG to
/// 1e-13.
Vector sqrt_mass_apply(const SparseMatrix& mass, const Vector& y, int khat,
                       std::optional<MassBounds> bounds = std::nullopt);

struct SampleOptions {
  int khat = 12;          ///< terms in the square-root expansion
  int quadrature = 0;     ///< sinc K per stage; 0 picks default_quadrature
  bool improved = true;   ///< improved splitting of beta
  fractional::SolverOptions solver{};
};

/// Discretization and operators for repeated sampling on one surface.
class FieldSampler {
 public:
  FieldSampler(assembly::SurfacePtr surface, int level, int degree, double beta, double kappa,
               SampleOptions options = {});

  [[nodiscard]] const assembly::DiscreteSpace& space() const { return hierarchy_->finest(); }
  [[nodiscard]] const SparseMatrix& mass() const { return pencil_->mass(); }
  [[nodiscard]] const SparseMatrix& stiffness() const { return stiffness_; }
  [[nodiscard]] const fractional::FractionalPlan& plan() const noexcept { return plan_; }
  [[nodiscard]] const MassBounds& bounds() const noexcept { return bounds_; }
  [[nodiscard]] const fractional::SolveStats& stats() const noexcept { return stats_; }

  /// White-noise load f ~ N(0, M) from the next variates of the stream.
  Vector white_noise(NoiseStream& noise) const;
  /// Coefficients of one field sample.
  Vector draw(NoiseStream& noise);

 private:
  std::shared_ptr<const linalg::Hierarchy> hierarchy_;
  std::shared_ptr<const linalg::PencilHierarchy> pencil_;
  SparseMatrix stiffness_;
  std::unique_ptr<fractional::PencilSolver> solver_;
  fractional::FractionalPlan plan_;
  MassBounds bounds_;
  SampleOptions options_;
  fractional::SolveStats stats_;
};

struct FieldSample {
  std::shared_ptr<const FieldSampler> sampler;
  Vector coefficients;

  [[nodiscard]] const assembly::DiscreteSpace& space() const { return sampler->space(); }
  /// Field value at a patch point.
  [[nodiscard]] double operator()(int patch, const Vec2& xhat) const {
    return space().evaluate(assembly::as_span(coefficients), patch, xhat);
  }
};

/// One sample of (kappa^2 - Laplace)^beta u = W with white noise from the seed.
FieldSample sample_field(assembly::SurfacePtr surface, int level, int degree, double beta, double kappa,
                         std::uint64_t seed, const SampleOptions& options = {});

}  // namespace igagrf::sampler
