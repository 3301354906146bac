#include "igagrf/sampler.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "igagrf/error.hpp"

namespace igagrf::sampler {

EllipticIntegrals complete_elliptic(double m) {
  if (!(m >= 0.0 && m < 1.0)) throw Error(ErrorKind::Domain, "elliptic parameter must lie in [0, 1)");
  double a = 1.0;
  double b = std::sqrt(1.0 - m);
  double c = std::sqrt(m);
  double weight = 0.5;
  double sum = weight * c * c;
  for (int it = 0; it < 64 && c > 1e-17 * a; ++it) {
    const double next = 0.5 * (a + b);
    c = 0.5 * (a - b);
    b = std::sqrt(a * b);
    a = next;
    weight *= 2.0;
    sum += weight * c * c;
  }
  const double k = std::numbers::pi / (2.0 * a);
  return {k, k * (1.0 - sum)};
}

JacobiValues jacobi_elliptic(double t, double m) {
  if (!(m >= 0.0 && m < 1.0)) throw Error(ErrorKind::Domain, "elliptic parameter must lie in [0, 1)");
  if (m == 0.0) return {std::sin(t), std::cos(t), 1.0};
  constexpr int kMaxSteps = 32;
  std::array<double, kMaxSteps + 1> a{};
  std::array<double, kMaxSteps + 1> c{};
  a[0] = 1.0;
  c[0] = std::sqrt(m);
  double b = std::sqrt(1.0 - m);
  int n = 0;
  while (n < kMaxSteps && std::abs(c[static_cast<std::size_t>(n)]) > 1e-16 * a[static_cast<std::size_t>(n)]) {
    const auto i = static_cast<std::size_t>(n);
    a[i + 1] = 0.5 * (a[i] + b);
    c[i + 1] = 0.5 * (a[i] - b);
    b = std::sqrt(a[i] * b);
    ++n;
  }
  double phi = std::ldexp(a[static_cast<std::size_t>(n)] * t, n);
  double phi_prev = phi;
  for (int i = n; i >= 1; --i) {
    phi_prev = phi;
    const auto k = static_cast<std::size_t>(i);
    phi = 0.5 * (phi + std::asin(c[k] / a[k] * std::sin(phi)));
  }
  // phi is now phi_0 and phi_prev is phi_1.
  return {std::sin(phi), std::cos(phi), std::cos(phi) / std::cos(phi_prev - phi)};
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

class Jacobi final : public linalg::LinearOperator {
 public:
  explicit Jacobi(const Vector& diagonal) : inverse_(diagonal.cwiseInverse()) {}
  [[nodiscard]] int size() const override { return static_cast<int>(inverse_.size()); }
  void apply(const Vector& in, Vector& out) const override { out = inverse_.cwiseProduct(in); }

 private:
  Vector inverse_;
};

}  // namespace

double NoiseStream::uniform_at(std::uint64_t index) const {
  const std::uint64_t bits = splitmix64(splitmix64(seed_) ^ index);
  // 53 random bits mapped to the open interval (0, 1).
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double NoiseStream::normal_at(std::uint64_t index) const {
  const std::uint64_t pair = index & ~std::uint64_t{1};
  const double radius = std::sqrt(-2.0 * std::log(uniform_at(pair)));
  const double angle = 2.0 * std::numbers::pi * uniform_at(pair + 1);
  return radius * ((index & 1) ? std::sin(angle) : std::cos(angle));
}

Vector NoiseStream::draw(int n) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative sample count");
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = normal_at(counter_ + static_cast<std::uint64_t>(i));
  counter_ += static_cast<std::uint64_t>(n);
  return v;
}

MassBounds mass_bounds(const SparseMatrix& mass, int power_steps) {
  const auto b = linalg::power_bounds(mass, power_steps);
  return {b.lower, b.upper};
}

Vector sqrt_mass_apply(const SparseMatrix& mass, const Vector& y, int khat, std::optional<MassBounds> bounds) {
  if (khat < 1) throw Error(ErrorKind::InvalidArgument, "square-root expansion needs at least one term");
  if (mass.rows() != mass.cols() || mass.rows() != y.size())
    throw Error(ErrorKind::InvalidArgument, "sqrt_mass_apply: dimension mismatch");
  const MassBounds mb = bounds ? *bounds : mass_bounds(mass);
  if (!(mb.lower > 0.0 && mb.upper > mb.lower))
    throw Error(ErrorKind::InvalidArgument, "spectral bounds must satisfy 0 < lower < upper");

  const double param = 1.0 - mb.lower / mb.upper;
  const double kc = complete_elliptic(param).k;
  const double root = std::sqrt(mb.lower);
  std::vector<Vector> terms(static_cast<std::size_t>(khat));
  std::vector<std::string> failures(static_cast<std::size_t>(khat));
  bool failed = false;

#pragma omp parallel for schedule(dynamic)
  for (int k = 1; k <= khat; ++k) {
    const auto idx = static_cast<std::size_t>(k - 1);
    const auto je = jacobi_elliptic((k - 0.5) * kc / khat, param);
    const double w = root * je.sn / je.cn;
    SparseMatrix shifted = mass;
    for (Eigen::Index i = 0; i < shifted.rows(); ++i) shifted.coeffRef(i, i) += w * w;
    const Jacobi jacobi(shifted.diagonal());
    try {
      terms[idx] = (je.dn / (je.cn * je.cn)) * linalg::cg(shifted, y, {1e-13, 10000}, &jacobi).x;
    } catch (const Error& e) {
      failures[idx] = "square-root term " + std::to_string(k) + ": " + e.what();
#pragma omp atomic write
      failed = true;
    }
  }
  if (failed)
    for (const auto& msg : failures)
      if (!msg.empty()) throw Error(ErrorKind::MaxIterations, msg);

  Vector sum = Vector::Zero(y.size());
  for (const auto& t : terms) sum += t;
  return (2.0 * kc * root / (std::numbers::pi * khat)) * (mass * sum);
}

FieldSampler::FieldSampler(assembly::SurfacePtr surface, int level, int degree, double beta, double kappa,
                           SampleOptions options)
    : options_(options) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw Error(ErrorKind::Domain, "kappa must be positive");
  plan_ = fractional::split_beta(beta, options_.improved);
  for (auto& st : plan_.stages)
    if (st.kind == fractional::Stage::Kind::Sinc)
      st.quadrature = options_.quadrature > 0 ? options_.quadrature
                                              : fractional::default_quadrature(st.exponent, level, degree);
  if (options_.khat < 1) throw Error(ErrorKind::InvalidArgument, "square-root expansion needs at least one term");

  hierarchy_ = std::make_shared<const linalg::Hierarchy>(std::move(surface), level, degree);
  auto sys = assembly::assemble_system(hierarchy_->finest());
  stiffness_ = std::move(sys.stiffness);
  const SparseMatrix a = kappa * kappa * sys.mass + stiffness_;
  pencil_ = std::make_shared<const linalg::PencilHierarchy>(*hierarchy_, sys.mass, a);
  solver_ = std::make_unique<fractional::PencilSolver>(pencil_, options_.solver);
  bounds_ = mass_bounds(pencil_->mass());
}

Vector FieldSampler::white_noise(NoiseStream& noise) const {
  return sqrt_mass_apply(mass(), noise.draw(space().size()), options_.khat, bounds_);
}

Vector FieldSampler::draw(NoiseStream& noise) {
  return fractional::solve_fractional(*solver_, white_noise(noise), plan_, &stats_);
}

FieldSample sample_field(assembly::SurfacePtr surface, int level, int degree, double beta, double kappa,
                         std::uint64_t seed, const SampleOptions& options) {
  auto sampler = std::make_shared<FieldSampler>(std::move(surface), level, degree, beta, kappa, options);
  NoiseStream noise(seed);
  Vector u = sampler->draw(noise);
  return {std::move(sampler), std::move(u)};
}

}  // namespace igagrf::sampler
