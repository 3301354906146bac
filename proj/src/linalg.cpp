#include "igagrf/linalg.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "igagrf/error.hpp"

namespace igagrf::linalg {

CgResult cg(const SparseMatrix& a, const Vector& b, const CgOptions& options, const LinearOperator* preconditioner) {
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.size() != n) throw Error(ErrorKind::InvalidArgument, "cg: dimension mismatch");
  if (preconditioner && preconditioner->size() != n)
    throw Error(ErrorKind::InvalidArgument, "cg: preconditioner dimension mismatch");
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  CgResult result{Vector::Zero(n), {}};
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    result.report.seconds = elapsed();
    return result;
  }
  auto precondition = [&](const Vector& r, Vector& z) {
    if (preconditioner)
      preconditioner->apply(r, z);
    else
      z = r;
  };

  Vector r = b;
  Vector z(n);
  precondition(r, z);
  Vector p = z;
  Vector q(n);
  double rz = r.dot(z);
  if (!(rz > 0.0)) throw Error(ErrorKind::IndefiniteOperator, "cg: preconditioner is not positive definite");
  const double rz0 = rz;
  for (int it = 1; it <= options.max_iterations; ++it) {
    q.noalias() = a * p;
    const double curvature = p.dot(q);
    if (!(curvature > 0.0)) throw Error(ErrorKind::IndefiniteOperator, "cg: p^T A p <= 0 at iteration " + std::to_string(it));
    const double alpha = rz / curvature;
    result.x += alpha * p;
    r -= alpha * q;
    precondition(r, z);
    const double rz_new = r.dot(z);
    if (rz_new < 0.0) throw Error(ErrorKind::IndefiniteOperator, "cg: r^T C r < 0 at iteration " + std::to_string(it));
    const double rel = std::sqrt(rz_new / rz0);
    if (rel <= options.tolerance) {
      result.report.iterations = it;
      result.report.residual = rel;
      result.report.true_residual = (b - a * result.x).norm() / b_norm;
      result.report.seconds = elapsed();
      return result;
    }
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw Error(ErrorKind::MaxIterations, "cg: no convergence within " + std::to_string(options.max_iterations) +
                                            " iterations (residual " + std::to_string(std::sqrt(rz / rz0)) + ")");
}

Hierarchy::Hierarchy(assembly::SurfacePtr surface, int level, int degree) {
  if (level < 0) throw Error(ErrorKind::InvalidArgument, "hierarchy level must be non-negative");
  spaces_.reserve(static_cast<std::size_t>(level) + 1);
  for (int l = 0; l <= level; ++l) spaces_.emplace_back(surface, l, degree);

  for (int l = 0; l < level; ++l) {
    const auto& coarse = spaces_[static_cast<std::size_t>(l)];
    const auto& fine = spaces_[static_cast<std::size_t>(l) + 1];
    const SparseMatrix t = splines::prolongation_1d(degree, l);
    const int nf = fine.local_size();
    // Each fine function is expanded on the first patch it lives on; the
    // expansion is the same on every patch because the spaces are nested.
    std::vector<char> done(static_cast<std::size_t>(fine.size()), 0);
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(fine.size()) * static_cast<std::size_t>((degree + 2) * (degree + 2)));
    for (int m = 0; m < surface->num_patches(); ++m) {
      for (int l1 = 0; l1 < nf; ++l1) {
        for (int l2 = 0; l2 < nf; ++l2) {
          const int row = fine.global_index(m, l1, l2);
          if (done[static_cast<std::size_t>(row)]) continue;
          done[static_cast<std::size_t>(row)] = 1;
          for (SparseMatrix::InnerIterator a(t, l1); a; ++a)
            for (SparseMatrix::InnerIterator b(t, l2); b; ++b)
              triplets.emplace_back(row, coarse.global_index(m, static_cast<int>(a.col()), static_cast<int>(b.col())),
                                    a.value() * b.value());
        }
      }
    }
    SparseMatrix p(fine.size(), coarse.size());
    p.setFromTriplets(triplets.begin(), triplets.end());
    prolongations_.push_back(std::move(p));
  }
}

std::vector<SparseMatrix> Hierarchy::coarsen(const SparseMatrix& finest) const {
  if (finest.rows() != this->finest().size() || finest.cols() != this->finest().size())
    throw Error(ErrorKind::InvalidArgument, "operator does not match the finest space");
  std::vector<SparseMatrix> levels(spaces_.size());
  levels.back() = finest;
  for (int l = finest_level() - 1; l >= 0; --l) {
    const SparseMatrix& p = prolongations_[static_cast<std::size_t>(l)];
    const SparseMatrix ap = levels[static_cast<std::size_t>(l) + 1] * p;
    levels[static_cast<std::size_t>(l)] = SparseMatrix(p.transpose()) * ap;
  }
  return levels;
}

Bpx::Bpx(const Hierarchy& hierarchy, std::vector<SparseMatrix> levels, Smoother smoother)
    : hierarchy_(&hierarchy), levels_(std::move(levels)), smoother_(smoother) {
  if (static_cast<int>(levels_.size()) != hierarchy.finest_level() + 1)
    throw Error(ErrorKind::InvalidArgument, "BPX needs one operator per level");
  inverse_diagonal_.reserve(levels_.size());
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    if (levels_[l].rows() != hierarchy.space(static_cast<int>(l)).size())
      throw Error(ErrorKind::InvalidArgument, "BPX level operator has the wrong dimension");
    Vector d = levels_[l].diagonal();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (!(d(i) > 0.0))
        throw Error(ErrorKind::DegenerateOperator, "non-positive diagonal entry on level " + std::to_string(l));
      d(i) = 1.0 / d(i);
    }
    inverse_diagonal_.push_back(std::move(d));
  }
  if (smoother_ == Smoother::Diagonal) {
    // Only the diagonals are needed from here on.
    for (auto& a : levels_) a = SparseMatrix(a.rows(), a.cols());
  }
}

void Bpx::smooth(int level, const Vector& r, Vector& z) const {
  const Vector& dinv = inverse_diagonal_[static_cast<std::size_t>(level)];
  if (smoother_ == Smoother::Diagonal) {
    z = dinv.cwiseProduct(r);
    return;
  }
  // Symmetric Gauss-Seidel: z = (D + U)^{-1} D (D + L)^{-1} r.
  const SparseMatrix& a = levels_[static_cast<std::size_t>(level)];
  const int n = static_cast<int>(a.rows());
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const double* values = a.valuePtr();
  z.resize(n);
  for (int i = 0; i < n; ++i) {
    double s = r(i);
    for (int k = outer[i]; k < outer[i + 1] && inner[k] < i; ++k) s -= values[k] * z(inner[k]);
    z(i) = s * dinv(i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = 0.0;
    for (int k = outer[i + 1] - 1; k >= outer[i] && inner[k] > i; --k) s += values[k] * z(inner[k]);
    z(i) -= s * dinv(i);
  }
}

void Bpx::apply(const Vector& in, Vector& out) const {
  const int finest = hierarchy_->finest_level();
  std::vector<Vector> residual(static_cast<std::size_t>(finest) + 1);
  residual.back() = in;
  for (int l = finest - 1; l >= 0; --l)
    residual[static_cast<std::size_t>(l)] = hierarchy_->prolongation(l).transpose() * residual[static_cast<std::size_t>(l) + 1];
  Vector y;
  Vector z;
  smooth(0, residual[0], y);
  for (int l = 1; l <= finest; ++l) {
    Vector up = hierarchy_->prolongation(l - 1) * y;
    smooth(l, residual[static_cast<std::size_t>(l)], z);
    y = up + z;
  }
  out = std::move(y);
}

PencilHierarchy::PencilHierarchy(const Hierarchy& hierarchy, const SparseMatrix& mass, const SparseMatrix& operator_a)
    : hierarchy_(&hierarchy), mass_(hierarchy.coarsen(mass)), a_(hierarchy.coarsen(operator_a)) {}

SparseMatrix PencilHierarchy::combine(double alpha, double gamma) const {
  return SparseMatrix(alpha * mass_.back() + gamma * a_.back());
}

Bpx PencilHierarchy::preconditioner(double alpha, double gamma, Smoother smoother) const {
  std::vector<SparseMatrix> levels;
  levels.reserve(mass_.size());
  for (std::size_t l = 0; l < mass_.size(); ++l) {
    if (smoother == Smoother::Diagonal) {
      // The diagonal smoother reads only the diagonal.
      SparseMatrix d(mass_[l].rows(), mass_[l].cols());
      d.reserve(Eigen::VectorXi::Constant(d.rows(), 1));
      const Vector diag = alpha * mass_[l].diagonal() + gamma * a_[l].diagonal();
      for (Eigen::Index i = 0; i < d.rows(); ++i) d.insert(i, i) = diag(i);
      d.makeCompressed();
      levels.push_back(std::move(d));
    } else {
      levels.emplace_back(alpha * mass_[l] + gamma * a_[l]);
    }
  }
  return Bpx(*hierarchy_, std::move(levels), smoother);
}

namespace {

/// Deterministic start vector with entries in [0.5, 1.5).
Vector start_vector(Eigen::Index n) {
  std::mt19937_64 gen(20240607);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 0.5 + static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return v;
}

}  // namespace

SpectralBounds power_bounds(const SparseMatrix& m, int steps) {
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "power_bounds needs at least one step");
  if (m.rows() != m.cols() || m.rows() == 0) throw Error(ErrorKind::InvalidArgument, "power_bounds needs a square matrix");
  SpectralBounds out;

  Vector v = start_vector(m.rows());
  v.normalize();
  Vector w;
  for (int s = 0; s < steps; ++s) {
    w.noalias() = m * v;
    out.lambda_max = v.dot(w);
    v = w.normalized();
  }

  // Inverse iteration; each step solves M x = v by Jacobi-preconditioned CG.
  struct Jacobi final : LinearOperator {
    Vector dinv;
    [[nodiscard]] int size() const override { return static_cast<int>(dinv.size()); }
    void apply(const Vector& in, Vector& o) const override { o = dinv.cwiseProduct(in); }
  } jacobi;
  jacobi.dinv = m.diagonal().cwiseInverse();
  const CgOptions opts{1e-10, 10 * static_cast<int>(m.rows()) + 100};
  v = start_vector(m.rows()).normalized();
  for (int s = 0; s < steps; ++s) {
    v = cg(m, v, opts, &jacobi).x.normalized();
    out.lambda_min = v.dot(m * v);
  }
  out.lower = 0.9 * out.lambda_min;
  out.upper = 1.1 * out.lambda_max;
  return out;
}

}  // namespace igagrf::linalg
