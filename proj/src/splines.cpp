#include "igagrf/splines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "igagrf/error.hpp"

namespace igagrf::splines {

KnotVector::KnotVector(int degree, std::vector<double> knots)
    : degree_(degree), knots_(std::move(knots)) {
  if (degree_ < 0) throw Error(ErrorKind::InvalidArgument, "negative spline degree");
  const auto p = static_cast<std::size_t>(degree_);
  if (knots_.size() < 2 * p + 2)
    throw Error(ErrorKind::InvalidArgument, "knot vector too short for degree " + std::to_string(degree_));
  for (std::size_t i = 0; i <= p; ++i) {
    if (knots_[i] != 0.0 || knots_[knots_.size() - 1 - i] != 1.0)
      throw Error(ErrorKind::InvalidArgument, "knot vector is not p-open on [0,1]");
  }
  for (std::size_t i = p; i + p + 1 < knots_.size(); ++i) {
    if (!(knots_[i + 1] > knots_[i]))
      throw Error(ErrorKind::InvalidArgument, "interior knots must be simple and increasing");
  }
  double hmin = 1.0;
  for (std::size_t i = p; i + p + 1 < knots_.size(); ++i) {
    const double h = knots_[i + 1] - knots_[i];
    mesh_size_ = std::max(mesh_size_, h);
    hmin = std::min(hmin, h);
  }
  theta_ = hmin / mesh_size_;
}

KnotVector KnotVector::dyadic(int level, int degree) {
  if (level < 0 || level > 24) throw Error(ErrorKind::InvalidArgument, "refinement level out of range");
  if (degree < 0) throw Error(ErrorKind::InvalidArgument, "negative spline degree");
  const int intervals = 1 << level;
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(intervals + 2 * degree + 1));
  knots.insert(knots.end(), static_cast<std::size_t>(degree + 1), 0.0);
  for (int k = 1; k < intervals; ++k) knots.push_back(std::ldexp(static_cast<double>(k), -level));
  knots.insert(knots.end(), static_cast<std::size_t>(degree + 1), 1.0);
  return KnotVector(degree, std::move(knots));
}

double KnotVector::greville(int i) const {
  if (degree_ == 0) return 0.5 * (knots_[i] + knots_[i + 1]);
  double sum = 0.0;
  for (int k = 1; k <= degree_; ++k) sum += knots_[static_cast<std::size_t>(i + k)];
  return sum / degree_;
}

int find_span(const KnotVector& kv, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorKind::Domain, "evaluation point outside [0,1]");
  const int p = kv.degree();
  const int n = kv.size();
  if (x >= kv[static_cast<std::size_t>(n)]) return n - 1;
  const auto knots = kv.knots();
  // first knot strictly greater than x, searched among knots p+1..n
  const auto it = std::upper_bound(knots.begin() + p + 1, knots.begin() + n + 1, x);
  return static_cast<int>(it - knots.begin()) - 1;
}

BasisValues eval_basis(const KnotVector& kv, double x, int max_order) {
  const int p = kv.degree();
  if (max_order < 0 || max_order > p)
    throw Error(ErrorKind::InvalidArgument, "derivative order must lie in [0, degree]");
  const int span = find_span(kv, x);

  // Triangular table of basis values of all degrees with knot differences
  // stored below the diagonal.
  const int q = p + 1;
  std::vector<double> ndu(static_cast<std::size_t>(q * q));
  auto at = [&](int r, int c) -> double& { return ndu[static_cast<std::size_t>(r * q + c)]; };
  std::vector<double> left(static_cast<std::size_t>(q)), right(static_cast<std::size_t>(q));
  at(0, 0) = 1.0;
  for (int k = 1; k <= p; ++k) {
    left[k] = x - kv[static_cast<std::size_t>(span + 1 - k)];
    right[k] = kv[static_cast<std::size_t>(span + k)] - x;
    double saved = 0.0;
    for (int r = 0; r < k; ++r) {
      at(k, r) = right[r + 1] + left[k - r];
      const double temp = at(r, k - 1) / at(k, r);
      at(r, k) = saved + right[r + 1] * temp;
      saved = left[k - r] * temp;
    }
    at(k, k) = saved;
  }

  BasisValues out;
  out.first = span - p;
  out.degree = p;
  out.max_order = max_order;
  out.data.assign(static_cast<std::size_t>((max_order + 1) * q), 0.0);
  auto ders = [&](int k, int r) -> double& { return out.data[static_cast<std::size_t>(k * q + r)]; };
  for (int r = 0; r <= p; ++r) ders(0, r) = at(r, p);

  std::vector<double> a(static_cast<std::size_t>(2 * q));
  for (int r = 0; r <= p; ++r) {
    double* a0 = a.data();
    double* a1 = a.data() + q;
    a0[0] = 1.0;
    for (int k = 1; k <= max_order; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a1[0] = a0[0] / at(pk + 1, rk);
        d = a1[0] * at(rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int jj = j1; jj <= j2; ++jj) {
        a1[jj] = (a0[jj] - a0[jj - 1]) / at(pk + 1, rk + jj);
        d += a1[jj] * at(rk + jj, pk);
      }
      if (r <= pk) {
        a1[k] = -a0[k - 1] / at(pk + 1, r);
        d += a1[k] * at(r, pk);
      }
      ders(k, r) = d;
      std::swap(a0, a1);
    }
  }
  double factor = p;
  for (int k = 1; k <= max_order; ++k) {
    for (int r = 0; r <= p; ++r) ders(k, r) *= factor;
    factor *= (p - k);
  }
  return out;
}

double eval_spline(const KnotVector& kv, std::span<const double> coeffs, double x) {
  if (static_cast<int>(coeffs.size()) != kv.size())
    throw Error(ErrorKind::InvalidArgument, "coefficient count does not match basis size");
  const BasisValues b = eval_basis(kv, x);
  double s = 0.0;
  for (int r = 0; r < b.count(); ++r) s += coeffs[static_cast<std::size_t>(b.first + r)] * b(0, r);
  return s;
}

SparseMatrix insertion_matrix(const KnotVector& coarse, const KnotVector& fine) {
  const int p = coarse.degree();
  if (fine.degree() != p) throw Error(ErrorKind::InvalidArgument, "knot vectors of different degree");
  const auto ck = coarse.knots();
  const auto fk = fine.knots();
  for (double k : ck) {
    if (!std::binary_search(fk.begin(), fk.end(), k))
      throw Error(ErrorKind::InvalidArgument, "fine knot vector does not refine the coarse one");
  }

  // Oslo algorithm: row i of T is the product R_1(tau_{i+1}) ... R_p(tau_{i+p})
  // of B-spline matrices on the coarse knots, located at the coarse span of tau_i.
  const int nf = fine.size();
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(nf * (p + 1)));
  std::vector<double> row(static_cast<std::size_t>(p + 1));
  for (int i = 0; i < nf; ++i) {
    const int mu = find_span(coarse, fk[static_cast<std::size_t>(i)]);
    row.assign(row.size(), 0.0);
    row[0] = 1.0;
    for (int k = 1; k <= p; ++k) {
      const double x = fk[static_cast<std::size_t>(i + k)];
      double saved = 0.0;
      for (int r = 0; r < k; ++r) {
        const double lo = ck[static_cast<std::size_t>(mu + 1 - k + r)];
        const double hi = ck[static_cast<std::size_t>(mu + 1 + r)];
        const double temp = row[r] / (hi - lo);
        row[r] = saved + (hi - x) * temp;
        saved = (x - lo) * temp;
      }
      row[k] = saved;
    }
    for (int r = 0; r <= p; ++r) {
      if (row[r] != 0.0) entries.emplace_back(i, mu - p + r, row[r]);
    }
  }
  SparseMatrix t(nf, coarse.size());
  t.setFromTriplets(entries.begin(), entries.end());
  return t;
}

SparseMatrix prolongation_1d(int degree, int level) {
  if (level < 0) throw Error(ErrorKind::InvalidArgument, "negative refinement level");
  return insertion_matrix(KnotVector::dyadic(level, degree), KnotVector::dyadic(level + 1, degree));
}

}  // namespace igagrf::splines
