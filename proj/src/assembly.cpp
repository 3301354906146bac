#include "igagrf/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <unordered_map>

#include "igagrf/error.hpp"
#include "igagrf/quadrature.hpp"

namespace igagrf::assembly {

namespace {

constexpr double kAnchorTolerance = 1e-9;
constexpr int kMaxDegree = 5;
constexpr int kMaxLocal = (kMaxDegree + 1) * (kMaxDegree + 1);
constexpr int kMaxQuadrature = 64;

using LocalMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxLocal, kMaxLocal>;
using LocalTable = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxLocal, kMaxQuadrature>;

struct CellKey {
  long long x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::size_t h = static_cast<std::size_t>(k.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::size_t>(k.y) + 0x632BE59BD9B4E019ull + (h << 6) + (h >> 2);
    h ^= static_cast<std::size_t>(k.z) + 0x85EBCA77C2B2AE63ull + (h << 6) + (h >> 2);
    return h;
  }
};

/// Nonzero basis values and first derivatives of one direction at the Gauss
/// points of every knot span.
struct SpanTable {
  int degree = 0;
  int points = 0;
  std::vector<double> x;       // [span][g]
  std::vector<double> weight;  // [span][g], includes the span length
  std::vector<double> value;   // [span][g][r]
  std::vector<double> deriv;   // [span][g][r]

  SpanTable(const splines::KnotVector& kv, const GaussRule& rule) : degree(kv.degree()), points(rule.size()) {
    const int spans = kv.num_spans();
    const int q = degree + 1;
    x.resize(static_cast<std::size_t>(spans * points));
    weight.resize(x.size());
    value.resize(x.size() * static_cast<std::size_t>(q));
    deriv.resize(value.size());
    for (int e = 0; e < spans; ++e) {
      const double a = kv[static_cast<std::size_t>(kv.span_index(e))];
      const double b = kv[static_cast<std::size_t>(kv.span_index(e) + 1)];
      for (int g = 0; g < points; ++g) {
        const auto idx = static_cast<std::size_t>(e * points + g);
        x[idx] = a + (b - a) * rule.points[static_cast<std::size_t>(g)];
        weight[idx] = (b - a) * rule.weights[static_cast<std::size_t>(g)];
        const auto basis = splines::eval_basis(kv, x[idx], std::min(1, degree));
        for (int r = 0; r < q; ++r) {
          value[idx * q + r] = basis(0, r);
          deriv[idx * q + r] = degree > 0 ? basis(1, r) : 0.0;
        }
      }
    }
  }

  [[nodiscard]] double v(int e, int g, int r) const {
    return value[static_cast<std::size_t>((e * points + g) * (degree + 1) + r)];
  }
  [[nodiscard]] double d(int e, int g, int r) const {
    return deriv[static_cast<std::size_t>((e * points + g) * (degree + 1) + r)];
  }
  [[nodiscard]] double at(int e, int g) const { return x[static_cast<std::size_t>(e * points + g)]; }
  [[nodiscard]] double w(int e, int g) const { return weight[static_cast<std::size_t>(e * points + g)]; }
};

int resolve_quadrature(const DiscreteSpace& space, int requested) {
  const int q = requested > 0 ? requested : space.degree() + 1;
  if (q * q > kMaxQuadrature) throw Error(ErrorKind::InvalidArgument, "too many quadrature points per element");
  return q;
}

struct Element {
  int patch;
  int e1;
  int e2;
};

std::vector<Element> elements_of(const DiscreteSpace& space) {
  const int spans = space.knots().num_spans();
  std::vector<Element> out;
  out.reserve(static_cast<std::size_t>(space.surface().num_patches() * spans * spans));
  for (int m = 0; m < space.surface().num_patches(); ++m)
    for (int e1 = 0; e1 < spans; ++e1)
      for (int e2 = 0; e2 < spans; ++e2) out.push_back({m, e1, e2});
  return out;
}

void local_dofs(const DiscreteSpace& space, const Element& el, std::array<int, kMaxLocal>& dofs) {
  const int q = space.degree() + 1;
  for (int a1 = 0; a1 < q; ++a1)
    for (int a2 = 0; a2 < q; ++a2) dofs[static_cast<std::size_t>(a1 * q + a2)] = space.global_index(el.patch, el.e1 + a1, el.e2 + a2);
}

/// Basis values, parametric gradients and geometric factors at the
/// quadrature points of one element.
struct ElementData {
  LocalTable phi;   // local function x quadrature point
  LocalTable dphi_x;
  LocalTable dphi_y;
  std::array<double, kMaxQuadrature> wa{};      // weight * surface measure
  std::array<Mat2, kMaxQuadrature> kinv_wa;     // weight * measure * K^-1
  std::array<Vec3, kMaxQuadrature> points;
  std::array<Vec2, kMaxQuadrature> xhat;
  int nq = 0;
};

void compute_element(const DiscreteSpace& space, const SpanTable& table, const Element& el, bool need_gradients,
                     ElementData& data) {
  const int q = space.degree() + 1;
  const int ng = table.points;
  const int nloc = q * q;
  data.nq = ng * ng;
  data.phi.resize(nloc, data.nq);
  if (need_gradients) {
    data.dphi_x.resize(nloc, data.nq);
    data.dphi_y.resize(nloc, data.nq);
  }
  const auto& patch = space.surface().patch(el.patch);
  for (int g1 = 0; g1 < ng; ++g1) {
    for (int g2 = 0; g2 < ng; ++g2) {
      const int k = g1 * ng + g2;
      const Vec2 xhat(table.at(el.e1, g1), table.at(el.e2, g2));
      const auto ev = patch.eval(xhat);
      const double a = geometry::surface_measure(ev.jacobian);
      const double wa = table.w(el.e1, g1) * table.w(el.e2, g2) * a;
      data.wa[static_cast<std::size_t>(k)] = wa;
      data.points[static_cast<std::size_t>(k)] = ev.point;
      data.xhat[static_cast<std::size_t>(k)] = xhat;
      if (need_gradients) {
        const Mat2 kt = geometry::first_fundamental(ev.jacobian);
        data.kinv_wa[static_cast<std::size_t>(k)] = wa * kt.inverse();
      }
      for (int a1 = 0; a1 < q; ++a1) {
        for (int a2 = 0; a2 < q; ++a2) {
          const int r = a1 * q + a2;
          const double b1 = table.v(el.e1, g1, a1);
          const double b2 = table.v(el.e2, g2, a2);
          data.phi(r, k) = b1 * b2;
          if (need_gradients) {
            data.dphi_x(r, k) = table.d(el.e1, g1, a1) * b2;
            data.dphi_y(r, k) = b1 * table.d(el.e2, g2, a2);
          }
        }
      }
    }
  }
}

/// CSR sparsity pattern of all pairs of functions sharing a patch element.
SparseMatrix sparsity_pattern(const DiscreteSpace& space) {
  const int n = space.local_size();
  const int p = space.degree();
  const int dim = space.size();
  std::vector<long long> counts(static_cast<std::size_t>(dim) + 1, 0);
  auto range = [&](int l) { return std::min(l + p, n - 1) - std::max(l - p, 0) + 1; };
  for (int m = 0; m < space.surface().num_patches(); ++m)
    for (int l1 = 0; l1 < n; ++l1)
      for (int l2 = 0; l2 < n; ++l2) counts[static_cast<std::size_t>(space.global_index(m, l1, l2)) + 1] += range(l1) * range(l2);
  for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
  std::vector<int> cols(static_cast<std::size_t>(counts.back()));
  std::vector<long long> fill(counts.begin(), counts.end() - 1);
  for (int m = 0; m < space.surface().num_patches(); ++m) {
    for (int l1 = 0; l1 < n; ++l1) {
      for (int l2 = 0; l2 < n; ++l2) {
        auto& pos = fill[static_cast<std::size_t>(space.global_index(m, l1, l2))];
        for (int k1 = std::max(l1 - p, 0); k1 <= std::min(l1 + p, n - 1); ++k1)
          for (int k2 = std::max(l2 - p, 0); k2 <= std::min(l2 + p, n - 1); ++k2)
            cols[static_cast<std::size_t>(pos++)] = space.global_index(m, k1, k2);
      }
    }
  }
  SparseMatrix pattern(dim, dim);
  std::vector<int> outer(static_cast<std::size_t>(dim) + 1, 0);
  std::size_t nnz = 0;
  for (int r = 0; r < dim; ++r) {
    auto first = cols.begin() + counts[static_cast<std::size_t>(r)];
    auto last = cols.begin() + counts[static_cast<std::size_t>(r) + 1];
    std::sort(first, last);
    last = std::unique(first, last);
    for (auto it = first; it != last; ++it) cols[nnz++] = *it;
    outer[static_cast<std::size_t>(r) + 1] = static_cast<int>(nnz);
  }
  pattern.resizeNonZeros(static_cast<Eigen::Index>(nnz));
  std::copy(outer.begin(), outer.end(), pattern.outerIndexPtr());
  std::copy(cols.begin(), cols.begin() + static_cast<std::ptrdiff_t>(nnz), pattern.innerIndexPtr());
  std::fill(pattern.valuePtr(), pattern.valuePtr() + nnz, 0.0);
  return pattern;
}

void scatter(SparseMatrix& target, const std::array<int, kMaxLocal>& dofs, int nloc, const LocalMatrix& local) {
  const int* outer = target.outerIndexPtr();
  const int* inner = target.innerIndexPtr();
  double* values = target.valuePtr();
  for (int a = 0; a < nloc; ++a) {
    const int row = dofs[static_cast<std::size_t>(a)];
    const int* begin = inner + outer[row];
    const int* end = inner + outer[row + 1];
    for (int b = 0; b < nloc; ++b) {
      const int* it = std::lower_bound(begin, end, dofs[static_cast<std::size_t>(b)]);
      values[it - inner] += local(a, b);
    }
  }
}

constexpr std::size_t kBatch = 2048;

}  // namespace

DiscreteSpace::DiscreteSpace(SurfacePtr surface, int level, int degree)
    : surface_(std::move(surface)),
      level_(level),
      degree_(degree),
      knots_((degree >= 1 && degree <= kMaxDegree && level >= 0)
                 ? splines::KnotVector::dyadic(level, degree)
                 : throw Error(ErrorKind::InvalidArgument, "supported spaces: level >= 0 and 1 <= degree <= 5")),
      local_size_(knots_.size()) {
  if (!surface_) throw Error(ErrorKind::InvalidArgument, "space without surface");
  const int n = local_size_;
  const int patches = surface_->num_patches();
  dof_map_.assign(static_cast<std::size_t>(patches * n * n), -1);

  const double cell = 1e-6;
  std::unordered_map<CellKey, std::vector<std::pair<Vec3, int>>, CellHash> anchors;
  auto key_of = [&](const Vec3& x) {
    return CellKey{static_cast<long long>(std::floor(x.x() / cell)), static_cast<long long>(std::floor(x.y() / cell)),
                   static_cast<long long>(std::floor(x.z() / cell))};
  };
  std::vector<double> greville(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) greville[static_cast<std::size_t>(l)] = knots_.greville(l);

  int next = 0;
  for (int m = 0; m < patches; ++m) {
    for (int l1 = 0; l1 < n; ++l1) {
      for (int l2 = 0; l2 < n; ++l2) {
        int& id = dof_map_[static_cast<std::size_t>((m * n + l1) * n + l2)];
        const bool boundary = l1 == 0 || l2 == 0 || l1 == n - 1 || l2 == n - 1;
        if (!boundary) {
          id = next++;
          continue;
        }
        const Vec3 x = surface_->patch(m).eval(Vec2(greville[static_cast<std::size_t>(l1)], greville[static_cast<std::size_t>(l2)])).point;
        const CellKey k = key_of(x);
        for (long long dx = -1; dx <= 1 && id < 0; ++dx)
          for (long long dy = -1; dy <= 1 && id < 0; ++dy)
            for (long long dz = -1; dz <= 1 && id < 0; ++dz) {
              const auto it = anchors.find({k.x + dx, k.y + dy, k.z + dz});
              if (it == anchors.end()) continue;
              for (const auto& [pt, other] : it->second) {
                if ((pt - x).norm() <= kAnchorTolerance) {
                  id = other;
                  break;
                }
              }
            }
        if (id < 0) {
          id = next++;
          anchors[k].emplace_back(x, id);
        }
      }
    }
  }
  size_ = next;
}

double DiscreteSpace::evaluate(std::span<const double> coeffs, int patch, const Vec2& xhat) const {
  if (static_cast<int>(coeffs.size()) != size_)
    throw Error(ErrorKind::InvalidArgument, "coefficient vector does not match the space dimension");
  const auto b1 = splines::eval_basis(knots_, xhat.x());
  const auto b2 = splines::eval_basis(knots_, xhat.y());
  double s = 0.0;
  for (int a1 = 0; a1 < b1.count(); ++a1)
    for (int a2 = 0; a2 < b2.count(); ++a2)
      s += b1(0, a1) * b2(0, a2) * coeffs[static_cast<std::size_t>(global_index(patch, b1.first + a1, b2.first + a2))];
  return s;
}

DiscreteSpace build_space(SurfacePtr surface, int level, int degree) {
  return DiscreteSpace(std::move(surface), level, degree);
}

namespace {

void assemble_matrices(const DiscreteSpace& space, const AssemblyOptions& options, SparseMatrix* mass,
                       SparseMatrix* stiffness) {
  const int q = resolve_quadrature(space, options.quadrature_points);
  const SpanTable table(space.knots(), gauss_legendre(q));
  const SparseMatrix pattern = sparsity_pattern(space);
  if (mass) *mass = pattern;
  if (stiffness) *stiffness = pattern;
  const bool gradients = stiffness != nullptr;

  const auto elements = elements_of(space);
  const int nloc = (space.degree() + 1) * (space.degree() + 1);
  std::vector<LocalMatrix> mloc(kBatch), sloc(kBatch);
  std::vector<std::array<int, kMaxLocal>> dofs(kBatch);
  for (std::size_t start = 0; start < elements.size(); start += kBatch) {
    const auto count = static_cast<long>(std::min(kBatch, elements.size() - start));
    bool singular = false;
#pragma omp parallel for schedule(static)
    for (long i = 0; i < count; ++i) {
      const Element& el = elements[start + static_cast<std::size_t>(i)];
      ElementData data;
      try {
        compute_element(space, table, el, gradients, data);
      } catch (const Error&) {
#pragma omp atomic write
        singular = true;
        continue;
      }
      local_dofs(space, el, dofs[static_cast<std::size_t>(i)]);
      if (mass) {
        LocalMatrix& m = mloc[static_cast<std::size_t>(i)];
        m.resize(nloc, nloc);
        for (int a = 0; a < nloc; ++a) {
          for (int b = a; b < nloc; ++b) {
            double s = 0.0;
            for (int k = 0; k < data.nq; ++k) s += data.wa[static_cast<std::size_t>(k)] * data.phi(a, k) * data.phi(b, k);
            m(a, b) = s;
            m(b, a) = s;
          }
        }
      }
      if (stiffness) {
        LocalMatrix& s = sloc[static_cast<std::size_t>(i)];
        s.resize(nloc, nloc);
        for (int a = 0; a < nloc; ++a) {
          for (int b = a; b < nloc; ++b) {
            double v = 0.0;
            for (int k = 0; k < data.nq; ++k) {
              const Mat2& c = data.kinv_wa[static_cast<std::size_t>(k)];
              const double ax = data.dphi_x(a, k), ay = data.dphi_y(a, k);
              const double bx = data.dphi_x(b, k), by = data.dphi_y(b, k);
              v += ax * (c(0, 0) * bx + c(0, 1) * by) + ay * (c(1, 0) * bx + c(1, 1) * by);
            }
            s(a, b) = v;
            s(b, a) = v;
          }
        }
      }
    }
    if (singular) throw Error(ErrorKind::SingularGeometry, "degenerate parametrization at a quadrature point");
    for (long i = 0; i < count; ++i) {
      const auto& d = dofs[static_cast<std::size_t>(i)];
      if (mass) scatter(*mass, d, nloc, mloc[static_cast<std::size_t>(i)]);
      if (stiffness) scatter(*stiffness, d, nloc, sloc[static_cast<std::size_t>(i)]);
    }
  }
}

}  // namespace

GalerkinSystem assemble_system(const DiscreteSpace& space, const AssemblyOptions& options) {
  GalerkinSystem sys;
  assemble_matrices(space, options, &sys.mass, &sys.stiffness);
  return sys;
}

SparseMatrix assemble_mass(const DiscreteSpace& space, const AssemblyOptions& options) {
  SparseMatrix m;
  assemble_matrices(space, options, &m, nullptr);
  return m;
}

SparseMatrix assemble_stiffness(const DiscreteSpace& space, const AssemblyOptions& options) {
  SparseMatrix s;
  assemble_matrices(space, options, nullptr, &s);
  return s;
}

namespace {

/// Runs body(element, data, dofs) -> per-element result in parallel batches
/// and folds the results in element order.
template <typename Result, typename Compute, typename Fold>
void for_each_element(const DiscreteSpace& space, int quadrature, Compute compute, Fold fold) {
  const SpanTable table(space.knots(), gauss_legendre(quadrature));
  const auto elements = elements_of(space);
  std::vector<Result> results(kBatch);
  std::vector<std::array<int, kMaxLocal>> dofs(kBatch);
  for (std::size_t start = 0; start < elements.size(); start += kBatch) {
    const auto count = static_cast<long>(std::min(kBatch, elements.size() - start));
    bool singular = false;
#pragma omp parallel for schedule(static)
    for (long i = 0; i < count; ++i) {
      const Element& el = elements[start + static_cast<std::size_t>(i)];
      ElementData data;
      try {
        compute_element(space, table, el, false, data);
      } catch (const Error&) {
#pragma omp atomic write
        singular = true;
        continue;
      }
      local_dofs(space, el, dofs[static_cast<std::size_t>(i)]);
      results[static_cast<std::size_t>(i)] = compute(el, data, dofs[static_cast<std::size_t>(i)]);
    }
    if (singular) throw Error(ErrorKind::SingularGeometry, "degenerate parametrization at a quadrature point");
    for (long i = 0; i < count; ++i) fold(dofs[static_cast<std::size_t>(i)], results[static_cast<std::size_t>(i)]);
  }
}

using LocalVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxLocal, 1>;

}  // namespace

Vector assemble_load(const DiscreteSpace& space, const SurfaceFunction& f, const AssemblyOptions& options) {
  const int q = resolve_quadrature(space, options.quadrature_points);
  const int nloc = (space.degree() + 1) * (space.degree() + 1);
  Vector load = Vector::Zero(space.size());
  for_each_element<LocalVector>(
      space, q,
      [&](const Element& el, const ElementData& data, const std::array<int, kMaxLocal>&) {
        LocalVector v = LocalVector::Zero(nloc);
        for (int k = 0; k < data.nq; ++k) {
          const auto kk = static_cast<std::size_t>(k);
          const double fv = f(SurfacePoint{el.patch, data.xhat[kk], data.points[kk]});
          for (int a = 0; a < nloc; ++a) v(a) += data.wa[kk] * fv * data.phi(a, k);
        }
        return v;
      },
      [&](const std::array<int, kMaxLocal>& dofs, const LocalVector& v) {
        for (int a = 0; a < nloc; ++a) load(dofs[static_cast<std::size_t>(a)]) += v(a);
      });
  return load;
}

double l2_error(const DiscreteSpace& space, std::span<const double> coeffs, const SurfaceFunction& f,
                int quadrature_points) {
  if (static_cast<int>(coeffs.size()) != space.size())
    throw Error(ErrorKind::InvalidArgument, "coefficient vector does not match the space dimension");
  const int q = quadrature_points > 0 ? quadrature_points : space.degree() + 3;
  if (q * q > kMaxQuadrature) throw Error(ErrorKind::InvalidArgument, "too many quadrature points per element");
  const int nloc = (space.degree() + 1) * (space.degree() + 1);
  double total = 0.0;
  for_each_element<double>(
      space, q,
      [&](const Element& el, const ElementData& data, const std::array<int, kMaxLocal>& dofs) {
        double s = 0.0;
        for (int k = 0; k < data.nq; ++k) {
          const auto kk = static_cast<std::size_t>(k);
          double uh = 0.0;
          for (int a = 0; a < nloc; ++a) uh += coeffs[static_cast<std::size_t>(dofs[static_cast<std::size_t>(a)])] * data.phi(a, k);
          const double diff = uh - f(SurfacePoint{el.patch, data.xhat[kk], data.points[kk]});
          s += data.wa[kk] * diff * diff;
        }
        return s;
      },
      [&](const std::array<int, kMaxLocal>&, double s) { total += s; });
  return std::sqrt(total);
}

}  // namespace igagrf::assembly
