#include "igagrf/fractional.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include "igagrf/error.hpp"

namespace igagrf::fractional {

namespace {

// Remainders this close to an integer are treated as integers.
constexpr double kIntegerSlack = 1e-12;

Stage integer_stage(int n) { return {Stage::Kind::Integer, n, static_cast<double>(n), 0}; }
Stage sinc_stage(double b, int k) { return {Stage::Kind::Sinc, 0, b, k}; }

class Jacobi final : public linalg::LinearOperator {
 public:
  explicit Jacobi(Vector diagonal) : inverse_(diagonal.cwiseInverse()) {}
  [[nodiscard]] int size() const override { return static_cast<int>(inverse_.size()); }
  void apply(const Vector& in, Vector& out) const override { out = inverse_.cwiseProduct(in); }

 private:
  Vector inverse_;
};

}  // namespace

double FractionalPlan::exponent_sum() const {
  double s = 0.0;
  for (const auto& st : stages) s += st.exponent;
  return s;
}

int FractionalPlan::total_solves() const {
  int n = 0;
  for (const auto& st : stages) n += st.kind == Stage::Kind::Integer ? st.solves : 2 * st.quadrature + 1;
  return n;
}

void FractionalPlan::set_quadrature(int k) {
  for (auto& st : stages)
    if (st.kind == Stage::Kind::Sinc) st.quadrature = k;
}

FractionalPlan split_beta(double beta, bool improved, int quadrature) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorKind::Domain, "beta must be positive");
  if (quadrature < 0) throw Error(ErrorKind::InvalidArgument, "quadrature count must be non-negative");
  FractionalPlan plan;
  plan.beta = beta;
  plan.improved = improved;
  int n = static_cast<int>(std::floor(beta));
  double rest = beta - n;
  if (rest >= 1.0 - kIntegerSlack) {
    ++n;
    rest = 0.0;
  } else if (rest <= kIntegerSlack) {
    rest = 0.0;
  }

  auto plain = [&] {
    if (n > 0) plan.stages.push_back(integer_stage(n));
    if (rest > 0.0) plan.stages.push_back(sinc_stage(rest, quadrature));
  };

  if (!improved || rest == 0.0 || (rest >= 1.0 / 3.0 && rest <= 2.0 / 3.0)) {
    plain();
  } else if (rest < 1.0 / 3.0) {
    if (n == 0) {
      plan.fallback = true;
      plain();
    } else {
      if (n > 1) plan.stages.push_back(integer_stage(n - 1));
      const double half = (rest + 1.0) / 2.0;
      plan.stages.push_back(sinc_stage(half, quadrature));
      plan.stages.push_back(sinc_stage(half, quadrature));
    }
  } else {
    if (n > 0) plan.stages.push_back(integer_stage(n));
    plan.stages.push_back(sinc_stage(rest / 2.0, quadrature));
    plan.stages.push_back(sinc_stage(rest / 2.0, quadrature));
  }
  return plan;
}

int default_quadrature(double sinc_exponent, int level, int degree) {
  if (!(sinc_exponent > 0.0 && sinc_exponent < 1.0)) throw Error(ErrorKind::Domain, "sinc exponent must lie in (0,1)");
  const double decay = 2.0 * std::min(sinc_exponent, 1.0 - sinc_exponent);
  const double root = level * (degree + 1) * std::numbers::ln2 / decay;
  return std::max(1, static_cast<int>(std::ceil(root * root)));
}

PencilSolver::PencilSolver(SparseMatrix mass, SparseMatrix operator_a, SolverOptions options)
    : mass_(std::move(mass)), a_(std::move(operator_a)), options_(options) {
  if (mass_.rows() != mass_.cols() || a_.rows() != a_.cols() || mass_.rows() != a_.rows())
    throw Error(ErrorKind::InvalidArgument, "pencil matrices must be square and of equal size");
}

PencilSolver::PencilSolver(std::shared_ptr<const linalg::PencilHierarchy> hierarchy, SolverOptions options)
    : hierarchy_(std::move(hierarchy)), options_(options) {
  if (!hierarchy_) throw Error(ErrorKind::InvalidArgument, "missing pencil hierarchy");
}

const SparseMatrix& PencilSolver::mass() const { return hierarchy_ ? hierarchy_->mass() : mass_; }
const SparseMatrix& PencilSolver::operator_a() const { return hierarchy_ ? hierarchy_->operator_a() : a_; }

Vector PencilSolver::solve(double alpha, double gamma, const Vector& rhs, SolveStats* stats) const {
  const linalg::CgOptions cg_options{options_.tolerance, options_.max_iterations};
  linalg::CgResult result;
  if (hierarchy_) {
    const SparseMatrix shifted = hierarchy_->combine(alpha, gamma);
    const linalg::Bpx bpx = hierarchy_->preconditioner(alpha, gamma, options_.smoother);
    result = linalg::cg(shifted, rhs, cg_options, &bpx);
  } else {
    const SparseMatrix shifted = alpha * mass_ + gamma * a_;
    const Jacobi jacobi(shifted.diagonal());
    result = linalg::cg(shifted, rhs, cg_options, &jacobi);
  }
  if (stats) {
    ++stats->solves;
    stats->iterations += result.report.iterations;
    stats->seconds += result.report.seconds;
  }
  return std::move(result.x);
}

Vector solve_integer(const PencilSolver& solver, const Vector& f, int n, SolveStats* stats) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "integer power must be at least 1");
  Vector w = solver.solve(0.0, 1.0, f, stats);
  for (int k = 2; k <= n; ++k) w = solver.solve(0.0, 1.0, solver.mass() * w, stats);
  return w;
}

Vector sinc_apply(const PencilSolver& solver, const Vector& f, double beta, int k, SolveStats* stats) {
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorKind::Domain, "sinc exponent must lie in (0,1)");
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "sinc quadrature needs K >= 1");
  const double h = 1.0 / std::sqrt(static_cast<double>(k));
  const int count = 2 * k + 1;
  std::vector<Vector> terms(static_cast<std::size_t>(count));
  std::vector<SolveStats> term_stats(static_cast<std::size_t>(count));
  std::vector<std::string> failures(static_cast<std::size_t>(count));
  std::vector<ErrorKind> failure_kind(static_cast<std::size_t>(count), ErrorKind::MaxIterations);
  bool failed = false;

  // Shifts are independent; the weighted sum is formed afterwards in index order.
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    const double t = (i - k) * h;
    // e^{2bt} (M + e^{2t} A)^{-1} = e^{2(b-1)t} (e^{-2t} M + A)^{-1}; the
    // scaling keeps the larger coefficient at one.
    const double alpha = t <= 0.0 ? 1.0 : std::exp(-2.0 * t);
    const double gamma = t <= 0.0 ? std::exp(2.0 * t) : 1.0;
    const double weight = t <= 0.0 ? std::exp(2.0 * beta * t) : std::exp(2.0 * (beta - 1.0) * t);
    try {
      terms[static_cast<std::size_t>(i)] = weight * solver.solve(alpha, gamma, f, &term_stats[static_cast<std::size_t>(i)]);
    } catch (const Error& e) {
      failures[static_cast<std::size_t>(i)] = e.what();
      failure_kind[static_cast<std::size_t>(i)] = e.kind();
#pragma omp atomic write
      failed = true;
    }
  }
  if (failed) {
    for (int i = 0; i < count; ++i)
      if (!failures[static_cast<std::size_t>(i)].empty())
        throw Error(failure_kind[static_cast<std::size_t>(i)],
                    "sinc shift k = " + std::to_string(i - k) + ": " + failures[static_cast<std::size_t>(i)]);
  }

  Vector u = Vector::Zero(f.size());
  for (int i = 0; i < count; ++i) {
    u += terms[static_cast<std::size_t>(i)];
    if (stats) {
      stats->solves += term_stats[static_cast<std::size_t>(i)].solves;
      stats->iterations += term_stats[static_cast<std::size_t>(i)].iterations;
      stats->seconds += term_stats[static_cast<std::size_t>(i)].seconds;
    }
  }
  return (2.0 * std::sin(std::numbers::pi * beta) * h / std::numbers::pi) * u;
}

Vector solve_fractional(const PencilSolver& solver, const Vector& f, const FractionalPlan& plan, SolveStats* stats) {
  if (plan.stages.empty()) throw Error(ErrorKind::InvalidArgument, "empty fractional plan");
  Vector u;
  bool first = true;
  for (const auto& stage : plan.stages) {
    const Vector rhs = first ? f : Vector(solver.mass() * u);
    first = false;
    if (stage.kind == Stage::Kind::Integer) {
      u = solve_integer(solver, rhs, stage.solves, stats);
    } else {
      if (stage.quadrature < 1) throw Error(ErrorKind::InvalidArgument, "sinc stage without quadrature count");
      u = sinc_apply(solver, rhs, stage.exponent, stage.quadrature, stats);
    }
  }
  return u;
}

}  // namespace igagrf::fractional
