#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "igagrf/error.hpp"
#include "igagrf/geometry.hpp"
#include "igagrf/reference.hpp"
#include "vtk.hpp"

namespace igagrf::cli {

namespace {

constexpr reference::HarmonicIndex kHarmonic{1, -1};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); }

void require_single(std::size_t count, const char* field, const char* why) {
  if (count != 1) invalid(std::string(field) + " must hold a single value " + why);
}

void require_writable(const std::string& path, const char* field) {
  if (path.empty()) return;
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent))
    invalid(std::string(field) + ": directory '" + parent.string() + "' does not exist");
}

bool is_builtin(const std::string& name) { return name == "sphere" || name == "torus"; }

linalg::Smoother smoother_of(const std::string& variant) {
  return variant == "diag" ? linalg::Smoother::Diagonal : linalg::Smoother::Ssor;
}

fractional::SolverOptions solver_options(const RunConfig& config, const std::string& variant) {
  return {config.tolerance, config.max_iterations, smoother_of(variant)};
}

double model_rhs(const assembly::SurfacePoint& x, bool on_sphere) {
  if (on_sphere) return reference::spherical_harmonic(kHarmonic, x.point);
  return std::sqrt(3.0 / (4.0 * std::numbers::pi)) * x.point.y();
}

Vector model_load(const assembly::DiscreteSpace& space, bool on_sphere) {
  return assembly::assemble_load(space, [on_sphere](const assembly::SurfacePoint& x) { return model_rhs(x, on_sphere); });
}

double model_error(const assembly::DiscreteSpace& space, const Vector& u, double beta, double kappa) {
  const double scale = reference::exact_sphere_solution(beta, kappa, kHarmonic);
  return assembly::l2_error(space, assembly::as_span(u), [scale](const assembly::SurfacePoint& x) {
    return scale * reference::spherical_harmonic(kHarmonic, x.point);
  });
}

int max_quadrature(const fractional::FractionalPlan& plan) {
  int k = 0;
  for (const auto& st : plan.stages) k = std::max(k, st.quadrature);
  return k;
}

std::string format_real(double v, const char* fmt = "%.10g") {
  if (std::isnan(v)) return {};
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error(ErrorKind::Io, "failed to write '" + path + "'");
}

void export_vtk(const RunConfig& config, const assembly::DiscreteSpace& space, const Vector& u,
                const std::string& title) {
  if (config.vtk_path.empty()) return;
  std::ostringstream text;
  write_vtk(text, space, u, config.vtk_refine, title);
  write_file(config.vtk_path, text.str());
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

template <class T>
T parse_number(const std::string& s) {
  std::size_t used = 0;
  T v{};
  try {
    if constexpr (std::is_integral_v<T>)
      v = static_cast<T>(std::stol(s, &used));
    else
      v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) throw Error(ErrorKind::Parse, "not a number: '" + s + "'");
  return v;
}

template <class T>
std::vector<T> parse_range(const std::string& text) {
  std::vector<T> out;
  for (const auto& item : split(text, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_number<T>(item));
      continue;
    }
    const auto colon = item.find(':', dots);
    const T first = parse_number<T>(item.substr(0, dots));
    const T last = parse_number<T>(item.substr(dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2));
    const T step = colon == std::string::npos ? T{1} : parse_number<T>(item.substr(colon + 1));
    if (!(step > T{0}) || last < first) throw Error(ErrorKind::Parse, "empty or ill-formed range '" + item + "'");
    if constexpr (std::is_integral_v<T>) {
      for (T v = first; v <= last; v += step) out.push_back(v);
    } else {
      const auto n = static_cast<long>(std::floor((last - first) / step + 1e-9));
      for (long i = 0; i <= n; ++i) out.push_back(first + static_cast<double>(i) * step);
    }
  }
  if (out.empty()) throw Error(ErrorKind::Parse, "empty list");
  return out;
}

}  // namespace

void validate(const RunConfig& c, Command command) {
  if (c.geometry.empty()) invalid("geometry: empty");
  if (!is_builtin(c.geometry) && !std::filesystem::is_regular_file(c.geometry))
    invalid("geometry: '" + c.geometry + "' is neither a builtin (sphere, torus) nor a file");
  if (c.levels.empty() || c.degrees.empty() || c.betas.empty() || c.quadrature.empty() || c.khat.empty())
    invalid("levels, degrees, betas, quadrature and khat must be non-empty");
  for (int j : c.levels)
    if (j < 0 || j > 12) invalid("levels: " + std::to_string(j) + " outside [0, 12]");
  for (int p : c.degrees)
    if (p < 1 || p > 5) invalid("degrees: " + std::to_string(p) + " outside [1, 5]");
  for (double b : c.betas)
    if (!(b > 0.0) || !std::isfinite(b)) invalid("betas: values must be positive");
  if (!(c.kappa > 0.0) || !std::isfinite(c.kappa)) invalid("kappa: must be positive");
  if (!(c.tolerance > 0.0 && c.tolerance < 1.0)) invalid("tolerance: must lie in (0, 1)");
  if (c.max_iterations < 1) invalid("max-iterations: must be positive");
  const bool both_allowed = command == Command::PrecondBench;
  if (c.variant != "diag" && c.variant != "ssor" && !(both_allowed && c.variant == "both"))
    invalid("variant: '" + c.variant + "' is not one of diag, ssor" + (both_allowed ? ", both" : ""));
  for (int k : c.quadrature)
    if (k < 0) invalid("quadrature: K must be non-negative");
  for (int k : c.khat)
    if (k < 1) invalid("khat: must be positive");
  if (c.vtk_refine < 0 || c.vtk_refine > 6) invalid("vtk-refine: outside [0, 6]");
  require_writable(c.csv_path, "csv");
  require_writable(c.vtk_path, "vtk");

  switch (command) {
    case Command::Solve:
      require_single(c.quadrature.size(), "quadrature", "for solve");
      if (!c.vtk_path.empty()) {
        require_single(c.levels.size(), "levels", "when exporting VTK");
        require_single(c.degrees.size(), "degrees", "when exporting VTK");
        require_single(c.betas.size(), "betas", "when exporting VTK");
      }
      break;
    case Command::Sample:
      require_single(c.levels.size(), "levels", "for sample");
      require_single(c.degrees.size(), "degrees", "for sample");
      require_single(c.betas.size(), "betas", "for sample");
      require_single(c.quadrature.size(), "quadrature", "for sample");
      require_single(c.khat.size(), "khat", "for sample");
      break;
    case Command::PrecondBench:
    case Command::SincStudy:
    case Command::SqrtStudy:
      if (!c.vtk_path.empty()) invalid("vtk: only solve and sample export fields");
      break;
  }
}

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.geometry << ',' << r.j << ',' << r.p << ',' << format_real(r.beta) << ',' << format_real(r.kappa) << ','
        << r.k << ',' << r.khat << ',' << r.variant << ',' << r.iterations << ',' << format_real(r.l2_error, "%.6e")
        << ',' << format_real(r.wall_seconds, "%.6f") << ',' << r.seed << '\n';
  }
}

std::vector<int> parse_int_range(const std::string& text) { return parse_range<int>(text); }
std::vector<double> parse_real_range(const std::string& text) { return parse_range<double>(text); }

assembly::SurfacePtr open_geometry(const std::string& name_or_path) {
  if (is_builtin(name_or_path))
    return std::make_shared<const geometry::MultipatchSurface>(geometry::builtin(name_or_path));
  return std::make_shared<const geometry::MultipatchSurface>(geometry::load_geometry(name_or_path));
}

std::string describe_plan(const fractional::FractionalPlan& plan) {
  std::string s = plan.fallback ? "fallback" : (plan.improved ? "improved" : "plain");
  char sep = ':';
  for (const auto& st : plan.stages) {
    s += sep;
    if (st.kind == fractional::Stage::Kind::Integer)
      s += "int" + std::to_string(st.solves);
    else
      s += "sinc" + format_real(st.exponent, "%.4g") + "@K" + std::to_string(st.quadrature);
    sep = ';';
  }
  return s;
}

fractional::FractionalPlan make_plan(double beta, bool improved, int quadrature, int level, int degree) {
  auto plan = fractional::split_beta(beta, improved);
  for (auto& st : plan.stages)
    if (st.kind == fractional::Stage::Kind::Sinc)
      st.quadrature = quadrature > 0 ? quadrature : fractional::default_quadrature(st.exponent, level, degree);
  return plan;
}

ModelProblem::ModelProblem(assembly::SurfacePtr surface, int level, int degree, double kappa,
                           fractional::SolverOptions options)
    : kappa_(kappa), on_sphere_(surface->name() == "sphere") {
  if (!(kappa > 0.0)) throw Error(ErrorKind::Domain, "kappa must be positive");
  hierarchy_ = std::make_shared<const linalg::Hierarchy>(std::move(surface), level, degree);
  auto sys = assembly::assemble_system(hierarchy_->finest());
  stiffness_ = std::move(sys.stiffness);
  const SparseMatrix a = kappa * kappa * sys.mass + stiffness_;
  pencil_ = std::make_shared<const linalg::PencilHierarchy>(*hierarchy_, sys.mass, a);
  solver_ = std::make_unique<fractional::PencilSolver>(pencil_, options);
  load_ = model_load(space(), on_sphere_);
}

double ModelProblem::error(const Vector& u, double beta) const {
  if (!on_sphere_) return std::numeric_limits<double>::quiet_NaN();
  return model_error(space(), u, beta, kappa_);
}

std::vector<CsvRow> run_solve(const RunConfig& config) {
  const auto surface = open_geometry(config.geometry);
  std::vector<CsvRow> rows;
  for (int j : config.levels) {
    for (int p : config.degrees) {
      const auto setup_start = Clock::now();
      const ModelProblem problem(surface, j, p, config.kappa, solver_options(config, config.variant));
      const double setup = seconds_since(setup_start);
      for (double beta : config.betas) {
        const auto start = Clock::now();
        const auto plan = make_plan(beta, config.improved, config.quadrature.front(), j, p);
        fractional::SolveStats stats;
        const Vector u = fractional::solve_fractional(problem.solver(), problem.load(), plan, &stats);
        const double wall = setup + seconds_since(start);
        rows.push_back({surface->name(), j, p, beta, config.kappa, max_quadrature(plan), 0,
                        config.variant + "/" + describe_plan(plan), stats.iterations, problem.error(u, beta), wall,
                        config.seed});
        export_vtk(config, problem.space(), u, "igagrf solve " + surface->name());
      }
    }
  }
  return rows;
}

std::vector<CsvRow> run_sample(const RunConfig& config) {
  const auto surface = open_geometry(config.geometry);
  const int j = config.levels.front(), p = config.degrees.front();
  const double beta = config.betas.front();
  sampler::SampleOptions opts;
  opts.khat = config.khat.front();
  opts.quadrature = config.quadrature.front();
  opts.improved = config.improved;
  opts.solver = solver_options(config, config.variant);
  const auto start = Clock::now();
  sampler::FieldSampler field(surface, j, p, beta, config.kappa, opts);
  sampler::NoiseStream noise(config.seed);
  const Vector u = field.draw(noise);
  const double wall = seconds_since(start);
  std::vector<CsvRow> rows{{surface->name(), j, p, beta, config.kappa, max_quadrature(field.plan()), opts.khat,
                            config.variant + "/" + describe_plan(field.plan()), field.stats().iterations,
                            std::numeric_limits<double>::quiet_NaN(), wall, config.seed}};
  export_vtk(config, field.space(), u, "igagrf sample " + surface->name() + " seed " + std::to_string(config.seed));
  return rows;
}

std::vector<CsvRow> run_precond_bench(const RunConfig& config) {
  const auto surface = open_geometry(config.geometry);
  const bool on_sphere = surface->name() == "sphere";
  std::vector<std::string> variants;
  if (config.variant == "both")
    variants = {"diag", "ssor"};
  else
    variants = {config.variant};
  std::vector<CsvRow> rows;
  for (int j : config.levels) {
    for (int p : config.degrees) {
      const auto setup_start = Clock::now();
      const linalg::Hierarchy hierarchy(surface, j, p);
      const auto sys = assembly::assemble_system(hierarchy.finest());
      const SparseMatrix a = config.kappa * config.kappa * sys.mass + sys.stiffness;
      const Vector f = model_load(hierarchy.finest(), on_sphere);
      const auto levels = hierarchy.coarsen(a);
      const double setup = seconds_since(setup_start);
      for (const auto& variant : variants) {
        const auto start = Clock::now();
        const linalg::Bpx bpx(hierarchy, levels, smoother_of(variant));
        const auto res = linalg::cg(a, f, {config.tolerance, config.max_iterations}, &bpx);
        const double wall = setup + seconds_since(start);
        const double err = on_sphere ? model_error(hierarchy.finest(), res.x, 1.0, config.kappa)
                                     : std::numeric_limits<double>::quiet_NaN();
        rows.push_back({surface->name(), j, p, 1.0, config.kappa, 0, 0, variant, res.report.iterations, err, wall,
                        config.seed});
      }
    }
  }
  return rows;
}

std::vector<CsvRow> run_sinc_study(const RunConfig& config) {
  const auto surface = open_geometry(config.geometry);
  std::vector<CsvRow> rows;
  for (int j : config.levels) {
    for (int p : config.degrees) {
      const ModelProblem problem(surface, j, p, config.kappa, solver_options(config, config.variant));
      for (double beta : config.betas) {
        for (int k : config.quadrature) {
          const auto start = Clock::now();
          const auto plan = make_plan(beta, config.improved, k, j, p);
          fractional::SolveStats stats;
          const Vector u = fractional::solve_fractional(problem.solver(), problem.load(), plan, &stats);
          rows.push_back({surface->name(), j, p, beta, config.kappa, max_quadrature(plan), 0,
                          config.variant + "/" + describe_plan(plan), stats.iterations, problem.error(u, beta),
                          seconds_since(start), config.seed});
        }
      }
    }
  }
  return rows;
}

std::vector<CsvRow> run_sqrt_study(const RunConfig& config) {
  const auto surface = open_geometry(config.geometry);
  std::vector<CsvRow> rows;
  for (int j : config.levels) {
    for (int p : config.degrees) {
      const auto space = assembly::build_space(surface, j, p);
      const SparseMatrix m = assembly::assemble_mass(space);
      const auto bounds = sampler::mass_bounds(m);
      const Vector y = sampler::NoiseStream(config.seed).draw(space.size());
      const Vector my = m * y;
      for (int khat : config.khat) {
        const auto start = Clock::now();
        const Vector once = sampler::sqrt_mass_apply(m, y, khat, bounds);
        const Vector twice = sampler::sqrt_mass_apply(m, once, khat, bounds);
        rows.push_back({surface->name(), j, p, std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(), 0, khat, "sqrt", 0,
                        (my - twice).norm() / my.norm(), seconds_since(start), config.seed});
      }
    }
  }
  return rows;
}

std::vector<CsvRow> execute(Command command, const RunConfig& config) {
  validate(config, command);
  std::vector<CsvRow> rows;
  switch (command) {
    case Command::Solve: rows = run_solve(config); break;
    case Command::Sample: rows = run_sample(config); break;
    case Command::PrecondBench: rows = run_precond_bench(config); break;
    case Command::SincStudy: rows = run_sinc_study(config); break;
    case Command::SqrtStudy: rows = run_sqrt_study(config); break;
  }
  std::ostringstream table;
  write_csv(table, rows);
  if (config.csv_path.empty())
    std::fwrite(table.str().data(), 1, table.str().size(), stdout);
  else
    write_file(config.csv_path, table.str());
  return rows;
}

}  // namespace igagrf::cli
