#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "igagrf/error.hpp"
#include "igagrf/geometry.hpp"

namespace igagrf::geometry {

namespace {

class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    while (in_ >> w) {
      if (w.front() != '#') return w;
      std::string rest;
      std::getline(in_, rest);
    }
    throw Error(ErrorKind::Parse, "unexpected end of geometry file");
  }

  long integer() {
    const std::string w = word();
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(w, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != w.size()) throw Error(ErrorKind::Parse, "expected an integer, got '" + w + "'");
    return v;
  }

  double real() {
    const std::string w = word();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(w, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != w.size()) throw Error(ErrorKind::Parse, "expected a number, got '" + w + "'");
    return v;
  }

  void expect(const std::string& keyword) {
    const std::string w = word();
    if (w != keyword) throw Error(ErrorKind::Parse, "expected '" + keyword + "', got '" + w + "'");
  }

 private:
  std::istream& in_;
};

splines::KnotVector read_knots(TokenReader& reader, long degree, long count) {
  std::vector<double> knots(static_cast<std::size_t>(count + degree + 1));
  for (auto& k : knots) k = reader.real();
  return splines::KnotVector(static_cast<int>(degree), std::move(knots));
}

}  // namespace

MultipatchSurface read_geometry(std::istream& in, std::string name) {
  TokenReader reader(in);
  reader.expect("multipatch");
  const long n = reader.integer();
  if (n < 1) throw Error(ErrorKind::Parse, "patch count must be positive");
  std::vector<PatchPtr> patches;
  for (long m = 0; m < n; ++m) {
    reader.expect("patch");
    const long p1 = reader.integer(), p2 = reader.integer();
    const long k1 = reader.integer(), k2 = reader.integer();
    if (p1 < 0 || p2 < 0 || k1 <= p1 || k2 <= p2)
      throw Error(ErrorKind::Parse, "invalid patch header for patch " + std::to_string(m));
    auto u = read_knots(reader, p1, k1);
    auto v = read_knots(reader, p2, k2);
    std::vector<Vec3> points(static_cast<std::size_t>(k1 * k2));
    std::vector<double> weights(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (int c = 0; c < 3; ++c) points[i][c] = reader.real();
      weights[i] = reader.real();
    }
    patches.push_back(std::make_shared<NurbsPatch>(std::move(u), std::move(v), std::move(points), std::move(weights)));
  }
  return MultipatchSurface(std::move(patches), std::move(name));
}

MultipatchSurface load_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open geometry file '" + path + "'");
  return read_geometry(in, path);
}

void write_geometry(std::ostream& out, const MultipatchSurface& surface) {
  for (const auto& ptr : surface.patches())
    if (dynamic_cast<const NurbsPatch*>(ptr.get()) == nullptr)
      throw Error(ErrorKind::InvalidArgument, "only NURBS patches can be written");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "multipatch " << surface.num_patches() << '\n';
  for (const auto& ptr : surface.patches()) {
    const auto* patch = static_cast<const NurbsPatch*>(ptr.get());
    const auto& u = patch->knots_u();
    const auto& v = patch->knots_v();
    out << "patch " << u.degree() << ' ' << v.degree() << ' ' << u.size() << ' ' << v.size() << '\n';
    for (const auto* kv : {&u, &v}) {
      const auto knots = kv->knots();
      for (std::size_t i = 0; i < knots.size(); ++i) out << (i ? " " : "") << knots[i];
      out << '\n';
    }
    for (std::size_t i = 0; i < patch->control_points().size(); ++i) {
      const Vec3& c = patch->control_points()[i];
      out << c.x() << ' ' << c.y() << ' ' << c.z() << ' ' << patch->weights()[i] << '\n';
    }
  }
}

void save_geometry(const std::string& path, const MultipatchSurface& surface) {
  std::ostringstream buffer;
  write_geometry(buffer, surface);
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write geometry file '" + path + "'");
  out << buffer.str();
}

}  // namespace igagrf::geometry
