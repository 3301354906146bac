#include "vtk.hpp"

#include <ostream>

#include "igagrf/error.hpp"

namespace igagrf::cli {

void write_vtk(std::ostream& out, const assembly::DiscreteSpace& space, const Vector& coefficients, int refine,
               const std::string& title) {
  if (refine < 0 || refine > 10) throw Error(ErrorKind::InvalidArgument, "VTK refinement must lie in [0, 10]");
  if (coefficients.size() != space.size()) throw Error(ErrorKind::InvalidArgument, "VTK export: coefficient count mismatch");
  const int cells = (1 << space.level()) << refine;  // per direction and patch
  const int nodes = cells + 1;
  const int patches = space.surface().num_patches();
  const long num_points = static_cast<long>(patches) * nodes * nodes;
  const long num_cells = static_cast<long>(patches) * cells * cells;

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(num_points));
  const auto coeffs = assembly::as_span(coefficients);

  out.precision(17);
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << num_points << " double\n";
  for (int m = 0; m < patches; ++m) {
    const auto& patch = space.surface().patch(m);
    for (int a = 0; a < nodes; ++a) {
      for (int b = 0; b < nodes; ++b) {
        const Vec2 xhat(static_cast<double>(a) / cells, static_cast<double>(b) / cells);
        const Vec3 x = patch.eval(xhat).point;
        out << x.x() << ' ' << x.y() << ' ' << x.z() << '\n';
        values.push_back(space.evaluate(coeffs, m, xhat));
      }
    }
  }

  out << "CELLS " << num_cells << ' ' << 5 * num_cells << '\n';
  for (int m = 0; m < patches; ++m) {
    const long base = static_cast<long>(m) * nodes * nodes;
    for (int a = 0; a < cells; ++a) {
      for (int b = 0; b < cells; ++b) {
        const long n00 = base + static_cast<long>(a) * nodes + b;
        const long n10 = n00 + nodes;
        out << "4 " << n00 << ' ' << n10 << ' ' << n10 + 1 << ' ' << n00 + 1 << '\n';
      }
    }
  }
  out << "CELL_TYPES " << num_cells << '\n';
  for (long c = 0; c < num_cells; ++c) out << "9\n";  // VTK_QUAD

  out << "POINT_DATA " << num_points << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
  for (double v : values) out << v << '\n';
}

}  // namespace igagrf::cli
