#pragma once

// Legacy ASCII VTK export of spline fields on multipatch surfaces.

#include <iosfwd>
#include <string>

#include "igagrf/assembly.hpp"

namespace igagrf::cli {

/// Unstructured grid of quads: each knot span of every patch is split into
/// (2^refine)^2 cells and the field is sampled at the cell corners. Patch
/// boundary nodes are repeated per patch.
void write_vtk(std::ostream& out, const assembly::DiscreteSpace& space, const Vector& coefficients, int refine,
               const std::string& title);

}  // namespace igagrf::cli
