#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace igagrf {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
/// Columns are the partial derivatives with respect to the two parameters.
using Jacobian = Eigen::Matrix<double, 3, 2>;

}  // namespace igagrf
