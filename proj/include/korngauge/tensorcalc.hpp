#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace korngauge::tensorcalc {

// Pointwise algebra of N x N matrices and the generalized rotation vector.
//
// Gradient convention: for a vector field v, the gradient matrix G has
// entries G(i,j) = d_i v_j (the transposed Jacobian).  All norms used
// downstream are transpose-invariant; only the signs of skew quantities
// depend on this choice.

/// Number of independent skew components in dimension n, i.e. n(n-1)/2.
inline int rot_dim(int n) { return n * (n - 1) / 2; }

/// Matrix dimension recovered from a rotation-vector length; throws if the
/// length is not of the form n(n-1)/2.
int dim_from_rot_size(Eigen::Index len);

/// Flat index of the lexicographic pair (i,j), i < j, among all such pairs.
int rot_index(int i, int j, int n);

struct MatrixParts {
  Eigen::MatrixXd sym;
  Eigen::MatrixXd skw;
  Eigen::MatrixXd dev;
  Eigen::MatrixXd devsym;
  double trace = 0.0;
};

/// Splits A into symmetric/antisymmetric/deviatoric parts and the trace.
/// Throws std::invalid_argument for dim < 2 or non-square input.
MatrixParts decompose(const Eigen::MatrixXd& a);

/// Rotation vector of a gradient matrix: component (i,j) = G(i,j) - G(j,i)
/// for i < j in lexicographic order.  Satisfies |skw G|^2 = 1/2 |rot|^2.
Eigen::VectorXd rotvec_of_gradient(const Eigen::MatrixXd& grad);

/// Classic 3D curl ordering/sign of a rotation vector; display only.
Eigen::Vector3d curl3_display(const Eigen::VectorXd& rot);

/// Skew matrix S with S(i,j) = -sigma(i,j)/2 for i < j, normalized so that
/// the linear field x -> S x has rot == sigma, div == 0 and sym grad == 0.
Eigen::MatrixXd rot_generator(const Eigen::VectorXd& sigma);

/// Residuals of the four pointwise gradient identities
///   |G|^2 = |dev sym G|^2 + (tr G)^2 / N + |rot|^2 / 2
///   |G|^2 = |rot|^2 + <G, G^T>
///   |G|^2 = 2 |sym G|^2 - <G, G^T>
///   |G|^2 = 2 |skw G|^2 + <G, G^T>
struct PointwiseResiduals {
  double graddevsymskw = 0.0;
  double rotgrad = 0.0;
  double symgrad = 0.0;
  double skwgrad = 0.0;
  double grad_sq = 0.0;  // |G|^2, the scale the residuals are relative to

  double max_residual() const;
  /// True when every residual is <= tol * (1 + |G|^2).
  bool within(double tol) const;
};

PointwiseResiduals check_pointwise_identities(const Eigen::MatrixXd& grad);

}  // namespace korngauge::tensorcalc
