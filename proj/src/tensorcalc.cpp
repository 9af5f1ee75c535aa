#include "korngauge/tensorcalc.hpp"

#include <algorithm>
#include <cmath>

namespace korngauge::tensorcalc {

int dim_from_rot_size(Eigen::Index len) {
  // invert len = n(n-1)/2
  const int n = static_cast<int>(std::lround((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(len))) / 2.0));
  if (n < 2 || rot_dim(n) != len)
    throw std::invalid_argument("rotation vector length is not n(n-1)/2 for any n >= 2");
  return n;
}

int rot_index(int i, int j, int n) {
  if (i < 0 || j <= i || j >= n) throw std::invalid_argument("rot_index: need 0 <= i < j < n");
  // pairs (0,1),(0,2),...,(0,n-1),(1,2),... in lexicographic order
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

MatrixParts decompose(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("decompose: matrix must be square");
  const auto n = a.rows();
  if (n < 2) throw std::invalid_argument("decompose: dimension must be >= 2");

  MatrixParts p;
  p.sym = 0.5 * (a + a.transpose());
  p.skw = 0.5 * (a - a.transpose());
  p.trace = a.trace();
  const Eigen::MatrixXd iso = (p.trace / static_cast<double>(n)) * Eigen::MatrixXd::Identity(n, n);
  p.dev = a - iso;
  p.devsym = p.sym - iso;
  return p;
}

Eigen::VectorXd rotvec_of_gradient(const Eigen::MatrixXd& grad) {
  if (grad.rows() != grad.cols() || grad.rows() < 2)
    throw std::invalid_argument("rotvec_of_gradient: need square matrix, dim >= 2");
  const int n = static_cast<int>(grad.rows());
  Eigen::VectorXd rot(rot_dim(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) rot[rot_index(i, j, n)] = grad(i, j) - grad(j, i);
  return rot;
}

Eigen::Vector3d curl3_display(const Eigen::VectorXd& rot) {
  if (rot.size() != 3) throw std::invalid_argument("curl3_display: expects the N=3 rotation vector");
  // pairs are (1,2),(1,3),(2,3) in 1-based terms; curl = (r_23, -r_13, r_12)
  return {rot[2], -rot[1], rot[0]};
}

Eigen::MatrixXd rot_generator(const Eigen::VectorXd& sigma) {
  const int n = dim_from_rot_size(sigma.size());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double half = 0.5 * sigma[rot_index(i, j, n)];
      s(i, j) = -half;
      s(j, i) = half;
    }
  return s;
}

double PointwiseResiduals::max_residual() const {
  return std::max({std::abs(graddevsymskw), std::abs(rotgrad), std::abs(symgrad), std::abs(skwgrad)});
}

bool PointwiseResiduals::within(double tol) const { return max_residual() <= tol * (1.0 + grad_sq); }

PointwiseResiduals check_pointwise_identities(const Eigen::MatrixXd& grad) {
  const MatrixParts p = decompose(grad);
  const int n = static_cast<int>(grad.rows());
  const Eigen::VectorXd rot = rotvec_of_gradient(grad);

  const double g2 = grad.squaredNorm();
  const double rot2 = rot.squaredNorm();
  const double cross = (grad * grad).trace();  // <G, G^T> = sum_ij G_ij G_ji

  PointwiseResiduals r;
  r.grad_sq = g2;
  r.graddevsymskw = g2 - p.devsym.squaredNorm() - p.trace * p.trace / n - 0.5 * rot2;
  r.rotgrad = g2 - rot2 - cross;
  r.symgrad = g2 - 2.0 * p.sym.squaredNorm() + cross;
  r.skwgrad = g2 - 2.0 * p.skw.squaredNorm() - cross;
  return r;
}

}  // namespace korngauge::tensorcalc
