#include "korngauge/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <cmath>

namespace korngauge::spectra {

namespace {

Eigen::MatrixXd complement_basis(const Eigen::MatrixXd& span, int n) {
  // orthogonal complement of the column span, via full SVD
  if (span.cols() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(span, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int k = 0; k < sv.size(); ++k)
    if (sv[k] > 1e-12 * sv[0]) ++rank;
  return svd.matrixU().rightCols(n - rank);
}

struct DensePencil {
  Eigen::MatrixXd a, b;
  Eigen::MatrixXd lift;  // working coordinates -> original coordinates
};

DensePencil restrict_to_complement(const Pencil& pencil, const std::optional<Eigen::MatrixXd>& deflate) {
  const int n = static_cast<int>(pencil.a.rows());
  if (pencil.a.rows() != pencil.a.cols() || pencil.b.rows() != pencil.b.cols() || pencil.b.rows() != n)
    throw std::invalid_argument("pencil matrices must be square and of equal size");
  DensePencil dp;
  dp.a = Eigen::MatrixXd(pencil.a);
  dp.b = Eigen::MatrixXd(pencil.b);
  if (deflate && deflate->cols() > 0) {
    if (deflate->rows() != n) throw std::invalid_argument("deflation subspace has wrong row count");
    dp.lift = complement_basis(*deflate, n);
    dp.a = dp.lift.transpose() * dp.a * dp.lift;
    dp.b = dp.lift.transpose() * dp.b * dp.lift;
  } else {
    dp.lift = Eigen::MatrixXd::Identity(n, n);
  }
  dp.a = 0.5 * (dp.a + dp.a.transpose());
  dp.b = 0.5 * (dp.b + dp.b.transpose());
  return dp;
}

EigenReport sup_dense(const DensePencil& dp, const Options& opt) {
  const int n = static_cast<int>(dp.a.rows());
  EigenReport report;
  if (n == 0) throw std::invalid_argument("empty pencil");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_b(dp.b);
  if (eig_b.info() != Eigen::Success) throw numerical_error("eigendecomposition of the denominator form failed");
  const Eigen::VectorXd lam = eig_b.eigenvalues();  // ascending
  const double lam_max = std::max(lam[n - 1], 0.0);
  const double cut = opt.kernel_tol * lam_max;

  int kd = 0;
  while (kd < n && lam[kd] <= cut) ++kd;
  report.kernel_dim_b = kd;

  const double a_scale = dp.a.norm();  // Frobenius, an upper bound on |A|_2

  if (kd > 0) {
    const Eigen::MatrixXd k = eig_b.eigenvectors().leftCols(kd);
    const Eigen::MatrixXd kak = k.transpose() * dp.a * k;
    const Eigen::MatrixXd c = 0.5 * (kak + kak.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_c(c);
    const double top = eig_c.eigenvalues()[kd - 1];
    if (top > opt.kernel_tol * std::max(a_scale, 1e-300)) {
      report.value = {true, 0.0};
      report.vector = dp.lift * (k * eig_c.eigenvectors().col(kd - 1));
      report.residual = 0.0;
      return report;
    }
  }
  if (kd == n) {
    // B vanishes and A does too: the quotient domain is empty
    report.value = {false, 0.0};
    report.vector = Eigen::VectorXd::Zero(dp.lift.rows());
    return report;
  }

  const Eigen::MatrixXd f = eig_b.eigenvectors().rightCols(n - kd);
  const Eigen::VectorXd dinv_sqrt = lam.tail(n - kd).array().sqrt().inverse();
  const Eigen::MatrixXd af = f.transpose() * dp.a * f;
  const Eigen::MatrixXd scaled = dinv_sqrt.asDiagonal() * af * dinv_sqrt.asDiagonal();
  const Eigen::MatrixXd m = 0.5 * (scaled + scaled.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_m(m);
  if (eig_m.info() != Eigen::Success) throw numerical_error("transformed eigenproblem failed");

  const double value = eig_m.eigenvalues()[n - kd - 1];
  Eigen::VectorXd x = f * (dinv_sqrt.asDiagonal() * eig_m.eigenvectors().col(n - kd - 1));
  x.normalize();
  report.value = {false, std::max(value, 0.0)};
  report.residual = (dp.a * x - report.value.value * (dp.b * x)).norm();
  report.vector = dp.lift * x;
  return report;
}

// shifted power iteration on L^{-1} A L^{-T} for large positive definite B
EigenReport sup_iterative(const Pencil& pencil, const std::optional<Eigen::MatrixXd>& deflate,
                          const Options& opt) {
  if (deflate && deflate->cols() > 0)
    throw numerical_error("iterative path does not support deflation; use the dense path");
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(pencil.b);
  if (llt.info() != Eigen::Success)
    throw numerical_error("iterative path requires a positive definite denominator form");

  const int n = static_cast<int>(pencil.a.rows());
  Eigen::VectorXd y = Eigen::VectorXd::Ones(n);
  y.normalize();
  double lambda = 0.0;
  for (int it = 0; it < opt.power_iterations; ++it) {
    // y <- L^{-1} A L^{-T} y, normalized
    Eigen::VectorXd x = llt.matrixU().triangularView<Eigen::Upper>().solve(y);
    Eigen::VectorXd ax = pencil.a * x;
    Eigen::VectorXd z = llt.matrixL().triangularView<Eigen::Lower>().solve(ax);
    const double next = y.dot(z);
    const double norm = z.norm();
    if (norm == 0.0) {
      lambda = 0.0;
      break;
    }
    z /= norm;
    const bool converged = std::abs(next - lambda) <= opt.power_tol * std::max(1.0, std::abs(next)) && it > 2;
    lambda = next;
    y.swap(z);
    if (converged) break;
  }
  EigenReport report;
  report.value = {false, lambda};
  Eigen::VectorXd x = llt.matrixU().triangularView<Eigen::Upper>().solve(y);
  x.normalize();
  report.vector = x;
  report.residual = (pencil.a * x - lambda * (pencil.b * x)).norm();
  report.kernel_dim_b = 0;
  return report;
}

}  // namespace

Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& b, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (b + b.transpose()));
  if (eig.info() != Eigen::Success) throw numerical_error("kernel_basis: eigendecomposition failed");
  const int n = static_cast<int>(b.rows());
  const double lam_max = std::max(eig.eigenvalues()[n - 1], 0.0);
  const double cut = tol * lam_max;
  int kd = 0;
  while (kd < n && eig.eigenvalues()[kd] <= cut) ++kd;
  return eig.eigenvectors().leftCols(kd);
}

EigenReport sup_quotient(const Pencil& pencil, const std::optional<Eigen::MatrixXd>& deflate,
                         const Options& options) {
  const int n = static_cast<int>(pencil.a.rows());
  if (options.force_iterative || n > options.max_dense) return sup_iterative(pencil, deflate, options);
  return sup_dense(restrict_to_complement(pencil, deflate), options);
}

EigenReport inf_quotient(const Pencil& pencil, const std::optional<Eigen::MatrixXd>& deflate,
                         const Options& options) {
  // inf of A/B over {x : x^T B x > 0} is the reciprocal of sup of B/A over
  // {x : x^T A x > 0}; an A-kernel direction with B-energy maps to 0
  Pencil swapped{pencil.b, pencil.a};
  EigenReport rep = sup_quotient(swapped, deflate, options);

  EigenReport out;
  out.vector = rep.vector;
  if (rep.value.infinite) {
    out.value = {false, 0.0};
    out.residual = 0.0;
  } else if (rep.value.value == 0.0) {
    out.value = {true, 0.0};  // denominator has no energy anywhere A does
    out.residual = 0.0;
  } else {
    out.value = {false, 1.0 / rep.value.value};
    if (deflate && deflate->cols() > 0) {
      // the eigen-relation holds in the deflated working coordinates
      const DensePencil dp = restrict_to_complement(pencil, deflate);
      const Eigen::VectorXd x = dp.lift.transpose() * rep.vector;
      const double nx = x.norm();
      if (nx > 0.0) out.residual = (dp.a * x - out.value.value * (dp.b * x)).norm() / nx;
    } else {
      const Eigen::VectorXd& x = rep.vector;
      const double nx = x.norm();
      if (nx > 0.0) out.residual = (pencil.a * x - out.value.value * (pencil.b * x)).norm() / nx;
    }
  }

  // kernel dimension of the denominator form in the working subspace
  if (static_cast<int>(pencil.b.rows()) <= options.max_dense && !options.force_iterative) {
    const DensePencil dp = restrict_to_complement(pencil, deflate);
    out.kernel_dim_b = static_cast<int>(kernel_basis(dp.b, options.kernel_tol).cols());
  }
  return out;
}

}  // namespace korngauge::spectra
