#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <optional>
#include <stdexcept>

namespace korngauge::spectra {

class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pair of symmetric positive semi-definite forms; the quotient under study
/// is x^T A x / x^T B x.
struct Pencil {
  Eigen::SparseMatrix<double> a;
  Eigen::SparseMatrix<double> b;
};

/// An extremal quotient.  Infinite is a first-class value: it reports a
/// B-kernel direction carrying A-energy.
struct ExtremalValue {
  bool infinite = false;
  double value = 0.0;
};

struct EigenReport {
  ExtremalValue value;
  int kernel_dim_b = 0;   // kernel dimension of the denominator form
  double residual = 0.0;  // |A x - lambda B x| / |x| in the solved subspace
  Eigen::VectorXd vector; // extremal (or witness) vector, full length
};

struct Options {
  double kernel_tol = 1e-10;    // relative to lambda_max of the form
  int max_dense = 4000;         // dense reference path up to this size
  bool force_iterative = false; // iterative path regardless of size (testing)
  int power_iterations = 20000;
  double power_tol = 1e-12;
};

/// Orthonormal basis of the numerical kernel of a symmetric PSD matrix.
Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& b, double tol = 1e-10);

/// Largest generalized eigenvalue of (A, B) over the complement of ker B,
/// after restricting to the orthogonal complement of span(deflate) when
/// given.  Returns Infinite with a witness when some kernel vector of B
/// carries A-energy above tolerance.
EigenReport sup_quotient(const Pencil& pencil,
                         const std::optional<Eigen::MatrixXd>& deflate = std::nullopt,
                         const Options& options = {});

/// Smallest quotient over the same domain; 0 is reported (with witness) when
/// some A-kernel vector carries B-energy.
EigenReport inf_quotient(const Pencil& pencil,
                         const std::optional<Eigen::MatrixXd>& deflate = std::nullopt,
                         const Options& options = {});

}  // namespace korngauge::spectra
