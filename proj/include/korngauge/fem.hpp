#pragma once

#include "korngauge/meshkit.hpp"
#include "korngauge/polyfield.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <string>
#include <vector>

namespace korngauge::fem {

using SpMat = Eigen::SparseMatrix<double>;

enum class FormKind { GradGrad, SymSym, DevSymDevSym, DivDiv, RotRot, Mass };

std::string to_string(FormKind kind);

class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class geometry_mismatch_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector Lagrange space of order 1 or 2 on a simplicial mesh.  Nodes are
/// the mesh vertices (P1) plus edge midpoints (P2), numbered vertices first
/// and midpoints in sorted-edge order; dof = node * dim + component.
class FeSpace {
 public:
  FeSpace(const meshkit::SimplicialMesh& mesh, int order);

  const meshkit::SimplicialMesh& mesh() const { return *mesh_; }
  int order() const { return order_; }
  int dim() const { return mesh_->dim; }
  int n_nodes() const { return static_cast<int>(node_coords_.size()); }
  int n_dof() const { return n_nodes() * dim(); }
  int dof(int node, int component) const { return node * dim() + component; }

  Eigen::VectorXd node_coord(int node) const { return node_coords_[static_cast<size_t>(node)]; }
  /// Nodes of cell c: vertex nodes first, then edge-midpoint nodes in the
  /// local edge order (pairs (0,1),(0,2),...,(1,2),...).
  const std::vector<int>& cell_nodes(int c) const { return cell_nodes_[static_cast<size_t>(c)]; }
  /// Nodes lying on boundary facet f (vertices plus its edge midpoints).
  std::vector<int> facet_nodes(int f) const;

  /// Nodal interpolation of a polynomial field.
  Eigen::VectorXd interpolate(const polyfield::PolyVecField& v) const;
  Eigen::VectorXd interpolate(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& v) const;

 private:
  const meshkit::SimplicialMesh* mesh_;
  int order_;
  std::vector<Eigen::VectorXd> node_coords_;
  std::vector<std::vector<int>> cell_nodes_;
  std::map<std::pair<int, int>, int> edge_node_;  // sorted vertex pair -> node
};

/// Assembles the quadratic form of the given kind as a sparse symmetric
/// matrix.  All integrands are polynomial and integrated exactly, so the
/// matrix identities GradGrad = SymSym + RotRot/2 and
/// SymSym = DevSymDevSym + DivDiv/N hold to rounding.
SpMat assemble(const FeSpace& space, FormKind kind);

/// Load vector b with b[dof] = int sigma . rot(phi_dof) dx for a constant
/// sigma of length dim(dim-1)/2.
Eigen::VectorXd assemble_rot_moment(const FeSpace& space, const Eigen::VectorXd& sigma);

/// Null-space encoding of the nodal boundary constraints: Z has orthonormal
/// per-node blocks spanning the admissible directions, so Z^T Z = I and
/// every FE field Z y satisfies the boundary conditions identically on each
/// facet.
struct ConstraintNullBasis {
  SpMat z;           // n_dof x n_red
  int n_red = 0;
  std::vector<int> node_free_dims;  // admissible directions per node

  /// Euclidean projection test: true when (I - Z Z^T) u is small relative
  /// to u, i.e. u satisfies every nodal constraint.
  bool admits(const Eigen::VectorXd& u, double tol = 1e-9) const;
};

/// Builds the constraint null basis from the mesh labeling.  Per boundary
/// node, "normal" facets contribute the row nu^T, "tangential" facets the
/// rows of I - nu nu^T, "dirichlet" clamps the node; rows are compressed by
/// SVD with relative threshold 1e-9.  ExactCircle mode replaces facet
/// normals by nu(x) = x/|x| and requires every constrained node to lie on
/// the unit circle within 1e-9 (geometry_mismatch_error otherwise).
ConstraintNullBasis build_constraints(const FeSpace& space,
                                      meshkit::NormalMode mode = meshkit::NormalMode::Facet);

/// Z^T M Z, symmetrized.
SpMat reduce(const SpMat& m, const ConstraintNullBasis& basis);

Eigen::MatrixXd to_dense(const SpMat& m);

/// Exact coefficient vectors of the rigid motions: dim translations and
/// dim(dim-1)/2 linear rotation fields x -> S x.
struct RigidMotionBasis {
  std::vector<Eigen::VectorXd> fields;
  std::vector<std::string> names;
};

RigidMotionBasis rigid_motion_basis(const FeSpace& space);

/// Indices of the rigid motions admitted by the constraints (tolerance on
/// the Euclidean projection residual).
std::vector<int> rigid_motions_in_constrained_space(const RigidMotionBasis& basis,
                                                    const ConstraintNullBasis& constraints,
                                                    double tol = 1e-9);

}  // namespace korngauge::fem
