#pragma once

#include "korngauge/fem.hpp"
#include "korngauge/meshkit.hpp"
#include "korngauge/spectra.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace korngauge::constants {

/// Fixed tolerance set carried by every report.
struct Tolerances {
  double kernel = 1e-10;      // relative kernel cut in the eigen engine
  double constraint = 1e-9;   // nodal constraint / SVD threshold
};

/// One computed constant with full provenance.  `value` is the constant
/// itself (square root of the extremal quotient where that applies),
/// `value_sq` the quotient.  Serialization is bit-stable for fixed inputs;
/// wall_ms is the only field allowed to differ between runs.
struct ConstantReport {
  std::string name;
  spectra::ExtremalValue value;
  double value_sq = 0.0;
  int kernel_dim = 0;
  double residual = 0.0;

  std::string mesh_hash;
  std::string shape;
  double h = 0.0;
  std::string bc;
  int space_order = 1;
  std::string normal_mode;
  int n_dof = 0;
  int n_red = 0;

  std::map<std::string, double> diagnostics;  // extra named residuals/flags
  double wall_ms = 0.0;

  nlohmann::json to_json() const;
};

/// Description of the mesh labeling, e.g. "normal", "tangential" or
/// "mixed:n12t4".
std::string describe_labeling(const meshkit::SimplicialMesh& mesh);

/// Korn constant on the constrained space: c^2 = sup |grad v|^2 / |sym grad v|^2.
/// Facet mode on polyhedra satisfies c^2 <= 2 up to rounding; exact-circle
/// mode reports Infinite with the rotation witness when the sym form has a
/// kernel.  Requires at least one active constraint.
ConstantReport korn_constant(const meshkit::SimplicialMesh& mesh, int order,
                             meshkit::NormalMode mode = meshkit::NormalMode::Facet);

/// Korn constant without boundary conditions: rigid motions are removed by
/// restricting to the mass-orthogonal complement of their span.
ConstantReport korn_constant_no_bc(const meshkit::SimplicialMesh& mesh, int order);

/// Extremal quotients of |grad v|^2 against |rot v|^2 + |div v|^2 on the
/// constrained space; both equal 1 on polyhedra with facet normals.
struct GaffneyReport {
  ConstantReport sup;
  ConstantReport inf;
};

GaffneyReport gaffney_ratios(const meshkit::SimplicialMesh& mesh, int order,
                             meshkit::NormalMode mode = meshkit::NormalMode::Facet);

/// Grad-number solve: for each unit rotation target e_m, minimize
/// |rot v - e_m|^2 + |div v|^2 over the all-normal constrained space, then
/// c_g = lambda_min(M) / |Omega| with M the sym-form Gram matrix of the
/// minimizers.  Residuals are reported per target, never hidden.
struct GradNumberSolution {
  std::vector<Eigen::VectorXd> minimizers;  // reduced coordinates
  Eigen::VectorXd residuals;                // |rot v - e_m|^2 + |div v|^2
  Eigen::MatrixXd gram;                     // sym-form inner products
  double c_g = 0.0;
  double volume = 0.0;
  ConstantReport report;
};

GradNumberSolution grad_number(const meshkit::SimplicialMesh& mesh, int order);

/// Plug-in check of the bound c_kn^2 <= 2N (1 + c_mn^2)(1 + c_k^2)(1 + 1/c_g)
/// with the Gaffney sup standing in for c_mn.  Diagnostic only: the inputs
/// are discrete estimates of the continuous constants.
struct DvBoundReport {
  bool applicable = false;
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double c_kn_sq = 0.0, c_k_sq = 0.0, c_mn_sq = 0.0, c_g = 0.0;
  int dim = 0;

  nlohmann::json to_json() const;
};

DvBoundReport dv_bound_check(const ConstantReport& c_kn, const ConstantReport& c_k,
                             const GaffneyReport& gaffney, const GradNumberSolution& grad);

}  // namespace korngauge::constants
