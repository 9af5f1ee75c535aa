#include "korngauge/constants.hpp"

#include <Eigen/SparseCholesky>

#include <chrono>
#include <cmath>

namespace korngauge::constants {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

nlohmann::json value_or_inf(const spectra::ExtremalValue& v) {
  if (v.infinite) return "inf";
  return v.value;
}

void fill_context(ConstantReport& report, const meshkit::SimplicialMesh& mesh, int order,
                  meshkit::NormalMode mode, int n_dof, int n_red) {
  report.mesh_hash = meshkit::mesh_hash_hex(mesh);
  report.shape = mesh.shape.empty() ? "custom" : mesh.shape;
  report.h = mesh.h;
  report.bc = describe_labeling(mesh);
  report.space_order = order;
  report.normal_mode = meshkit::to_string(mode);
  report.n_dof = n_dof;
  report.n_red = n_red;
}

}  // namespace

nlohmann::json ConstantReport::to_json() const {
  const Tolerances tol;
  nlohmann::json j;
  j["schema_version"] = 1;
  j["input"] = {{"mesh_hash", mesh_hash}, {"shape", shape},       {"h", h},
                {"bc", bc},               {"space", space_order}, {"normal_mode", normal_mode},
                {"tolerances", {{"kernel", tol.kernel}, {"constraint", tol.constraint}}}};
  nlohmann::json residuals;
  residuals["eigen"] = residual;
  for (const auto& [key, val] : diagnostics) residuals[key] = val;
  j["result"] = {{"name", name},
                 {"value", value_or_inf(value)},
                 {"value_sq_or_inf", value.infinite ? nlohmann::json("inf") : nlohmann::json(value_sq)},
                 {"kernel_dim", kernel_dim},
                 {"n_dof", n_dof},
                 {"n_red", n_red},
                 {"residuals", residuals}};
  j["timings_ms"] = wall_ms;
  return j;
}

std::string describe_labeling(const meshkit::SimplicialMesh& mesh) {
  int n = 0, t = 0, d = 0, f = 0;
  for (const auto& bf : mesh.boundary) {
    switch (bf.label) {
      case meshkit::BoundaryLabel::Normal: ++n; break;
      case meshkit::BoundaryLabel::Tangential: ++t; break;
      case meshkit::BoundaryLabel::Dirichlet: ++d; break;
      case meshkit::BoundaryLabel::Free: ++f; break;
    }
  }
  const int total = n + t + d + f;
  if (n == total) return "normal";
  if (t == total) return "tangential";
  if (d == total) return "dirichlet";
  if (f == total) return "free";
  std::string s = "mixed:";
  if (n) s += "n" + std::to_string(n);
  if (t) s += "t" + std::to_string(t);
  if (d) s += "d" + std::to_string(d);
  if (f) s += "f" + std::to_string(f);
  return s;
}

ConstantReport korn_constant(const meshkit::SimplicialMesh& mesh, int order, meshkit::NormalMode mode) {
  const auto start = Clock::now();
  const fem::FeSpace space(mesh, order);
  const fem::ConstraintNullBasis basis = fem::build_constraints(space, mode);
  if (basis.n_red == space.n_dof())
    throw std::invalid_argument("korn_constant: no active constraints; use korn_constant_no_bc");

  const fem::SpMat grad = fem::assemble(space, fem::FormKind::GradGrad);
  const fem::SpMat sym = fem::assemble(space, fem::FormKind::SymSym);
  spectra::Pencil pencil{fem::reduce(grad, basis), fem::reduce(sym, basis)};
  const spectra::EigenReport eigen = spectra::sup_quotient(pencil);

  ConstantReport report;
  report.name = [&] {
    const std::string bc = describe_labeling(mesh);
    if (bc == "normal") return "c_kn";
    if (bc == "tangential") return "c_kt";
    return "c_ktn";
  }();
  report.value = eigen.value;
  if (!eigen.value.infinite) {
    report.value_sq = eigen.value.value;
    report.value.value = std::sqrt(std::max(0.0, eigen.value.value));
  }
  report.kernel_dim = eigen.kernel_dim_b;
  report.residual = eigen.residual;
  fill_context(report, mesh, order, mode, space.n_dof(), basis.n_red);

  if (mode == meshkit::NormalMode::Facet && !eigen.value.infinite)
    report.diagnostics["polyhedral_bound_satisfied"] = (report.value_sq <= 2.0 + 1e-8) ? 1.0 : 0.0;

  if (eigen.value.infinite) {
    // distance of the witness to the interpolated rotation field, in the
    // mass norm after normalization and sign alignment
    const Eigen::VectorXd witness = basis.z * eigen.vector;
    const fem::RigidMotionBasis rigid = fem::rigid_motion_basis(space);
    const Eigen::VectorXd& rotation = rigid.fields.back();  // 2D: single rotation
    const fem::SpMat mass = fem::assemble(space, fem::FormKind::Mass);
    auto mass_norm = [&](const Eigen::VectorXd& u) { return std::sqrt(u.dot(mass * u)); };
    const Eigen::VectorXd w = witness / mass_norm(witness);
    const Eigen::VectorXd r = rotation / mass_norm(rotation);
    const double dist = std::min(mass_norm(w - r), mass_norm(w + r));
    report.diagnostics["witness_rotation_distance"] = dist;
  }

  report.wall_ms = elapsed_ms(start);
  return report;
}

ConstantReport korn_constant_no_bc(const meshkit::SimplicialMesh& mesh, int order) {
  const auto start = Clock::now();
  const fem::FeSpace space(mesh, order);

  const fem::SpMat grad = fem::assemble(space, fem::FormKind::GradGrad);
  const fem::SpMat sym = fem::assemble(space, fem::FormKind::SymSym);
  const fem::SpMat mass = fem::assemble(space, fem::FormKind::Mass);

  // remove rigid motions: the quotient with the mass projection r_v removed
  // lives on the mass-orthogonal complement of R, which is the Euclidean
  // complement of span(Mass * R)
  const fem::RigidMotionBasis rigid = fem::rigid_motion_basis(space);
  Eigen::MatrixXd deflate(space.n_dof(), static_cast<int>(rigid.fields.size()));
  for (size_t k = 0; k < rigid.fields.size(); ++k) deflate.col(static_cast<int>(k)) = mass * rigid.fields[k];

  spectra::Pencil pencil{grad, sym};
  const spectra::EigenReport eigen = spectra::sup_quotient(pencil, deflate);

  ConstantReport report;
  report.name = "c_k";
  report.value = eigen.value;
  if (!eigen.value.infinite) {
    report.value_sq = eigen.value.value;
    report.value.value = std::sqrt(std::max(0.0, eigen.value.value));
  }
  report.kernel_dim = eigen.kernel_dim_b;
  report.residual = eigen.residual;
  fill_context(report, mesh, order, meshkit::NormalMode::Facet, space.n_dof(), space.n_dof());
  report.wall_ms = elapsed_ms(start);
  return report;
}

GaffneyReport gaffney_ratios(const meshkit::SimplicialMesh& mesh, int order, meshkit::NormalMode mode) {
  const auto start = Clock::now();
  for (const auto& bf : mesh.boundary)
    if (bf.label == meshkit::BoundaryLabel::Free)
      throw std::invalid_argument("gaffney_ratios: boundary must be fully labeled");

  const fem::FeSpace space(mesh, order);
  const fem::ConstraintNullBasis basis = fem::build_constraints(space, mode);
  const fem::SpMat grad = fem::reduce(fem::assemble(space, fem::FormKind::GradGrad), basis);
  const fem::SpMat rot = fem::reduce(fem::assemble(space, fem::FormKind::RotRot), basis);
  const fem::SpMat div = fem::reduce(fem::assemble(space, fem::FormKind::DivDiv), basis);
  fem::SpMat rotdiv = rot + div;

  spectra::Pencil pencil{grad, rotdiv};
  const spectra::EigenReport sup = spectra::sup_quotient(pencil);
  const spectra::EigenReport inf = spectra::inf_quotient(pencil);

  GaffneyReport out;
  for (const auto* e : {&sup, &inf}) {
    ConstantReport r;
    r.name = (e == &sup) ? "gaffney_sup" : "gaffney_inf";
    r.value = e->value;
    if (!e->value.infinite) {
      r.value_sq = e->value.value;
      r.value.value = std::sqrt(std::max(0.0, e->value.value));
    }
    r.kernel_dim = e->kernel_dim_b;
    r.residual = e->residual;
    fill_context(r, mesh, order, mode, space.n_dof(), basis.n_red);
    r.wall_ms = elapsed_ms(start);
    (e == &sup ? out.sup : out.inf) = std::move(r);
  }
  return out;
}

GradNumberSolution grad_number(const meshkit::SimplicialMesh& mesh, int order) {
  const auto start = Clock::now();
  for (const auto& bf : mesh.boundary)
    if (bf.label != meshkit::BoundaryLabel::Normal)
      throw std::invalid_argument("grad_number: requires the all-normal labeling");

  const fem::FeSpace space(mesh, order);
  const fem::ConstraintNullBasis basis = fem::build_constraints(space);
  const fem::SpMat rot = fem::assemble(space, fem::FormKind::RotRot);
  const fem::SpMat div = fem::assemble(space, fem::FormKind::DivDiv);
  const fem::SpMat sym = fem::reduce(fem::assemble(space, fem::FormKind::SymSym), basis);
  fem::SpMat rotdiv_full = rot + div;
  const fem::SpMat rotdiv = fem::reduce(rotdiv_full, basis);

  Eigen::SimplicialLDLT<fem::SpMat> solver(rotdiv);
  if (solver.info() != Eigen::Success)
    throw fem::numerical_error("grad_number: the rot/div form is singular on the constrained space");

  const double volume = meshkit::total_volume(mesh);
  const int n_sigma = mesh.dim * (mesh.dim - 1) / 2;

  GradNumberSolution sol;
  sol.volume = volume;
  sol.residuals.resize(n_sigma);
  sol.gram.resize(n_sigma, n_sigma);
  for (int m = 0; m < n_sigma; ++m) {
    Eigen::VectorXd sigma = Eigen::VectorXd::Zero(n_sigma);
    sigma[m] = 1.0;
    const Eigen::VectorXd b = basis.z.transpose() * fem::assemble_rot_moment(space, sigma);
    const Eigen::VectorXd v = solver.solve(b);
    if (solver.info() != Eigen::Success) throw fem::numerical_error("grad_number: solve failed");
    sol.minimizers.push_back(v);
    // J(v) = v^T (R+D) v - 2 b^T v + |sigma|^2 |Omega|
    sol.residuals[m] = v.dot(rotdiv * v) - 2.0 * b.dot(v) + volume;
  }
  for (int i = 0; i < n_sigma; ++i)
    for (int j = 0; j < n_sigma; ++j)
      sol.gram(i, j) = sol.minimizers[static_cast<size_t>(i)].dot(sym * sol.minimizers[static_cast<size_t>(j)]);
  sol.gram = 0.5 * (sol.gram + sol.gram.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sol.gram);
  sol.c_g = eig.eigenvalues()[0] / volume;

  ConstantReport& report = sol.report;
  report.name = "c_g";
  report.value = {false, sol.c_g};
  report.value_sq = sol.c_g * sol.c_g;
  report.kernel_dim = 0;
  report.residual = sol.residuals.maxCoeff();
  fill_context(report, mesh, order, meshkit::NormalMode::Facet, space.n_dof(), basis.n_red);
  for (int m = 0; m < n_sigma; ++m)
    report.diagnostics["lsq_residual_" + std::to_string(m)] = sol.residuals[m];
  report.diagnostics["volume"] = volume;
  report.wall_ms = elapsed_ms(start);
  return sol;
}

nlohmann::json DvBoundReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["result"] = {{"name", "dv_bound"},
                 {"applicable", applicable},
                 {"holds", holds},
                 {"lhs_c_kn_sq", lhs},
                 {"rhs", rhs},
                 {"c_kn_sq", c_kn_sq},
                 {"c_k_sq", c_k_sq},
                 {"c_mn_sq_proxy", c_mn_sq},
                 {"c_g", c_g},
                 {"dim", dim},
                 {"note", "c_mn is proxied by the discrete Gaffney sup; all inputs are discrete estimates"}};
  return j;
}

DvBoundReport dv_bound_check(const ConstantReport& c_kn, const ConstantReport& c_k,
                             const GaffneyReport& gaffney, const GradNumberSolution& grad) {
  DvBoundReport r;
  r.dim = grad.gram.rows() == 1 ? 2 : 3;  // gram is N(N-1)/2 square
  if (c_kn.value.infinite || c_k.value.infinite || gaffney.sup.value.infinite || grad.c_g <= 0.0) {
    r.applicable = false;
    return r;
  }
  r.applicable = true;
  r.c_kn_sq = c_kn.value_sq;
  r.c_k_sq = c_k.value_sq;
  r.c_mn_sq = gaffney.sup.value_sq;
  r.c_g = grad.c_g;
  r.lhs = r.c_kn_sq;
  r.rhs = 2.0 * r.dim * (1.0 + r.c_mn_sq) * (1.0 + r.c_k_sq) * (1.0 + 1.0 / r.c_g);
  r.holds = r.lhs <= r.rhs;
  return r;
}

}  // namespace korngauge::constants
