#include "korngauge/verify.hpp"

#include "korngauge/fem.hpp"
#include "korngauge/meshkit.hpp"
#include "korngauge/polyfield.hpp"
#include "korngauge/tensorcalc.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace korngauge::verify {

namespace {

using meshkit::BoundaryLabel;
using meshkit::NormalMode;
using meshkit::ShapeSpec;

CheckResult make_check(const std::string& name, double max_residual, double tol, int cases) {
  return CheckResult{name, max_residual, tol, cases, max_residual <= tol};
}

CheckResult check_pointwise(int trials, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  double worst = 0.0;
  int cases = 0;
  for (int n : {2, 3, 4})
    for (int t = 0; t < trials; ++t) {
      Eigen::MatrixXd g(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = dist(rng);
      const auto r = tensorcalc::check_pointwise_identities(g);
      worst = std::max(worst, r.max_residual() / (1.0 + r.grad_sq));
      ++cases;
    }
  return make_check("pointwise-identities", worst, 1e-12, cases);
}

CheckResult check_rot_roundtrip(int trials, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  double worst = 0.0;
  int cases = 0;
  for (int n : {2, 3, 4})
    for (int t = 0; t < trials; ++t) {
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          s(i, j) = dist(rng);
          s(j, i) = -s(i, j);
        }
      // skew-matrix reconstruction from the rotation vector is exact
      const Eigen::VectorXd sigma = tensorcalc::rotvec_of_gradient(s);
      const Eigen::MatrixXd back = -tensorcalc::rot_generator(sigma);
      worst = std::max(worst, (back - s).cwiseAbs().maxCoeff());
      ++cases;
    }
  return make_check("rotvec-skew-roundtrip", worst, 0.0, cases);
}

CheckResult check_energy_identities(int trials, std::mt19937_64& rng) {
  const auto square = meshkit::generate(ShapeSpec{meshkit::ShapeKind::Square, 0}, 0.5);
  const auto lshape = meshkit::generate(ShapeSpec{meshkit::ShapeKind::LShape, 0}, 0.5);
  double worst = 0.0;
  int cases = 0;
  for (const auto* mesh : {&square, &lshape})
    for (int t = 0; t < std::max(1, trials / 4); ++t) {
      const auto v = polyfield::random_field(2, 3, rng());
      const auto e = polyfield::energy_integrals(v, *mesh);
      const double scale = 1.0 + e.grad2;
      const double r1 = std::abs(e.grad2 - (e.devsym2 + e.div2 / 2.0 + e.rot2 / 2.0));
      const double r2 = std::abs(e.grad2 - (e.rot2 + e.cross));
      worst = std::max(worst, std::max(r1, r2) / scale);
      ++cases;
    }
  return make_check("energy-integral-identities", worst, 1e-12, cases);
}

CheckResult check_grisvard(int trials, std::mt19937_64& rng) {
  const auto square = meshkit::generate(ShapeSpec{meshkit::ShapeKind::Square, 0}, 0.5);
  const auto cube = meshkit::generate(ShapeSpec{meshkit::ShapeKind::Cube, 0}, 0.5);
  double worst = 0.0;
  int cases = 0;
  for (const auto* mesh : {&square, &cube})
    for (int t = 0; t < std::max(1, trials / 8); ++t) {
      const auto v = polyfield::random_field(mesh->dim, 3, rng());
      const auto rep = polyfield::verify_grisvard(v, *mesh);
      const double scale = 1.0 + rep.grad2;
      worst = std::max(worst,
                       std::max(std::abs(rep.residual_sym_side), std::abs(rep.residual_rot_side)) / scale);
      ++cases;
    }
  return make_check("grisvard-integration-by-parts", worst, 1e-10, cases);
}

polyfield::PolyVecField bubble_field(int dim, std::uint64_t seed) {
  using polyfield::Polynomial;
  Polynomial bubble = Polynomial::constant(dim, 1.0);
  for (int i = 0; i < dim; ++i) {
    const Polynomial x = Polynomial::variable(dim, i);
    bubble = bubble * (x - x * x);
  }
  auto w = polyfield::random_field(dim, 2, seed);
  polyfield::PolyVecField v(dim);
  for (int i = 0; i < dim; ++i) v.comp[i] = bubble * w.comp[i];
  return v;
}

CheckResult check_h10_korn(int trials, std::mt19937_64& rng) {
  const auto square = meshkit::generate(ShapeSpec{meshkit::ShapeKind::Square, 0}, 1.0);
  const auto cube = meshkit::generate(ShapeSpec{meshkit::ShapeKind::Cube, 0}, 1.0);
  double worst = 0.0;
  int cases = 0;
  for (const auto* mesh : {&square, &cube})
    for (int t = 0; t < std::max(1, trials / 16); ++t) {
      const auto v = bubble_field(mesh->dim, rng());
      const auto rep = polyfield::verify_h10_korn(v, *mesh);
      const double scale = 1.0 + rep.grad2;
      double r = std::max(std::abs(rep.residual_gaffney), std::abs(rep.residual_devsym)) / scale;
      if (mesh->dim == 2 && !rep.equality_devsym) r = std::max(r, 1.0);  // N=2 equality must flag
      worst = std::max(worst, r);
      ++cases;
    }
  return make_check("h10-korn-identities", worst, 1e-10, cases);
}

CheckResult check_bc_families(int trials, std::mt19937_64& rng) {
  const auto square = meshkit::generate(ShapeSpec{meshkit::ShapeKind::Square, 0}, 0.5);
  const auto cube = meshkit::generate(ShapeSpec{meshkit::ShapeKind::Cube, 0}, 0.5);
  double worst = 0.0;
  int cases = 0;
  for (const auto* mesh : {&square, &cube})
    for (auto bc : {polyfield::BcKind::Normal, polyfield::BcKind::Tangential})
      for (int t = 0; t < std::max(1, trials / 16); ++t) {
        const auto v = polyfield::bc_field_family(mesh->dim, bc, rng());
        const auto e = polyfield::energy_integrals(v, *mesh);
        worst = std::max(worst, std::abs(e.grad2 - (e.rot2 + e.div2)) / (1.0 + e.grad2));
        ++cases;
      }
  return make_check("bc-family-gaffney-equality", worst, 1e-10, cases);
}

CheckResult check_divfree_attainment(int trials, std::mt19937_64& rng) {
  // stream-function fields: div-free with zero normal trace, so the
  // quotient |grad v|^2 / |sym grad v|^2 equals 2 exactly in 2D
  const auto square = meshkit::generate(ShapeSpec{meshkit::ShapeKind::Square, 0}, 0.5);
  using polyfield::Polynomial;
  double worst = 0.0;
  int cases = 0;
  for (int t = 0; t < std::max(1, trials / 8); ++t) {
    const Polynomial x = Polynomial::variable(2, 0);
    const Polynomial y = Polynomial::variable(2, 1);
    std::mt19937_64 sub(rng());
    Polynomial psi = (x - x * x) * (y - y * y);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    psi = psi * (Polynomial::constant(2, dist(sub)) + x * dist(sub) + y * dist(sub) + x * y * dist(sub));
    polyfield::PolyVecField v(2);
    v.comp[0] = psi.derivative(1);
    v.comp[1] = -psi.derivative(0);
    const auto e = polyfield::energy_integrals(v, square);
    worst = std::max(worst, std::abs(e.grad2 - 2.0 * e.sym2) / (1.0 + e.grad2));
    ++cases;
  }
  return make_check("divfree-quotient-two", worst, 1e-12, cases);
}

double rel_form_residual(const fem::SpMat& lhs, const fem::SpMat& rhs) {
  const double denom = std::max(Eigen::MatrixXd(rhs).norm(), 1e-300);
  return (Eigen::MatrixXd(lhs) - Eigen::MatrixXd(rhs)).norm() / denom;
}

CheckResult check_form_decompositions(bool inject_failure) {
  std::vector<std::pair<meshkit::SimplicialMesh, int>> cases;
  cases.emplace_back(meshkit::generate(ShapeSpec{meshkit::ShapeKind::Square, 0}, 0.25), 1);
  cases.emplace_back(meshkit::generate(ShapeSpec{meshkit::ShapeKind::Square, 0}, 0.25), 2);
  cases.emplace_back(meshkit::generate(ShapeSpec{meshkit::ShapeKind::Cube, 0}, 0.5), 1);
  cases.emplace_back(meshkit::generate(ShapeSpec{meshkit::ShapeKind::Cube, 0}, 0.5), 2);
  cases.emplace_back(meshkit::generate(ShapeSpec{meshkit::ShapeKind::LShape, 0}, 0.25), 1);

  double worst = 0.0;
  for (const auto& [mesh, order] : cases) {
    const fem::FeSpace space(mesh, order);
    const auto grad = fem::assemble(space, fem::FormKind::GradGrad);
    auto sym = fem::assemble(space, fem::FormKind::SymSym);
    const auto rot = fem::assemble(space, fem::FormKind::RotRot);
    const auto div = fem::assemble(space, fem::FormKind::DivDiv);
    const auto devsym = fem::assemble(space, fem::FormKind::DevSymDevSym);
    if (inject_failure) sym.coeffRef(0, 0) += 1e-6;

    fem::SpMat sum1 = sym + fem::SpMat(0.5 * rot);
    fem::SpMat sum2 = devsym + fem::SpMat((1.0 / mesh.dim) * div);
    worst = std::max(worst, rel_form_residual(grad, sum1));
    worst = std::max(worst, rel_form_residual(sym, sum2));
  }
  return make_check("form-matrix-decompositions", worst, 1e-12, static_cast<int>(cases.size()));
}

CheckResult check_reduced_identities() {
  struct Case {
    ShapeSpec shape;
    double h;
    std::string labeling;
    int order;
  };
  const std::vector<Case> cases = {
      {{meshkit::ShapeKind::Square, 0}, 0.25, "all-normal", 1},
      {{meshkit::ShapeKind::NGon, 12}, 0.5, "all-tangential", 2},
      {{meshkit::ShapeKind::Annulus, 0}, 1.0 / 6.0, "west-t-rest-n", 1},
      {{meshkit::ShapeKind::Cube, 0}, 0.5, "west-t-rest-n", 1},
  };
  double worst = 0.0;
  for (const auto& c : cases) {
    auto mesh = meshkit::apply_named_labeling(meshkit::generate(c.shape, c.h), c.labeling);
    const fem::FeSpace space(mesh, c.order);
    const auto basis = fem::build_constraints(space);
    const auto grad = fem::reduce(fem::assemble(space, fem::FormKind::GradGrad), basis);
    const auto rot = fem::reduce(fem::assemble(space, fem::FormKind::RotRot), basis);
    const auto div = fem::reduce(fem::assemble(space, fem::FormKind::DivDiv), basis);
    const auto devsym = fem::reduce(fem::assemble(space, fem::FormKind::DevSymDevSym), basis);
    const double scale = std::max(Eigen::MatrixXd(grad).norm(), 1e-300);
    const int n = mesh.dim;

    fem::SpMat gaffney_gap = grad - rot - div;
    fem::SpMat theorem_gap = grad - fem::SpMat(2.0 * devsym) - fem::SpMat(((2.0 - n) / n) * div);
    worst = std::max(worst, Eigen::MatrixXd(gaffney_gap).norm() / scale);
    worst = std::max(worst, Eigen::MatrixXd(theorem_gap).norm() / scale);
  }
  return make_check("reduced-space-equalities", worst, 1e-10, static_cast<int>(cases.size()));
}

CheckResult check_constraint_conformity() {
  // every admissible nodal direction must satisfy the facet conditions of
  // each labeled facet containing the node
  std::vector<std::pair<meshkit::SimplicialMesh, int>> cases;
  cases.emplace_back(
      meshkit::apply_named_labeling(meshkit::generate(ShapeSpec{meshkit::ShapeKind::NGon, 8}, 1.0), "all-normal"),
      2);
  cases.emplace_back(
      meshkit::apply_named_labeling(meshkit::generate(ShapeSpec{meshkit::ShapeKind::Cube, 0}, 0.5), "west-t-rest-n"),
      2);

  double worst = 0.0;
  int count = 0;
  for (const auto& [mesh, order] : cases) {
    const fem::FeSpace space(mesh, order);
    const auto basis = fem::build_constraints(space);
    const Eigen::MatrixXd z = fem::to_dense(basis.z);
    const int d = mesh.dim;
    for (int f = 0; f < static_cast<int>(mesh.boundary.size()); ++f) {
      const auto label = mesh.boundary[static_cast<size_t>(f)].label;
      if (label == BoundaryLabel::Free) continue;
      const Eigen::VectorXd nu = mesh.facet_normal(f);
      for (int node : space.facet_nodes(f)) {
        for (int col = 0; col < basis.n_red; ++col) {
          Eigen::VectorXd dir(d);
          for (int c = 0; c < d; ++c) dir[c] = z(space.dof(node, c), col);
          if (dir.norm() == 0.0) continue;
          double viol = 0.0;
          if (label == BoundaryLabel::Normal) viol = std::abs(nu.dot(dir));
          else if (label == BoundaryLabel::Tangential) viol = (dir - nu * nu.dot(dir)).norm();
          else viol = dir.norm();  // dirichlet admits nothing
          worst = std::max(worst, viol);
        }
      }
      ++count;
    }
  }
  return make_check("constraint-conformity", worst, 1e-9, count);
}

}  // namespace

bool VerifyResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<std::string> VerifyResult::failures() const {
  std::vector<std::string> f;
  for (const auto& c : checks)
    if (!c.passed) f.push_back(c.name);
  return f;
}

nlohmann::json VerifyResult::to_json() const {
  nlohmann::json j;
  j["passed"] = passed();
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name},
                   {"max_residual", c.max_residual},
                   {"tolerance", c.tolerance},
                   {"cases", c.cases},
                   {"passed", c.passed}});
  j["checks"] = arr;
  j["failures"] = failures();
  return j;
}

VerifyResult run_verification(const VerifyOptions& options) {
  VerifyResult result;
  std::mt19937_64 rng(options.seed);
  if (options.run_identity_checks) {
    result.checks.push_back(check_pointwise(options.trials, rng));
    result.checks.push_back(check_rot_roundtrip(options.trials, rng));
    result.checks.push_back(check_energy_identities(options.trials, rng));
    result.checks.push_back(check_grisvard(options.trials, rng));
    result.checks.push_back(check_h10_korn(options.trials, rng));
    result.checks.push_back(check_bc_families(options.trials, rng));
    result.checks.push_back(check_divfree_attainment(options.trials, rng));
  }
  if (options.run_form_checks) {
    result.checks.push_back(check_form_decompositions(options.inject_failure));
    result.checks.push_back(check_reduced_identities());
    result.checks.push_back(check_constraint_conformity());
  }
  return result;
}

}  // namespace korngauge::verify
