#include "korngauge/fem.hpp"

#include "korngauge/meshkit.hpp"
#include "korngauge/polyfield.hpp"
#include "korngauge/tensorcalc.hpp"

#include <doctest.h>

#include <random>

using namespace korngauge;
using meshkit::BoundaryLabel;
using meshkit::NormalMode;
using meshkit::ShapeKind;
using meshkit::ShapeSpec;
using polyfield::Polynomial;
using polyfield::PolyVecField;

namespace {

meshkit::SimplicialMesh labeled(ShapeSpec spec, double h, const std::string& rule) {
  return meshkit::apply_named_labeling(meshkit::generate(spec, h), rule);
}

double form_value(const fem::SpMat& m, const Eigen::VectorXd& u) { return u.dot(m * u); }

}  // namespace

TEST_CASE("assemble: GradGrad of the identity field equals N * area") {
  const auto mesh = meshkit::generate(ShapeSpec{ShapeKind::Square, 0}, 1.0);
  const fem::FeSpace space(mesh, 1);
  PolyVecField v(2);
  v.comp[0] = Polynomial::variable(2, 0);
  v.comp[1] = Polynomial::variable(2, 1);
  const Eigen::VectorXd u = space.interpolate(v);
  const auto grad = fem::assemble(space, fem::FormKind::GradGrad);
  CHECK(form_value(grad, u) == doctest::Approx(2.0).epsilon(1e-13));
  const auto div = fem::assemble(space, fem::FormKind::DivDiv);
  CHECK(form_value(div, u) == doctest::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("assemble: forms of interpolated polynomials match exact integrals") {
  // degree <= order fields interpolate exactly, so every assembled form must
  // reproduce the exact polynomial energies
  for (int order : {1, 2}) {
    for (int dim : {2, 3}) {
      const auto mesh = meshkit::generate(
          ShapeSpec{dim == 2 ? ShapeKind::Square : ShapeKind::Cube, 0}, 0.5);
      const fem::FeSpace space(mesh, order);
      const auto field = polyfield::random_field(dim, order, 1234 + order + dim);
      const Eigen::VectorXd u = space.interpolate(field);
      const auto energies = polyfield::energy_integrals(field, mesh);

      CHECK(form_value(fem::assemble(space, fem::FormKind::GradGrad), u) ==
            doctest::Approx(energies.grad2).epsilon(1e-12));
      CHECK(form_value(fem::assemble(space, fem::FormKind::SymSym), u) ==
            doctest::Approx(energies.sym2).epsilon(1e-12));
      CHECK(form_value(fem::assemble(space, fem::FormKind::DevSymDevSym), u) ==
            doctest::Approx(energies.devsym2).epsilon(1e-12));
      CHECK(form_value(fem::assemble(space, fem::FormKind::DivDiv), u) ==
            doctest::Approx(energies.div2).epsilon(1e-12));
      CHECK(form_value(fem::assemble(space, fem::FormKind::RotRot), u) ==
            doctest::Approx(energies.rot2).epsilon(1e-12));
    }
  }
}

TEST_CASE("assemble: mass form of an interpolated field matches the exact L2 norm") {
  const auto mesh = meshkit::generate(ShapeSpec{ShapeKind::Square, 0}, 0.5);
  const fem::FeSpace space(mesh, 2);
  const auto field = polyfield::random_field(2, 2, 77);
  const Eigen::VectorXd u = space.interpolate(field);
  Polynomial norm2(2);
  for (int c = 0; c < 2; ++c) norm2 = norm2 + field.comp[c] * field.comp[c];
  const double exact = polyfield::integrate_over_mesh(norm2, mesh);
  CHECK(form_value(fem::assemble(space, fem::FormKind::Mass), u) == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("assemble: SymSym annihilates rigid motions") {
  for (int order : {1, 2}) {
    const auto mesh = meshkit::generate(ShapeSpec{ShapeKind::NGon, 7}, 0.5);
    const fem::FeSpace space(mesh, order);
    const auto sym = fem::assemble(space, fem::FormKind::SymSym);
    const auto rigid = fem::rigid_motion_basis(space);
    REQUIRE(rigid.fields.size() == 3);  // 2 translations + 1 rotation
    for (const auto& r : rigid.fields) CHECK((sym * r).norm() <= 1e-12 * r.norm());
  }
}

TEST_CASE("assemble: matrix identities hold for random coefficient vectors") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss;
  const auto mesh = meshkit::generate(ShapeSpec{ShapeKind::Cube, 0}, 0.5);
  for (int order : {1, 2}) {
    const fem::FeSpace space(mesh, order);
    const auto grad = fem::assemble(space, fem::FormKind::GradGrad);
    const auto sym = fem::assemble(space, fem::FormKind::SymSym);
    const auto rot = fem::assemble(space, fem::FormKind::RotRot);
    const auto div = fem::assemble(space, fem::FormKind::DivDiv);
    const auto devsym = fem::assemble(space, fem::FormKind::DevSymDevSym);
    for (int t = 0; t < 10; ++t) {
      Eigen::VectorXd u(space.n_dof());
      for (int i = 0; i < u.size(); ++i) u[i] = gauss(rng);
      const double g = form_value(grad, u);
      CHECK(std::abs(g - form_value(sym, u) - 0.5 * form_value(rot, u)) <= 1e-12 * (1.0 + g));
      CHECK(std::abs(form_value(sym, u) - form_value(devsym, u) - form_value(div, u) / 3.0) <=
            1e-12 * (1.0 + g));
    }
  }
}

TEST_CASE("assemble: matrices are exactly symmetric") {
  const auto mesh = meshkit::generate(ShapeSpec{ShapeKind::Square, 0}, 0.25);
  const fem::FeSpace space(mesh, 2);
  for (auto kind : {fem::FormKind::GradGrad, fem::FormKind::SymSym, fem::FormKind::DevSymDevSym,
                    fem::FormKind::DivDiv, fem::FormKind::RotRot, fem::FormKind::Mass}) {
    const Eigen::MatrixXd m = fem::to_dense(fem::assemble(space, kind));
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("assemble_rot_moment matches the exact rot integral") {
  for (int dim : {2, 3}) {
    const auto mesh =
        meshkit::generate(ShapeSpec{dim == 2 ? ShapeKind::Square : ShapeKind::Cube, 0}, 0.5);
    const fem::FeSpace space(mesh, 2);
    const auto field = polyfield::random_field(dim, 2, 31 + dim);
    const Eigen::VectorXd u = space.interpolate(field);
    const auto rot_polys = field.rot();
    for (int m = 0; m < tensorcalc::rot_dim(dim); ++m) {
      Eigen::VectorXd sigma = Eigen::VectorXd::Zero(tensorcalc::rot_dim(dim));
      sigma[m] = 1.0;
      const Eigen::VectorXd b = fem::assemble_rot_moment(space, sigma);
      const double exact = polyfield::integrate_over_mesh(rot_polys[static_cast<size_t>(m)], mesh);
      CHECK(b.dot(u) == doctest::Approx(exact).epsilon(1e-12));
    }
  }
}

TEST_CASE("build_constraints: all-normal square rank counts") {
  const auto mesh = labeled(ShapeSpec{ShapeKind::Square, 0}, 0.5, "all-normal");
  const fem::FeSpace space(mesh, 1);
  const auto basis = fem::build_constraints(space);
  // 9 nodes: 4 corners clamped, 4 edge midside nodes keep the tangential
  // direction, 1 interior node unconstrained
  CHECK(basis.n_red == 0 * 4 + 1 * 4 + 2 * 1);
  for (int node = 0; node < space.n_nodes(); ++node) {
    const Eigen::VectorXd x = space.node_coord(node);
    const int on_edges = (x[0] == 0.0) + (x[0] == 1.0) + (x[1] == 0.0) + (x[1] == 1.0);
    CHECK(basis.node_free_dims[static_cast<size_t>(node)] == 2 - on_edges);
  }
}

TEST_CASE("build_constraints: all-tangential square keeps normal directions") {
  const auto mesh = labeled(ShapeSpec{ShapeKind::Square, 0}, 0.5, "all-tangential");
  const fem::FeSpace space(mesh, 1);
  const auto basis = fem::build_constraints(space);
  CHECK(basis.n_red == 6);  // corners clamped, edge nodes keep 1, interior 2
  const Eigen::MatrixXd z = fem::to_dense(basis.z);
  for (int node = 0; node < space.n_nodes(); ++node) {
    const Eigen::VectorXd x = space.node_coord(node);
    if (basis.node_free_dims[static_cast<size_t>(node)] != 1) continue;
    // the surviving direction on an edge-interior node is the edge normal
    Eigen::VectorXd dir(2);
    int col = -1;
    for (int c = 0; c < basis.n_red && col < 0; ++c)
      if (z(space.dof(node, 0), c) != 0.0 || z(space.dof(node, 1), c) != 0.0) col = c;
    REQUIRE(col >= 0);
    dir << z(space.dof(node, 0), col), z(space.dof(node, 1), col);
    const bool horizontal_edge = (x[1] == 0.0 || x[1] == 1.0);
    CHECK(std::abs(std::abs(dir[horizontal_edge ? 1 : 0]) - 1.0) <= 1e-12);
  }
}

TEST_CASE("build_constraints: dirichlet clamps down to interior dofs") {
  const auto mesh = labeled(ShapeSpec{ShapeKind::Square, 0}, 0.25, "all-dirichlet");
  for (int order : {1, 2}) {
    const fem::FeSpace space(mesh, order);
    const auto basis = fem::build_constraints(space);
    int interior = 0;
    for (int node = 0; node < space.n_nodes(); ++node) {
      const Eigen::VectorXd x = space.node_coord(node);
      const bool boundary =
          x[0] == 0.0 || x[0] == 1.0 || x[1] == 0.0 || x[1] == 1.0;
      if (!boundary) ++interior;
    }
    CHECK(basis.n_red == 2 * interior);
  }
}

TEST_CASE("build_constraints: Z has orthonormal columns") {
  const auto mesh = labeled(ShapeSpec{ShapeKind::NGon, 8}, 1.0, "west-t-rest-n");
  const fem::FeSpace space(mesh, 2);
  const auto basis = fem::build_constraints(space);
  const Eigen::MatrixXd ztz = fem::to_dense(fem::reduce(
      fem::SpMat(Eigen::MatrixXd::Identity(space.n_dof(), space.n_dof()).sparseView()), basis));
  CHECK((ztz - Eigen::MatrixXd::Identity(basis.n_red, basis.n_red)).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("exact-circle constraints admit the interpolated rotation") {
  const auto mesh = labeled(ShapeSpec{ShapeKind::NGon, 12}, 1.0, "all-normal");
  const fem::FeSpace space(mesh, 1);
  const auto facet_basis = fem::build_constraints(space, NormalMode::Facet);
  const auto circle_basis = fem::build_constraints(space, NormalMode::ExactCircle);
  const auto rigid = fem::rigid_motion_basis(space);

  const auto in_facet = fem::rigid_motions_in_constrained_space(rigid, facet_basis);
  CHECK(in_facet.empty());

  const auto in_circle = fem::rigid_motions_in_constrained_space(rigid, circle_basis);
  REQUIRE(in_circle.size() == 1);
  CHECK(rigid.names[static_cast<size_t>(in_circle[0])] == "rotation-xy");
}

TEST_CASE("free labels admit the whole rigid basis") {
  const auto mesh = labeled(ShapeSpec{ShapeKind::Square, 0}, 0.5, "all-free");
  const fem::FeSpace space(mesh, 1);
  const auto basis = fem::build_constraints(space);
  CHECK(basis.n_red == space.n_dof());
  const auto rigid = fem::rigid_motion_basis(space);
  CHECK(fem::rigid_motions_in_constrained_space(rigid, basis).size() == rigid.fields.size());
}

TEST_CASE("exact-circle mode rejects off-circle nodes") {
  // P2 midpoint nodes of a polygon chord are strictly inside the circle
  const auto mesh = labeled(ShapeSpec{ShapeKind::NGon, 12}, 1.0, "all-normal");
  const fem::FeSpace space(mesh, 2);
  CHECK_THROWS_AS(fem::build_constraints(space, NormalMode::ExactCircle), fem::geometry_mismatch_error);

  // square corners are not on the unit circle either
  const auto square = labeled(ShapeSpec{ShapeKind::Square, 0}, 1.0, "all-normal");
  const fem::FeSpace square_space(square, 1);
  CHECK_THROWS_AS(fem::build_constraints(square_space, NormalMode::ExactCircle),
                  fem::geometry_mismatch_error);
}

TEST_CASE("reduce: identity basis leaves the matrix unchanged") {
  const auto mesh = labeled(ShapeSpec{ShapeKind::Square, 0}, 0.5, "all-free");
  const fem::FeSpace space(mesh, 1);
  const auto basis = fem::build_constraints(space);
  const auto grad = fem::assemble(space, fem::FormKind::GradGrad);
  const auto reduced = fem::reduce(grad, basis);
  CHECK((fem::to_dense(reduced) - fem::to_dense(grad)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("reduce: discrete Gaffney equality on the all-normal square") {
  const auto mesh = labeled(ShapeSpec{ShapeKind::Square, 0}, 0.25, "all-normal");
  for (int order : {1, 2}) {
    const fem::FeSpace space(mesh, order);
    const auto basis = fem::build_constraints(space);
    const auto grad = fem::reduce(fem::assemble(space, fem::FormKind::GradGrad), basis);
    const auto rot = fem::reduce(fem::assemble(space, fem::FormKind::RotRot), basis);
    const auto div = fem::reduce(fem::assemble(space, fem::FormKind::DivDiv), basis);
    const double scale = fem::to_dense(grad).norm();
    CHECK((fem::to_dense(grad) - fem::to_dense(rot) - fem::to_dense(div)).norm() <= 1e-10 * scale);
  }
}

TEST_CASE("FeSpace: P2 facet nodes cover vertices and midpoints") {
  const auto mesh = labeled(ShapeSpec{ShapeKind::Cube, 0}, 1.0, "all-normal");
  const fem::FeSpace space(mesh, 2);
  for (int f = 0; f < static_cast<int>(mesh.boundary.size()); ++f) {
    const auto nodes = space.facet_nodes(f);
    CHECK(nodes.size() == 6);  // 3 vertices + 3 edge midpoints
    const Eigen::VectorXd nu = mesh.facet_normal(f);
    const Eigen::VectorXd x0 = space.node_coord(nodes[0]);
    for (int node : nodes)
      CHECK(std::abs(nu.dot(space.node_coord(node) - x0)) <= 1e-13);  // coplanar with the facet
  }
}
