#include "korngauge/polyfield.hpp"

#include "korngauge/meshkit.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace korngauge;
using polyfield::Polynomial;
using polyfield::PolyVecField;

namespace {

// brute-force quadrature oracle for triangles/tets: tensor Gauss-Legendre
// through the Duffy transform; exact for moderate-degree polynomials and
// fully independent of the barycentric monomial formula
struct Gauss {
  std::vector<double> x, w;  // on [0,1]
  explicit Gauss(int n) {
    // Newton on Legendre polynomials
    for (int i = 0; i < n; ++i) {
      double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        const double dp = n * (t * p1 - p0) / (t * t - 1.0);
        const double step = p1 / dp;
        t -= step;
        if (std::abs(step) < 1e-15) break;
      }
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (t * p1 - p0) / (t * t - 1.0);
      x.push_back(0.5 * (t + 1.0));
      w.push_back(1.0 / ((1.0 - t * t) * dp * dp));
    }
  }
};

double duffy_integrate(const Polynomial& p, const Eigen::MatrixXd& verts) {
  const int d = static_cast<int>(verts.rows()) - 1;
  const Gauss g(12);
  double sum = 0.0;
  if (d == 2) {
    for (size_t i = 0; i < g.x.size(); ++i)
      for (size_t j = 0; j < g.x.size(); ++j) {
        const double u = g.x[i], v = g.x[j] * (1.0 - u);
        const double jac = 1.0 - u;
        Eigen::VectorXd pt = verts.row(0).transpose() + u * (verts.row(1) - verts.row(0)).transpose() +
                             v * (verts.row(2) - verts.row(0)).transpose();
        sum += g.w[i] * g.w[j] * jac * p.eval(pt);
      }
    Eigen::MatrixXd e(2, 2);
    e.col(0) = (verts.row(1) - verts.row(0)).transpose();
    e.col(1) = (verts.row(2) - verts.row(0)).transpose();
    return sum * std::abs(e.determinant());
  }
  for (size_t i = 0; i < g.x.size(); ++i)
    for (size_t j = 0; j < g.x.size(); ++j)
      for (size_t k = 0; k < g.x.size(); ++k) {
        const double u = g.x[i];
        const double v = g.x[j] * (1.0 - u);
        const double w = g.x[k] * (1.0 - u - v);
        const double jac = (1.0 - u) * (1.0 - u - v);
        Eigen::VectorXd pt = verts.row(0).transpose() + u * (verts.row(1) - verts.row(0)).transpose() +
                             v * (verts.row(2) - verts.row(0)).transpose() +
                             w * (verts.row(3) - verts.row(0)).transpose();
        sum += g.w[i] * g.w[j] * g.w[k] * jac * p.eval(pt);
      }
  Eigen::MatrixXd e(3, 3);
  for (int c = 0; c < 3; ++c) e.col(c) = (verts.row(c + 1) - verts.row(0)).transpose();
  return sum * std::abs(e.determinant());
}

Eigen::MatrixXd unit_triangle() {
  Eigen::MatrixXd v(3, 2);
  v << 0, 0, 1, 0, 0, 1;
  return v;
}

meshkit::SimplicialMesh unit_square_mesh(double h = 1.0) {
  return meshkit::generate(meshkit::ShapeSpec{meshkit::ShapeKind::Square, 0}, h);
}

meshkit::SimplicialMesh unit_cube_mesh(double h = 1.0) {
  return meshkit::generate(meshkit::ShapeSpec{meshkit::ShapeKind::Cube, 0}, h);
}

}  // namespace

TEST_CASE("polynomial arithmetic basics") {
  const Polynomial x = Polynomial::variable(2, 0);
  const Polynomial y = Polynomial::variable(2, 1);
  const Polynomial p = x * x * 3.0 + y * -2.0 + Polynomial::constant(2, 1.0);
  Eigen::Vector2d at(2.0, 5.0);
  CHECK(p.eval(at) == doctest::Approx(12.0 - 10.0 + 1.0));
  CHECK(p.degree() == 2);
  CHECK(p.derivative(0).eval(at) == doctest::Approx(12.0));
  CHECK(p.derivative(1).eval(at) == doctest::Approx(-2.0));
  CHECK((p - p).is_zero());
}

TEST_CASE("compose_affine matches evaluation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const auto v = polyfield::random_field(3, 3, 99);
  Eigen::VectorXd offset(3);
  Eigen::MatrixXd map(3, 2);
  for (int i = 0; i < 3; ++i) {
    offset[i] = dist(rng);
    for (int j = 0; j < 2; ++j) map(i, j) = dist(rng);
  }
  const Polynomial composed = v.comp[0].compose_affine(offset, map);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd y(2);
    y << dist(rng), dist(rng);
    CHECK(composed.eval(y) == doctest::Approx(v.comp[0].eval(offset + map * y)).epsilon(1e-12));
  }
}

TEST_CASE("integrate_simplex: unit triangle basics") {
  CHECK(polyfield::integrate_simplex(Polynomial::constant(2, 1.0), unit_triangle()) == doctest::Approx(0.5));
  CHECK(polyfield::integrate_simplex(Polynomial::variable(2, 0), unit_triangle()) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  const Polynomial x2y = Polynomial::variable(2, 0) * Polynomial::variable(2, 0) * Polynomial::variable(2, 1);
  CHECK(polyfield::integrate_simplex(x2y, unit_triangle()) == doctest::Approx(1.0 / 60.0).epsilon(1e-13));
}

TEST_CASE("integrate_simplex: random polynomials vs Duffy quadrature oracle") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  Eigen::MatrixXd tri(3, 2);
  tri << 0.2, -0.1, 1.3, 0.4, 0.3, 1.1;
  Eigen::MatrixXd tet(4, 3);
  tet << 0, 0, 0, 1.2, 0.1, 0, 0.2, 1.1, 0.1, 0.1, 0.2, 0.9;

  for (int t = 0; t < 10; ++t) {
    const auto p2 = polyfield::random_field(2, 4, rng()).comp[0];
    const double exact = polyfield::integrate_simplex(p2, tri);
    CHECK(exact == doctest::Approx(duffy_integrate(p2, tri)).epsilon(1e-12));

    const auto p3 = polyfield::random_field(3, 3, rng()).comp[0];
    const double exact3 = polyfield::integrate_simplex(p3, tet);
    CHECK(exact3 == doctest::Approx(duffy_integrate(p3, tet)).epsilon(1e-12));
  }
}

TEST_CASE("integrate_simplex: facet (edge) integration in ambient coordinates") {
  // int over the segment (0,0)-(1,0) of x^2 equals 1/3
  Eigen::MatrixXd seg(2, 2);
  seg << 0, 0, 1, 0;
  const Polynomial x2 = Polynomial::variable(2, 0) * Polynomial::variable(2, 0);
  CHECK(polyfield::integrate_simplex(x2, seg) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("integrate_simplex: degenerate simplex throws") {
  Eigen::MatrixXd bad(3, 2);
  bad << 0, 0, 1, 1, 2, 2;
  CHECK_THROWS_AS(polyfield::integrate_simplex(Polynomial::constant(2, 1.0), bad), std::invalid_argument);
}

TEST_CASE("energy_integrals: rigid rotation on the unit square") {
  PolyVecField v(2);
  v.comp[0] = Polynomial::variable(2, 1);
  v.comp[1] = -Polynomial::variable(2, 0);
  const auto e = polyfield::energy_integrals(v, unit_square_mesh());
  CHECK(e.grad2 == doctest::Approx(2.0));
  CHECK(e.sym2 == doctest::Approx(0.0));
  CHECK(e.rot2 == doctest::Approx(4.0));
  CHECK(e.div2 == doctest::Approx(0.0));
}

TEST_CASE("energy_integrals: identity field") {
  PolyVecField v(2);
  v.comp[0] = Polynomial::variable(2, 0);
  v.comp[1] = Polynomial::variable(2, 1);
  const auto e = polyfield::energy_integrals(v, unit_square_mesh());
  CHECK(e.grad2 == doctest::Approx(2.0));
  CHECK(e.div2 == doctest::Approx(4.0));
  CHECK(e.rot2 == doctest::Approx(0.0));
}

TEST_CASE("energy_integrals: pointwise identities integrate on the L-shape") {
  const auto mesh = meshkit::generate(meshkit::ShapeSpec{meshkit::ShapeKind::LShape, 0}, 0.5);
  std::mt19937_64 rng(31);
  for (int t = 0; t < 25; ++t) {
    const auto v = polyfield::random_field(2, 3, rng());
    const auto e = polyfield::energy_integrals(v, mesh);
    const double scale = 1.0 + e.grad2;
    CHECK(std::abs(e.grad2 - (e.devsym2 + e.div2 / 2.0 + e.rot2 / 2.0)) <= 1e-12 * scale);
    CHECK(std::abs(e.grad2 - (e.rot2 + e.cross)) <= 1e-12 * scale);
  }
}

TEST_CASE("surface_term_Ib: zero-trace bubble gives zero") {
  const auto mesh = unit_square_mesh();
  const Polynomial x = Polynomial::variable(2, 0);
  const Polynomial y = Polynomial::variable(2, 1);
  const Polynomial bubble = (x - x * x) * (y - y * y);
  PolyVecField v(2);
  v.comp[0] = bubble * 2.0;
  v.comp[1] = bubble * -3.0;
  CHECK(polyfield::surface_term_Ib(v, mesh) == doctest::Approx(0.0));
}

TEST_CASE("surface_term_Ib: normal-trace-free field gives zero") {
  const auto mesh = unit_square_mesh();
  const auto v = polyfield::bc_field_family(2, polyfield::BcKind::Normal, 404);
  CHECK(std::abs(polyfield::surface_term_Ib(v, mesh)) <= 1e-12);
}

TEST_CASE("surface_term_Ib: generic field closes the integration-by-parts identity") {
  const auto mesh = unit_square_mesh();
  std::mt19937_64 rng(41);
  for (int t = 0; t < 10; ++t) {
    const auto v = polyfield::random_field(2, 3, rng());
    const auto e = polyfield::energy_integrals(v, mesh);
    const double ib = polyfield::surface_term_Ib(v, mesh);
    CHECK(std::abs(e.grad2 - ib - (2.0 * e.sym2 - e.div2)) <= 1e-12 * (1.0 + e.grad2));
  }
}

TEST_CASE("verify_grisvard: random fields on square and cube") {
  std::mt19937_64 rng(51);
  for (const auto& mesh : {unit_square_mesh(0.5), unit_cube_mesh(0.5)}) {
    for (int t = 0; t < (mesh.dim == 2 ? 40 : 10); ++t) {
      const auto v = polyfield::random_field(mesh.dim, 3, rng());
      const auto rep = polyfield::verify_grisvard(v, mesh);
      CHECK(rep.within(1e-10));
    }
  }
}

TEST_CASE("verify_grisvard: constant field reads 0 = 0") {
  PolyVecField v(2);
  v.comp[0] = Polynomial::constant(2, 3.0);
  v.comp[1] = Polynomial::constant(2, -1.0);
  const auto rep = polyfield::verify_grisvard(v, unit_square_mesh());
  CHECK(rep.grad2 == doctest::Approx(0.0));
  CHECK(rep.ib == doctest::Approx(0.0));
  CHECK(rep.within(1e-14));
}

TEST_CASE("verify_h10_korn: N=2 bubble field hits the equality branch") {
  const auto mesh = unit_square_mesh();
  const Polynomial x = Polynomial::variable(2, 0);
  const Polynomial y = Polynomial::variable(2, 1);
  const Polynomial bubble = (x - x * x) * (y - y * y);
  PolyVecField v(2);
  v.comp[0] = bubble * (x * 2.0 + y);
  v.comp[1] = bubble * (Polynomial::constant(2, 1.0) - y * 3.0);
  const auto rep = polyfield::verify_h10_korn(v, mesh);
  CHECK(std::abs(rep.residual_gaffney) <= 1e-10 * (1.0 + rep.grad2));
  CHECK(std::abs(rep.residual_devsym) <= 1e-10 * (1.0 + rep.grad2));
  CHECK(rep.equality_devsym);  // (2-N)/N vanishes for N=2
}

TEST_CASE("verify_h10_korn: N=3 with nonzero divergence is strictly below the bound") {
  const auto mesh = unit_cube_mesh();
  PolyVecField v(3);
  Polynomial bubble = Polynomial::constant(3, 1.0);
  for (int i = 0; i < 3; ++i) {
    const Polynomial xi = Polynomial::variable(3, i);
    bubble = bubble * (xi - xi * xi);
  }
  v.comp[0] = bubble * Polynomial::variable(3, 0);
  v.comp[1] = bubble * 2.0;
  v.comp[2] = bubble * Polynomial::variable(3, 2) * -1.0;
  const auto rep = polyfield::verify_h10_korn(v, mesh);
  CHECK(std::abs(rep.residual_gaffney) <= 1e-10 * (1.0 + rep.grad2));
  CHECK(std::abs(rep.residual_devsym) <= 1e-10 * (1.0 + rep.grad2));
  CHECK(rep.div2 > 1e-8);
  CHECK_FALSE(rep.equality_devsym);
  CHECK(rep.grad2 < 2.0 * rep.devsym2);
}

TEST_CASE("verify_h10_korn: zero field") {
  PolyVecField v(2);
  const auto rep = polyfield::verify_h10_korn(v, unit_square_mesh());
  CHECK(rep.grad2 == doctest::Approx(0.0));
}

TEST_CASE("verify_h10_korn: non-vanishing trace is rejected") {
  PolyVecField v(2);
  v.comp[0] = Polynomial::variable(2, 0);
  v.comp[1] = Polynomial::constant(2, 0.0);
  CHECK_THROWS_AS(polyfield::verify_h10_korn(v, unit_square_mesh()), polyfield::trace_not_zero_error);
}

TEST_CASE("bc_field_family: normal family has zero normal trace on every facet") {
  for (int dim : {2, 3}) {
    const auto mesh = dim == 2 ? unit_square_mesh(0.5) : unit_cube_mesh(0.5);
    const auto v = polyfield::bc_field_family(dim, polyfield::BcKind::Normal, 77);
    for (int f = 0; f < static_cast<int>(mesh.boundary.size()); ++f) {
      const auto trace = polyfield::facet_trace(v, mesh, f);
      // restrict v_n to the facet and demand the zero polynomial
      const Eigen::MatrixXd fm = mesh.facet_matrix(f);
      Eigen::MatrixXd edges(dim, dim - 1);
      for (int k = 0; k + 1 < dim; ++k) edges.col(k) = (fm.row(k + 1) - fm.row(0)).transpose();
      const Polynomial restricted = trace.vn.compose_affine(fm.row(0).transpose(), edges);
      CHECK(restricted.is_zero(1e-12));
    }
  }
}

TEST_CASE("bc_field_family: tangential family has zero tangential trace on every facet") {
  for (int dim : {2, 3}) {
    const auto mesh = dim == 2 ? unit_square_mesh(0.5) : unit_cube_mesh(0.5);
    const auto v = polyfield::bc_field_family(dim, polyfield::BcKind::Tangential, 78);
    for (int f = 0; f < static_cast<int>(mesh.boundary.size()); ++f) {
      const auto trace = polyfield::facet_trace(v, mesh, f);
      const Eigen::MatrixXd fm = mesh.facet_matrix(f);
      Eigen::MatrixXd edges(dim, dim - 1);
      for (int k = 0; k + 1 < dim; ++k) edges.col(k) = (fm.row(k + 1) - fm.row(0)).transpose();
      for (int c = 0; c < dim; ++c) {
        const Polynomial restricted = trace.vt.comp[c].compose_affine(fm.row(0).transpose(), edges);
        CHECK(restricted.is_zero(1e-12));
      }
    }
  }
}

TEST_CASE("bc_field_family: deterministic for a fixed seed") {
  const auto a = polyfield::bc_field_family(2, polyfield::BcKind::Normal, 123);
  const auto b = polyfield::bc_field_family(2, polyfield::BcKind::Normal, 123);
  for (int c = 0; c < 2; ++c) CHECK((a.comp[c] - b.comp[c]).is_zero());
}

TEST_CASE("facet_trace invariants: v = v_t + v_n nu and v_t . nu = 0") {
  const auto mesh = unit_square_mesh();
  const auto v = polyfield::random_field(2, 3, 55);
  std::mt19937_64 rng(56);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int f = 0; f < static_cast<int>(mesh.boundary.size()); ++f) {
    const auto trace = polyfield::facet_trace(v, mesh, f);
    for (int t = 0; t < 5; ++t) {
      Eigen::Vector2d x(dist(rng), dist(rng));
      const Eigen::VectorXd lhs = v.eval(x);
      const Eigen::VectorXd rhs = trace.vt.eval(x) + trace.vn.eval(x) * trace.normal;
      CHECK((lhs - rhs).norm() <= 1e-13);
      CHECK(std::abs(trace.vt.eval(x).dot(trace.normal)) <= 1e-13);
    }
  }
}
