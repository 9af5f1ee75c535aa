#include "korngauge/polyfield.hpp"

#include "korngauge/meshkit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace korngauge::polyfield {

namespace {

int total_degree(const Polynomial::Mono& m) {
  int d = 0;
  for (auto e : m) d += e;
  return d;
}

// factorials up to 20 fit in uint64 (20! ~ 2.4e18)
double factorial(int n) {
  static const auto table = [] {
    std::array<double, 21> t{};
    t[0] = 1.0;
    for (int i = 1; i <= 20; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  if (n < 0 || n > 20) throw std::invalid_argument("factorial: out of supported range");
  return table[n];
}

}  // namespace

Polynomial::Polynomial(int nvars) : nvars_(nvars) {
  if (nvars < 1 || nvars > kMaxVars) throw std::invalid_argument("Polynomial: unsupported variable count");
}

Polynomial Polynomial::constant(int nvars, double c) {
  Polynomial p(nvars);
  if (c != 0.0) p.terms_[Mono{}] = c;
  return p;
}

Polynomial Polynomial::variable(int nvars, int var) {
  Polynomial p(nvars);
  if (var < 0 || var >= nvars) throw std::invalid_argument("Polynomial::variable: index out of range");
  Mono m{};
  m[var] = 1;
  p.terms_[m] = 1.0;
  return p;
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& [m, c] : terms_) d = std::max(d, total_degree(m));
  return d;
}

bool Polynomial::is_zero(double tol) const {
  for (const auto& [m, c] : terms_)
    if (std::abs(c) > tol) return false;
  return true;
}

double Polynomial::max_abs_coeff() const {
  double a = 0.0;
  for (const auto& [m, c] : terms_) a = std::max(a, std::abs(c));
  return a;
}

void Polynomial::add_term(const Mono& m, double c) {
  terms_[m] += c;
  if (terms_[m] == 0.0) terms_.erase(m);
}

double Polynomial::coeff(const Mono& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::prune() {
  for (auto it = terms_.begin(); it != terms_.end();)
    it = (it->second == 0.0) ? terms_.erase(it) : std::next(it);
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  if (nvars_ != o.nvars_) throw std::invalid_argument("polynomial arity mismatch");
  Polynomial r = *this;
  for (const auto& [m, c] : o.terms_) r.terms_[m] += c;
  r.prune();
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  *this = *this + o;
  return *this;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (o * -1.0); }

Polynomial Polynomial::operator-() const { return *this * -1.0; }

Polynomial Polynomial::operator*(double s) const {
  Polynomial r(nvars_);
  if (s == 0.0) return r;
  for (const auto& [m, c] : terms_) r.terms_[m] = c * s;
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (nvars_ != o.nvars_) throw std::invalid_argument("polynomial arity mismatch");
  Polynomial r(nvars_);
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : o.terms_) {
      Mono m{};
      for (int v = 0; v < kMaxVars; ++v) {
        const int e = ma[v] + mb[v];
        if (e > 255) throw std::overflow_error("polynomial degree overflow");
        m[v] = static_cast<std::uint8_t>(e);
      }
      r.terms_[m] += ca * cb;
    }
  r.prune();
  return r;
}

Polynomial Polynomial::derivative(int var) const {
  if (var < 0 || var >= nvars_) throw std::invalid_argument("derivative: index out of range");
  Polynomial r(nvars_);
  for (const auto& [m, c] : terms_) {
    if (m[var] == 0) continue;
    Mono d = m;
    d[var] -= 1;
    r.terms_[d] += c * m[var];
  }
  r.prune();
  return r;
}

double Polynomial::eval(const Eigen::VectorXd& x) const {
  if (x.size() != nvars_) throw std::invalid_argument("eval: point arity mismatch");
  double s = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = c;
    for (int v = 0; v < nvars_; ++v)
      for (int k = 0; k < m[v]; ++k) t *= x[v];
    s += t;
  }
  return s;
}

Polynomial Polynomial::compose_affine(const Eigen::VectorXd& offset, const Eigen::MatrixXd& map) const {
  if (offset.size() != nvars_ || map.rows() != nvars_)
    throw std::invalid_argument("compose_affine: shape mismatch");
  const int m_out = static_cast<int>(map.cols());

  // the substituted linear form for each original variable
  std::vector<Polynomial> lin;
  lin.reserve(nvars_);
  for (int v = 0; v < nvars_; ++v) {
    Polynomial l = Polynomial::constant(m_out, offset[v]);
    for (int k = 0; k < m_out; ++k)
      if (map(v, k) != 0.0) l = l + Polynomial::variable(m_out, k) * map(v, k);
    lin.push_back(l);
  }

  // memoized powers of the linear forms
  std::vector<std::vector<Polynomial>> pow(nvars_);
  for (int v = 0; v < nvars_; ++v) pow[v].push_back(Polynomial::constant(m_out, 1.0));

  Polynomial out(m_out);
  for (const auto& [mono, c] : terms_) {
    Polynomial t = Polynomial::constant(m_out, c);
    for (int v = 0; v < nvars_; ++v) {
      while (static_cast<int>(pow[v].size()) <= mono[v]) pow[v].push_back(pow[v].back() * lin[v]);
      if (mono[v] > 0) t = t * pow[v][mono[v]];
    }
    out = out + t;
  }
  return out;
}

double integrate_simplex(const Polynomial& p, const Eigen::MatrixXd& vertices) {
  const int d = static_cast<int>(vertices.rows()) - 1;
  const int n = static_cast<int>(vertices.cols());
  if (d < 1 || d > n) throw std::invalid_argument("integrate_simplex: bad simplex shape");
  if (p.nvars() != n) throw std::invalid_argument("integrate_simplex: polynomial arity mismatch");

  Eigen::MatrixXd edges(n, d);
  for (int k = 0; k < d; ++k) edges.col(k) = (vertices.row(k + 1) - vertices.row(0)).transpose();

  // d-volume factor: sqrt(det(E^T E)) = d! * |simplex|
  const double gram = (edges.transpose() * edges).determinant();
  if (!(gram > 0.0)) throw std::invalid_argument("integrate_simplex: degenerate simplex");
  const double vol_factor = std::sqrt(gram);

  const Polynomial q = p.compose_affine(vertices.row(0).transpose(), edges);

  double sum = 0.0;
  for (const auto& [m, c] : q.terms()) {
    double num = 1.0;
    int total = 0;
    for (int v = 0; v < d; ++v) {
      num *= factorial(m[v]);
      total += m[v];
    }
    sum += c * num / factorial(total + d);
  }
  return sum * vol_factor;
}

double integrate_over_mesh(const Polynomial& p, const meshkit::SimplicialMesh& mesh) {
  double s = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) s += integrate_simplex(p, mesh.cell_matrix(c));
  return s;
}

PolyVecField::PolyVecField(int n) : dim(n), comp(n, Polynomial(n)) {
  if (n < 2 || n > kMaxVars) throw std::invalid_argument("PolyVecField: unsupported dimension");
}

int PolyVecField::degree() const {
  int d = -1;
  for (const auto& p : comp) d = std::max(d, p.degree());
  return d;
}

Polynomial PolyVecField::divergence() const {
  Polynomial s(dim);
  for (int i = 0; i < dim; ++i) s = s + comp[i].derivative(i);
  return s;
}

std::vector<Polynomial> PolyVecField::rot() const {
  std::vector<Polynomial> r;
  r.reserve(dim * (dim - 1) / 2);
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) r.push_back(comp[j].derivative(i) - comp[i].derivative(j));
  return r;
}

Eigen::VectorXd PolyVecField::eval(const Eigen::VectorXd& x) const {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = comp[i].eval(x);
  return v;
}

FacetTrace facet_trace(const PolyVecField& v, const meshkit::SimplicialMesh& mesh, int facet_index) {
  FacetTrace t;
  t.facet_index = facet_index;
  t.normal = mesh.facet_normal(facet_index);
  t.vn = Polynomial(v.dim);
  for (int i = 0; i < v.dim; ++i) t.vn = t.vn + v.comp[i] * t.normal[i];
  t.vt = PolyVecField(v.dim);
  for (int i = 0; i < v.dim; ++i) t.vt.comp[i] = v.comp[i] - t.vn * t.normal[i];
  return t;
}

EnergyIntegrals energy_integrals(const PolyVecField& v, const meshkit::SimplicialMesh& mesh) {
  const int n = v.dim;
  if (mesh.dim != n) throw std::invalid_argument("energy_integrals: dimension mismatch");

  std::vector<std::vector<Polynomial>> g(n, std::vector<Polynomial>(n, Polynomial(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g[i][j] = v.grad_entry(i, j);

  Polynomial grad2(n), sym2(n), div2(n), rot2(n), cross(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      grad2 = grad2 + g[i][j] * g[i][j];
      cross = cross + g[i][j] * g[j][i];
      const Polynomial s = (g[i][j] + g[j][i]) * 0.5;
      sym2 = sym2 + s * s;
    }
  const Polynomial dv = v.divergence();
  div2 = dv * dv;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Polynomial r = g[i][j] - g[j][i];
      rot2 = rot2 + r * r;
    }
  const Polynomial devsym2 = sym2 - div2 * (1.0 / n);

  EnergyIntegrals e;
  e.grad2 = integrate_over_mesh(grad2, mesh);
  e.sym2 = integrate_over_mesh(sym2, mesh);
  e.devsym2 = integrate_over_mesh(devsym2, mesh);
  e.div2 = integrate_over_mesh(div2, mesh);
  e.rot2 = integrate_over_mesh(rot2, mesh);
  e.cross = integrate_over_mesh(cross, mesh);
  return e;
}

double surface_term_Ib(const PolyVecField& v, const meshkit::SimplicialMesh& mesh) {
  const int n = v.dim;
  if (mesh.dim != n) throw std::invalid_argument("surface_term_Ib: dimension mismatch");

  double ib = 0.0;
  for (int f = 0; f < static_cast<int>(mesh.boundary.size()); ++f) {
    const FacetTrace t = facet_trace(v, mesh, f);
    const Eigen::VectorXd& nu = t.normal;

    // tangential projector P = I - nu nu^T; surface operators on the flat
    // facet act through P on ambient derivatives
    Polynomial div_g_vt(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double pij = (i == j ? 1.0 : 0.0) - nu[i] * nu[j];
        if (pij != 0.0) div_g_vt = div_g_vt + t.vt.comp[j].derivative(i) * pij;
      }

    Polynomial vt_dot_grad_g_vn(n);
    for (int i = 0; i < n; ++i) {
      Polynomial gi(n);
      for (int k = 0; k < n; ++k) {
        const double pik = (i == k ? 1.0 : 0.0) - nu[i] * nu[k];
        if (pik != 0.0) gi = gi + t.vn.derivative(k) * pik;
      }
      vt_dot_grad_g_vn = vt_dot_grad_g_vn + t.vt.comp[i] * gi;
    }

    const Polynomial integrand = t.vn * div_g_vt - vt_dot_grad_g_vn;
    ib += integrate_simplex(integrand, mesh.facet_matrix(f));
  }
  return ib;
}

bool GrisvardReport::within(double tol) const {
  const double scale = tol * (1.0 + grad2);
  return std::abs(residual_sym_side) <= scale && std::abs(residual_rot_side) <= scale;
}

GrisvardReport verify_grisvard(const PolyVecField& v, const meshkit::SimplicialMesh& mesh) {
  const EnergyIntegrals e = energy_integrals(v, mesh);
  const double ib = surface_term_Ib(v, mesh);
  GrisvardReport r;
  r.grad2 = e.grad2;
  r.ib = ib;
  r.residual_sym_side = e.grad2 - ib - (2.0 * e.sym2 - e.div2);
  r.residual_rot_side = e.grad2 + ib - (e.rot2 + e.div2);
  return r;
}

H10KornReport verify_h10_korn(const PolyVecField& v, const meshkit::SimplicialMesh& mesh) {
  // the whole trace must vanish: restrict every component to every facet
  // and require identically-zero coefficients
  const double scale = 1e-12 * (1.0 + [&] {
                         double a = 0.0;
                         for (const auto& c : v.comp) a = std::max(a, c.max_abs_coeff());
                         return a;
                       }());
  for (int f = 0; f < static_cast<int>(mesh.boundary.size()); ++f) {
    const Eigen::MatrixXd fm = mesh.facet_matrix(f);
    Eigen::MatrixXd edges(mesh.dim, mesh.dim - 1);
    for (int k = 0; k + 1 < mesh.dim; ++k) edges.col(k) = (fm.row(k + 1) - fm.row(0)).transpose();
    for (const auto& c : v.comp) {
      const Polynomial restricted = c.compose_affine(fm.row(0).transpose(), edges);
      if (!restricted.is_zero(scale))
        throw trace_not_zero_error("verify_h10_korn: field does not vanish on facet " + std::to_string(f));
    }
  }

  const EnergyIntegrals e = energy_integrals(v, mesh);
  const int n = v.dim;
  H10KornReport r;
  r.grad2 = e.grad2;
  r.devsym2 = e.devsym2;
  r.div2 = e.div2;
  r.residual_gaffney = e.grad2 - (e.rot2 + e.div2);
  r.residual_devsym = e.grad2 - (2.0 * e.devsym2 + (2.0 - n) / n * e.div2);
  r.equality_devsym = std::abs(e.grad2 - 2.0 * e.devsym2) <= 1e-12 * (1.0 + e.grad2);
  return r;
}

static Polynomial random_polynomial(int nvars, int degree, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Polynomial p(nvars);
  // iterate exponent tuples with total degree <= degree, deterministic order
  std::function<void(Polynomial::Mono&, int, int)> rec = [&](Polynomial::Mono& m, int var, int remaining) {
    if (var == nvars) {
      p.add_term(m, dist(rng));
      return;
    }
    for (int e = 0; e <= remaining; ++e) {
      m[var] = static_cast<std::uint8_t>(e);
      rec(m, var + 1, remaining - e);
    }
    m[var] = 0;
  };
  Polynomial::Mono m{};
  rec(m, 0, degree);
  return p;
}

PolyVecField random_field(int dim, int degree, std::uint64_t seed) {
  if (degree > kHardDegreeCap) throw std::invalid_argument("random_field: degree above hard cap");
  std::mt19937_64 rng(seed);
  PolyVecField v(dim);
  for (int i = 0; i < dim; ++i) v.comp[i] = random_polynomial(dim, degree, rng);
  return v;
}

PolyVecField bc_field_family(int dim, BcKind bc, std::uint64_t seed, int degree) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("bc_field_family: unit square/cube only");
  if (degree > kHardDegreeCap) throw std::invalid_argument("bc_field_family: degree above hard cap");
  std::mt19937_64 rng(seed);
  PolyVecField v(dim);

  auto bubble = [&](int var) {
    // x_var (1 - x_var)
    const Polynomial x = Polynomial::variable(dim, var);
    return x - x * x;
  };

  if (bc == BcKind::Normal) {
    // v . nu = 0 on x_i in {0,1}: component i vanishes there
    for (int i = 0; i < dim; ++i) {
      const int rest = std::max(0, degree - 2);
      v.comp[i] = bubble(i) * random_polynomial(dim, rest, rng);
    }
  } else {
    // v x nu = 0: component j vanishes on all facets x_i in {0,1}, i != j
    for (int j = 0; j < dim; ++j) {
      Polynomial factor = Polynomial::constant(dim, 1.0);
      int used = 0;
      for (int i = 0; i < dim; ++i)
        if (i != j) {
          factor = factor * bubble(i);
          used += 2;
        }
      const int rest = std::max(0, degree - used);
      v.comp[j] = factor * random_polynomial(dim, rest, rng);
    }
  }
  return v;
}

}  // namespace korngauge::polyfield
