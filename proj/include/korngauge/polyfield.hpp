#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace korngauge::meshkit {
struct SimplicialMesh;
}

namespace korngauge::polyfield {

inline constexpr int kMaxVars = 4;
inline constexpr int kHardDegreeCap = 8;   // cap on stored *field* degree
inline constexpr int kDefaultDegree = 4;

/// Multivariate polynomial with real coefficients in dense-exponent sparse
/// storage: a map from exponent tuples to coefficients.  Exact under
/// addition, multiplication, differentiation and affine substitution.
/// Intermediate integrands may exceed the field degree cap; only the cap on
/// declared field degrees (kHardDegreeCap) is enforced by callers.
class Polynomial {
 public:
  using Mono = std::array<std::uint8_t, kMaxVars>;

  Polynomial() = default;
  explicit Polynomial(int nvars);
  static Polynomial constant(int nvars, double c);
  /// The coordinate monomial x_var.
  static Polynomial variable(int nvars, int var);

  int nvars() const { return nvars_; }
  int degree() const;  // total degree, -1 for the zero polynomial
  bool is_zero(double tol = 0.0) const;
  double max_abs_coeff() const;

  void add_term(const Mono& m, double c);
  double coeff(const Mono& m) const;
  const std::map<Mono, double>& terms() const { return terms_; }

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;
  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& o);

  Polynomial derivative(int var) const;
  double eval(const Eigen::VectorXd& x) const;

  /// Substitutes x = offset + map * y, returning a polynomial in
  /// map.cols() variables.  Exact: expands powers of the affine forms.
  Polynomial compose_affine(const Eigen::VectorXd& offset, const Eigen::MatrixXd& map) const;

 private:
  int nvars_ = 0;
  std::map<Mono, double> terms_;  // ordered: deterministic iteration
  void prune();
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

/// Exact integral of p over the simplex spanned by the rows of `vertices`
/// ((d+1) x n, d <= n): barycentric substitution followed by the monomial
/// formula  int_simplex l^a dl = (prod a_i!) / (|a| + d)!  scaled by the
/// d-volume factor sqrt(det(E^T E)).  Throws on degenerate simplices.
double integrate_simplex(const Polynomial& p, const Eigen::MatrixXd& vertices);

/// Sum of integrate_simplex over all cells, in cell order.
double integrate_over_mesh(const Polynomial& p, const meshkit::SimplicialMesh& mesh);

/// Polynomial vector field: N components in N variables.
struct PolyVecField {
  int dim = 0;
  std::vector<Polynomial> comp;

  PolyVecField() = default;
  explicit PolyVecField(int n);
  int degree() const;
  /// Gradient matrix entry (i,j) = d_i v_j.
  Polynomial grad_entry(int i, int j) const { return comp[j].derivative(i); }
  Polynomial divergence() const;
  /// Rotation components (i,j) = d_i v_j - d_j v_i, lexicographic i < j.
  std::vector<Polynomial> rot() const;
  Eigen::VectorXd eval(const Eigen::VectorXd& x) const;
};

/// Trace data of v on one (flat) boundary facet: the constant unit outward
/// normal, the normal component v_n = nu . v and the tangential part
/// v_t = v - v_n nu, kept as ambient-coordinate polynomials.  On the facet
/// v = v_t + v_n nu and v_t . nu = 0 hold identically.
struct FacetTrace {
  int facet_index = -1;
  Eigen::VectorXd normal;
  Polynomial vn;
  PolyVecField vt;
};

FacetTrace facet_trace(const PolyVecField& v, const meshkit::SimplicialMesh& mesh, int facet_index);

struct EnergyIntegrals {
  double grad2 = 0, sym2 = 0, devsym2 = 0, div2 = 0, rot2 = 0, cross = 0;
};

/// Exact L2(Omega) energies of a polynomial field.  Satisfies
/// grad2 = devsym2 + div2/N + rot2/2 and grad2 = rot2 + cross to rounding.
EnergyIntegrals energy_integrals(const PolyVecField& v, const meshkit::SimplicialMesh& mesh);

/// Boundary integral I_b = int_Gamma (v_n div_G v_t - v_t . grad_G v_n),
/// facet by facet with grad_G u = (I - nu nu^T) grad u.
double surface_term_Ib(const PolyVecField& v, const meshkit::SimplicialMesh& mesh);

/// Residuals of the two integration-by-parts identities on a polyhedral
/// mesh (curvature term absent on flat facets):
///   grad2 - I_b = 2 sym2 - div2     and     grad2 + I_b = rot2 + div2.
struct GrisvardReport {
  double residual_sym_side = 0;
  double residual_rot_side = 0;
  double grad2 = 0;
  double ib = 0;
  bool within(double tol) const;
};

GrisvardReport verify_grisvard(const PolyVecField& v, const meshkit::SimplicialMesh& mesh);

/// Checks the zero-trace (H1_0) identities grad2 = rot2 + div2 and
/// grad2 = 2 devsym2 + (2-N)/N div2 for a field vanishing on the whole
/// boundary.  Throws trace_not_zero_error if some facet restriction of v
/// is not identically zero.
struct H10KornReport {
  double residual_gaffney = 0;
  double residual_devsym = 0;
  double grad2 = 0;
  double devsym2 = 0;
  double div2 = 0;
  bool equality_devsym;  // grad2 == 2*devsym2 within rounding (N=2 or div-free)
};

class trace_not_zero_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

H10KornReport verify_h10_korn(const PolyVecField& v, const meshkit::SimplicialMesh& mesh);

/// Random polynomial field on the axis-aligned unit square/cube satisfying
/// the requested condition identically on every facet:
///   normal:      v . nu = 0   (component i carries the factor x_i(1-x_i))
///   tangential:  v x nu = 0   (component j vanishes on all facets x_i in
///                              {0,1}, i != j)
/// Deterministic for a fixed seed.
enum class BcKind { Normal, Tangential };
PolyVecField bc_field_family(int dim, BcKind bc, std::uint64_t seed, int degree = kDefaultDegree);

/// Uniform random field with all component degrees <= degree.
PolyVecField random_field(int dim, int degree, std::uint64_t seed);

}  // namespace korngauge::polyfield
