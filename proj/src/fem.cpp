#include "korngauge/fem.hpp"

#include "korngauge/tensorcalc.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

namespace korngauge::fem {

std::string to_string(FormKind kind) {
  switch (kind) {
    case FormKind::GradGrad: return "gradgrad";
    case FormKind::SymSym: return "symsym";
    case FormKind::DevSymDevSym: return "devsymdevsym";
    case FormKind::DivDiv: return "divdiv";
    case FormKind::RotRot: return "rotrot";
    case FormKind::Mass: return "mass";
  }
  return "?";
}

namespace {

// Polynomials in the d+1 barycentric coordinates; all element integrands are
// expanded here and integrated with the exact monomial formula
//   int_T l^a dx = |T| d! (prod a_i!) / (|a| + d)!.
struct BaryPoly {
  std::map<std::array<int, 4>, double> terms;

  static BaryPoly var(int k) {
    BaryPoly p;
    std::array<int, 4> m{};
    m[static_cast<size_t>(k)] = 1;
    p.terms[m] = 1.0;
    return p;
  }
  BaryPoly operator*(const BaryPoly& o) const {
    BaryPoly r;
    for (const auto& [ma, ca] : terms)
      for (const auto& [mb, cb] : o.terms) {
        std::array<int, 4> m{};
        for (int v = 0; v < 4; ++v) m[static_cast<size_t>(v)] = ma[static_cast<size_t>(v)] + mb[static_cast<size_t>(v)];
        r.terms[m] += ca * cb;
      }
    return r;
  }
  BaryPoly operator*(double s) const {
    BaryPoly r = *this;
    for (auto& [m, c] : r.terms) c *= s;
    return r;
  }
  BaryPoly operator+(const BaryPoly& o) const {
    BaryPoly r = *this;
    for (const auto& [m, c] : o.terms) r.terms[m] += c;
    return r;
  }
  BaryPoly operator-(const BaryPoly& o) const { return *this + o * -1.0; }
  BaryPoly dlambda(int k) const {
    BaryPoly r;
    for (const auto& [m, c] : terms) {
      if (m[static_cast<size_t>(k)] == 0) continue;
      auto dm = m;
      dm[static_cast<size_t>(k)] -= 1;
      r.terms[dm] += c * m[static_cast<size_t>(k)];
    }
    return r;
  }
  // integral over the cell divided by |T|
  double integral_const(int d) const {
    auto fact = [](int n) {
      double f = 1.0;
      for (int i = 2; i <= n; ++i) f *= i;
      return f;
    };
    double s = 0.0;
    for (const auto& [m, c] : terms) {
      double num = fact(d);
      int total = 0;
      for (int v = 0; v <= d; ++v) {
        num *= fact(m[static_cast<size_t>(v)]);
        total += m[static_cast<size_t>(v)];
      }
      s += c * num / fact(total + d);
    }
    return s;
  }
};

std::vector<std::pair<int, int>> local_edges(int d) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i <= d; ++i)
    for (int j = i + 1; j <= d; ++j) e.emplace_back(i, j);
  return e;
}

std::vector<BaryPoly> shape_functions(int d, int order) {
  std::vector<BaryPoly> phi;
  for (int k = 0; k <= d; ++k) {
    const BaryPoly l = BaryPoly::var(k);
    phi.push_back(order == 1 ? l : l * l * 2.0 - l);
  }
  if (order == 2)
    for (const auto& [i, j] : local_edges(d)) phi.push_back(BaryPoly::var(i) * BaryPoly::var(j) * 4.0);
  return phi;
}

// dimensionless element tables, immutable after first use
struct ShapeTables {
  int nsh = 0;
  // e[a][b](k,m) = int (d phi_a / d l_k)(d phi_b / d l_m) / |T|
  std::vector<std::vector<Eigen::MatrixXd>> e;
  Eigen::MatrixXd mass;                   // int phi_a phi_b / |T|
  std::vector<Eigen::VectorXd> dmoment;   // dmoment[a][k] = int (d phi_a / d l_k) / |T|
};

const ShapeTables& tables(int d, int order) {
  static const std::map<std::pair<int, int>, ShapeTables> all = [] {
    std::map<std::pair<int, int>, ShapeTables> m;
    for (int dd : {2, 3})
      for (int oo : {1, 2}) {
        ShapeTables t;
        const auto phi = shape_functions(dd, oo);
        t.nsh = static_cast<int>(phi.size());
        std::vector<std::vector<BaryPoly>> dphi(static_cast<size_t>(t.nsh));
        for (int a = 0; a < t.nsh; ++a)
          for (int k = 0; k <= dd; ++k) dphi[static_cast<size_t>(a)].push_back(phi[static_cast<size_t>(a)].dlambda(k));

        t.e.assign(static_cast<size_t>(t.nsh), std::vector<Eigen::MatrixXd>(static_cast<size_t>(t.nsh)));
        t.mass.resize(t.nsh, t.nsh);
        for (int a = 0; a < t.nsh; ++a)
          for (int b = 0; b < t.nsh; ++b) {
            Eigen::MatrixXd ekm(dd + 1, dd + 1);
            for (int k = 0; k <= dd; ++k)
              for (int mm = 0; mm <= dd; ++mm)
                ekm(k, mm) = (dphi[static_cast<size_t>(a)][static_cast<size_t>(k)] *
                              dphi[static_cast<size_t>(b)][static_cast<size_t>(mm)])
                                 .integral_const(dd);
            t.e[static_cast<size_t>(a)][static_cast<size_t>(b)] = std::move(ekm);
            t.mass(a, b) = (phi[static_cast<size_t>(a)] * phi[static_cast<size_t>(b)]).integral_const(dd);
          }
        for (int a = 0; a < t.nsh; ++a) {
          Eigen::VectorXd mom(dd + 1);
          for (int k = 0; k <= dd; ++k) mom[k] = dphi[static_cast<size_t>(a)][static_cast<size_t>(k)].integral_const(dd);
          t.dmoment.push_back(std::move(mom));
        }
        m.emplace(std::make_pair(dd, oo), std::move(t));
      }
    return m;
  }();
  return all.at({d, order});
}

// gradients of the barycentric coordinates, row k = grad lambda_k
struct CellGeometry {
  Eigen::MatrixXd grad_lambda;  // (d+1) x d
  double volume = 0.0;
};

CellGeometry cell_geometry(const meshkit::SimplicialMesh& mesh, int c) {
  const int d = mesh.dim;
  const Eigen::MatrixXd verts = mesh.cell_matrix(c);
  Eigen::MatrixXd edges(d, d);
  for (int k = 0; k < d; ++k) edges.col(k) = (verts.row(k + 1) - verts.row(0)).transpose();
  const double det = edges.determinant();
  if (!(det > 0.0)) throw numerical_error("cell " + std::to_string(c) + " is degenerate or inverted");

  CellGeometry g;
  double fact = 1.0;
  for (int k = 2; k <= d; ++k) fact *= k;
  g.volume = det / fact;
  const Eigen::MatrixXd inv = edges.inverse();
  g.grad_lambda.resize(d + 1, d);
  for (int k = 1; k <= d; ++k) g.grad_lambda.row(k) = inv.row(k - 1);
  g.grad_lambda.row(0) = -g.grad_lambda.bottomRows(d).colwise().sum();
  return g;
}

}  // namespace

FeSpace::FeSpace(const meshkit::SimplicialMesh& mesh, int order) : mesh_(&mesh), order_(order) {
  if (order != 1 && order != 2) throw std::invalid_argument("FeSpace: order must be 1 or 2");

  for (int i = 0; i < mesh.n_vertices(); ++i) node_coords_.push_back(mesh.vertex(i));

  if (order == 2) {
    std::map<std::pair<int, int>, int> edges;
    for (const auto& cell : mesh.cells)
      for (size_t i = 0; i < cell.size(); ++i)
        for (size_t j = i + 1; j < cell.size(); ++j) edges.emplace(std::minmax(cell[i], cell[j]), 0);
    int next = mesh.n_vertices();
    for (auto& [edge, node] : edges) {
      node = next++;
      node_coords_.push_back(0.5 * (mesh.vertex(edge.first) + mesh.vertex(edge.second)));
    }
    edge_node_ = std::move(edges);
  }

  cell_nodes_.reserve(static_cast<size_t>(mesh.n_cells()));
  for (const auto& cell : mesh.cells) {
    std::vector<int> nodes(cell.begin(), cell.end());
    if (order == 2)
      for (const auto& [i, j] : local_edges(mesh.dim))
        nodes.push_back(edge_node_.at(std::minmax(cell[static_cast<size_t>(i)], cell[static_cast<size_t>(j)])));
    cell_nodes_.push_back(std::move(nodes));
  }
}

std::vector<int> FeSpace::facet_nodes(int f) const {
  const auto& facet = mesh_->boundary.at(static_cast<size_t>(f)).vertices;
  std::vector<int> nodes(facet.begin(), facet.end());
  if (order_ == 2)
    for (size_t i = 0; i < facet.size(); ++i)
      for (size_t j = i + 1; j < facet.size(); ++j)
        nodes.push_back(edge_node_.at(std::minmax(facet[i], facet[j])));
  return nodes;
}

Eigen::VectorXd FeSpace::interpolate(const polyfield::PolyVecField& v) const {
  if (v.dim != dim()) throw std::invalid_argument("interpolate: dimension mismatch");
  Eigen::VectorXd u(n_dof());
  for (int node = 0; node < n_nodes(); ++node) {
    const Eigen::VectorXd val = v.eval(node_coord(node));
    for (int c = 0; c < dim(); ++c) u[dof(node, c)] = val[c];
  }
  return u;
}

Eigen::VectorXd FeSpace::interpolate(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& v) const {
  Eigen::VectorXd u(n_dof());
  for (int node = 0; node < n_nodes(); ++node) {
    const Eigen::VectorXd val = v(node_coord(node));
    for (int c = 0; c < dim(); ++c) u[dof(node, c)] = val[c];
  }
  return u;
}

SpMat assemble(const FeSpace& space, FormKind kind) {
  const auto& mesh = space.mesh();
  const int d = mesh.dim;
  const auto& tab = tables(d, space.order());
  const int nsh = tab.nsh;

  // deterministic ordered accumulation keeps the matrix bitwise symmetric
  // and runs reproducible
  std::map<std::pair<int, int>, double> acc;

  std::vector<std::vector<Eigen::MatrixXd>> el(static_cast<size_t>(nsh),
                                               std::vector<Eigen::MatrixXd>(static_cast<size_t>(nsh)));
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellGeometry geo = cell_geometry(mesh, c);
    const auto& nodes = space.cell_nodes(c);

    if (kind == FormKind::Mass) {
      for (int a = 0; a < nsh; ++a)
        for (int b = 0; b < nsh; ++b) {
          const double m = geo.volume * tab.mass(std::min(a, b), std::max(a, b));
          for (int comp = 0; comp < d; ++comp)
            acc[{space.dof(nodes[static_cast<size_t>(a)], comp), space.dof(nodes[static_cast<size_t>(b)], comp)}] += m;
        }
      continue;
    }

    // el[a][b](i,j) = int_T (d_i phi_a)(d_j phi_b); mirrored by transpose so
    // the element tensor is bitwise symmetric
    for (int a = 0; a < nsh; ++a)
      for (int b = a; b < nsh; ++b) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
        const Eigen::MatrixXd& ekm = tab.e[static_cast<size_t>(a)][static_cast<size_t>(b)];
        for (int k = 0; k <= d; ++k)
          for (int mm = 0; mm <= d; ++mm) {
            const double w = ekm(k, mm) * geo.volume;
            if (w == 0.0) continue;
            m += w * (geo.grad_lambda.row(k).transpose() * geo.grad_lambda.row(mm));
          }
        el[static_cast<size_t>(a)][static_cast<size_t>(b)] = m;
        if (b != a) el[static_cast<size_t>(b)][static_cast<size_t>(a)] = m.transpose();
      }

    for (int a = 0; a < nsh; ++a)
      for (int b = 0; b < nsh; ++b) {
        const Eigen::MatrixXd& e = el[static_cast<size_t>(a)][static_cast<size_t>(b)];
        const double tr = e.trace();
        for (int ci = 0; ci < d; ++ci)
          for (int dj = 0; dj < d; ++dj) {
            double val = 0.0;
            switch (kind) {
              case FormKind::GradGrad:
                val = (ci == dj) ? tr : 0.0;
                break;
              case FormKind::DivDiv:
                val = e(ci, dj);
                break;
              case FormKind::SymSym:
                val = 0.5 * ((ci == dj ? tr : 0.0) + e(dj, ci));
                break;
              case FormKind::RotRot:
                val = (ci == dj ? tr : 0.0) - e(dj, ci);
                break;
              case FormKind::DevSymDevSym:
                val = 0.5 * ((ci == dj ? tr : 0.0) + e(dj, ci)) - e(ci, dj) / d;
                break;
              case FormKind::Mass:
                break;
            }
            if (val != 0.0)
              acc[{space.dof(nodes[static_cast<size_t>(a)], ci), space.dof(nodes[static_cast<size_t>(b)], dj)}] += val;
          }
      }
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(acc.size());
  for (const auto& [key, val] : acc) trips.emplace_back(key.first, key.second, val);
  SpMat m(space.n_dof(), space.n_dof());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

Eigen::VectorXd assemble_rot_moment(const FeSpace& space, const Eigen::VectorXd& sigma) {
  const auto& mesh = space.mesh();
  const int d = mesh.dim;
  if (sigma.size() != tensorcalc::rot_dim(d)) throw std::invalid_argument("assemble_rot_moment: sigma length");
  const auto& tab = tables(d, space.order());

  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.n_dof());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellGeometry geo = cell_geometry(mesh, c);
    const auto& nodes = space.cell_nodes(c);
    for (int a = 0; a < tab.nsh; ++a) {
      // dphi[i] = int_T d_i phi_a
      const Eigen::VectorXd dphi = geo.volume * (geo.grad_lambda.transpose() * tab.dmoment[static_cast<size_t>(a)]);
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
          const double s = sigma[tensorcalc::rot_index(i, j, d)];
          if (s == 0.0) continue;
          // sigma_(ij) (d_i phi_a e_j - d_j phi_a e_i)
          b[space.dof(nodes[static_cast<size_t>(a)], j)] += s * dphi[i];
          b[space.dof(nodes[static_cast<size_t>(a)], i)] -= s * dphi[j];
        }
    }
  }
  return b;
}

bool ConstraintNullBasis::admits(const Eigen::VectorXd& u, double tol) const {
  const Eigen::VectorXd residual = u - z * (z.transpose() * u);
  return residual.norm() <= tol * std::max(1.0, u.norm());
}

ConstraintNullBasis build_constraints(const FeSpace& space, meshkit::NormalMode mode) {
  const auto& mesh = space.mesh();
  const int d = mesh.dim;
  if (mode == meshkit::NormalMode::ExactCircle && d != 2)
    throw std::invalid_argument("exact-circle normals are a 2D study mode");

  // gather constraint rows per node, facets in index order
  std::vector<std::vector<Eigen::RowVectorXd>> rows(static_cast<size_t>(space.n_nodes()));
  for (int f = 0; f < static_cast<int>(mesh.boundary.size()); ++f) {
    const auto label = mesh.boundary[static_cast<size_t>(f)].label;
    if (label == meshkit::BoundaryLabel::Free) continue;
    const Eigen::VectorXd facet_nu = mesh.facet_normal(f);

    for (int node : space.facet_nodes(f)) {
      Eigen::VectorXd nu = facet_nu;
      if (mode == meshkit::NormalMode::ExactCircle && label != meshkit::BoundaryLabel::Dirichlet) {
        const Eigen::VectorXd x = space.node_coord(node);
        if (std::abs(x.norm() - 1.0) > 1e-9)
          throw geometry_mismatch_error("exact-circle mode: boundary node " + std::to_string(node) +
                                        " is not on the unit circle");
        nu = x / x.norm();
      }
      auto& node_rows = rows[static_cast<size_t>(node)];
      switch (label) {
        case meshkit::BoundaryLabel::Normal:
          node_rows.push_back(nu.transpose());
          break;
        case meshkit::BoundaryLabel::Tangential: {
          const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(d, d) - nu * nu.transpose();
          for (int r = 0; r < d; ++r) node_rows.push_back(proj.row(r));
          break;
        }
        case meshkit::BoundaryLabel::Dirichlet:
          for (int r = 0; r < d; ++r) node_rows.push_back(Eigen::RowVectorXd::Unit(d, r));
          break;
        case meshkit::BoundaryLabel::Free:
          break;
      }
    }
  }

  ConstraintNullBasis basis;
  basis.node_free_dims.resize(static_cast<size_t>(space.n_nodes()), d);
  std::vector<Eigen::Triplet<double>> trips;
  int col = 0;
  for (int node = 0; node < space.n_nodes(); ++node) {
    const auto& node_rows = rows[static_cast<size_t>(node)];
    if (node_rows.empty()) {
      for (int c = 0; c < d; ++c) trips.emplace_back(space.dof(node, c), col + c, 1.0);
      col += d;
      continue;
    }
    Eigen::MatrixXd cmat(static_cast<int>(node_rows.size()), d);
    for (size_t r = 0; r < node_rows.size(); ++r) cmat.row(static_cast<int>(r)) = node_rows[r];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cmat, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int k = 0; k < sv.size(); ++k)
      if (sv[k] > 1e-9 * sv[0]) ++rank;
    const int free_dims = d - rank;
    basis.node_free_dims[static_cast<size_t>(node)] = free_dims;
    const Eigen::MatrixXd v = svd.matrixV();
    for (int k = 0; k < free_dims; ++k)
      for (int c = 0; c < d; ++c) trips.emplace_back(space.dof(node, c), col + k, v(c, rank + k));
    col += free_dims;
  }
  basis.n_red = col;
  basis.z.resize(space.n_dof(), col);
  basis.z.setFromTriplets(trips.begin(), trips.end());
  return basis;
}

SpMat reduce(const SpMat& m, const ConstraintNullBasis& basis) {
  if (m.rows() != basis.z.rows()) throw std::invalid_argument("reduce: dimension mismatch");
  SpMat r = basis.z.transpose() * m * basis.z;
  SpMat rt = SpMat(r.transpose());
  SpMat sym = 0.5 * (r + rt);
  sym.prune(0.0);
  return sym;
}

Eigen::MatrixXd to_dense(const SpMat& m) { return Eigen::MatrixXd(m); }

RigidMotionBasis rigid_motion_basis(const FeSpace& space) {
  const int d = space.dim();
  RigidMotionBasis basis;
  const char* axes = "xyz";
  for (int c = 0; c < d; ++c) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(space.n_dof());
    for (int node = 0; node < space.n_nodes(); ++node) u[space.dof(node, c)] = 1.0;
    basis.fields.push_back(std::move(u));
    basis.names.push_back(std::string("translation-") + axes[c]);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Eigen::VectorXd sigma = Eigen::VectorXd::Zero(tensorcalc::rot_dim(d));
      sigma[tensorcalc::rot_index(i, j, d)] = 1.0;
      const Eigen::MatrixXd gen = tensorcalc::rot_generator(sigma);
      Eigen::VectorXd u(space.n_dof());
      for (int node = 0; node < space.n_nodes(); ++node) {
        const Eigen::VectorXd val = gen * space.node_coord(node);
        for (int c = 0; c < d; ++c) u[space.dof(node, c)] = val[c];
      }
      basis.fields.push_back(std::move(u));
      basis.names.push_back(std::string("rotation-") + axes[i] + axes[j]);
    }
  return basis;
}

std::vector<int> rigid_motions_in_constrained_space(const RigidMotionBasis& basis,
                                                    const ConstraintNullBasis& constraints,
                                                    double tol) {
  std::vector<int> admitted;
  for (size_t k = 0; k < basis.fields.size(); ++k)
    if (constraints.admits(basis.fields[k], tol)) admitted.push_back(static_cast<int>(k));
  return admitted;
}

}  // namespace korngauge::fem
