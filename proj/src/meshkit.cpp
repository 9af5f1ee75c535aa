#include "korngauge/meshkit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>

namespace korngauge::meshkit {

std::string to_string(BoundaryLabel label) {
  switch (label) {
    case BoundaryLabel::Free: return "free";
    case BoundaryLabel::Normal: return "normal";
    case BoundaryLabel::Tangential: return "tangential";
    case BoundaryLabel::Dirichlet: return "dirichlet";
  }
  return "free";
}

BoundaryLabel label_from_string(const std::string& s) {
  if (s == "free") return BoundaryLabel::Free;
  if (s == "normal") return BoundaryLabel::Normal;
  if (s == "tangential") return BoundaryLabel::Tangential;
  if (s == "dirichlet") return BoundaryLabel::Dirichlet;
  throw mesh_error("unknown boundary label '" + s + "'");
}

std::string to_string(NormalMode mode) {
  return mode == NormalMode::Facet ? "facet" : "exact-circle";
}

namespace {

double simplex_signed_volume(const Eigen::MatrixXd& verts) {
  const int d = static_cast<int>(verts.cols());
  Eigen::MatrixXd edges(d, d);
  for (int k = 0; k < d; ++k) edges.col(k) = (verts.row(k + 1) - verts.row(0)).transpose();
  double fact = 1.0;
  for (int k = 2; k <= d; ++k) fact *= k;
  return edges.determinant() / fact;
}

std::vector<int> sorted_key(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

Eigen::MatrixXd SimplicialMesh::cell_matrix(int c) const {
  const auto& cell = cells.at(c);
  Eigen::MatrixXd m(static_cast<int>(cell.size()), dim);
  for (size_t k = 0; k < cell.size(); ++k) m.row(static_cast<int>(k)) = vertices.row(cell[k]);
  return m;
}

Eigen::MatrixXd SimplicialMesh::facet_matrix(int f) const {
  const auto& facet = boundary.at(f).vertices;
  Eigen::MatrixXd m(static_cast<int>(facet.size()), dim);
  for (size_t k = 0; k < facet.size(); ++k) m.row(static_cast<int>(k)) = vertices.row(facet[k]);
  return m;
}

double SimplicialMesh::cell_volume(int c) const { return simplex_signed_volume(cell_matrix(c)); }

Eigen::VectorXd SimplicialMesh::cell_centroid(int c) const {
  return cell_matrix(c).colwise().mean().transpose();
}

double SimplicialMesh::facet_area(int f) const {
  const Eigen::MatrixXd m = facet_matrix(f);
  const int d = static_cast<int>(m.rows()) - 1;
  Eigen::MatrixXd edges(dim, d);
  for (int k = 0; k < d; ++k) edges.col(k) = (m.row(k + 1) - m.row(0)).transpose();
  double fact = 1.0;
  for (int k = 2; k <= d; ++k) fact *= k;
  return std::sqrt((edges.transpose() * edges).determinant()) / fact;
}

Eigen::VectorXd SimplicialMesh::facet_centroid(int f) const {
  return facet_matrix(f).colwise().mean().transpose();
}

void SimplicialMesh::build_facet_cells() const {
  if (!facet_cell_cache_.empty()) return;
  std::map<std::vector<int>, int> owner;
  for (int c = 0; c < n_cells(); ++c) {
    const auto& cell = cells[c];
    for (size_t skip = 0; skip < cell.size(); ++skip) {
      std::vector<int> facet;
      for (size_t k = 0; k < cell.size(); ++k)
        if (k != skip) facet.push_back(cell[k]);
      owner[sorted_key(facet)] = c;  // boundary facets have a unique owner
    }
  }
  facet_cell_cache_.resize(boundary.size());
  for (size_t f = 0; f < boundary.size(); ++f) {
    auto it = owner.find(sorted_key(boundary[f].vertices));
    if (it == owner.end()) throw mesh_error("boundary facet " + std::to_string(f) + " not incident to any cell");
    facet_cell_cache_[f] = it->second;
  }
}

int SimplicialMesh::facet_cell(int f) const {
  build_facet_cells();
  return facet_cell_cache_.at(f);
}

Eigen::VectorXd SimplicialMesh::facet_normal(int f) const {
  const Eigen::MatrixXd m = facet_matrix(f);
  Eigen::VectorXd n(dim);
  if (dim == 2) {
    const Eigen::Vector2d t = (m.row(1) - m.row(0)).transpose();
    n.resize(2);
    n << t.y(), -t.x();
  } else {
    const Eigen::Vector3d a = (m.row(1) - m.row(0)).transpose();
    const Eigen::Vector3d b = (m.row(2) - m.row(0)).transpose();
    n = a.cross(b);
  }
  n.normalize();
  const Eigen::VectorXd outward = facet_centroid(f) - cell_centroid(facet_cell(f));
  if (n.dot(outward) < 0.0) n = -n;
  return n;
}

double total_volume(const SimplicialMesh& mesh) {
  double v = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) v += mesh.cell_volume(c);
  return v;
}

double boundary_area(const SimplicialMesh& mesh) {
  double a = 0.0;
  for (int f = 0; f < static_cast<int>(mesh.boundary.size()); ++f) a += mesh.facet_area(f);
  return a;
}

void validate(const SimplicialMesh& mesh) {
  if (mesh.dim != 2 && mesh.dim != 3) throw mesh_error("mesh dimension must be 2 or 3");
  if (mesh.n_cells() == 0) throw mesh_error("mesh has no cells");

  for (int c = 0; c < mesh.n_cells(); ++c) {
    if (static_cast<int>(mesh.cells[c].size()) != mesh.dim + 1)
      throw mesh_error("cell " + std::to_string(c) + " has wrong vertex count");
    for (int v : mesh.cells[c])
      if (v < 0 || v >= mesh.n_vertices()) throw mesh_error("cell " + std::to_string(c) + " has bad vertex index");
    if (mesh.cell_volume(c) <= 0.0)
      throw mesh_error("cell " + std::to_string(c) + " has non-positive volume");
  }

  // facet incidence counts
  std::map<std::vector<int>, int> incidence;
  for (const auto& cell : mesh.cells)
    for (size_t skip = 0; skip < cell.size(); ++skip) {
      std::vector<int> facet;
      for (size_t k = 0; k < cell.size(); ++k)
        if (k != skip) facet.push_back(cell[k]);
      ++incidence[sorted_key(facet)];
    }

  std::set<std::vector<int>> expected;
  for (const auto& [facet, count] : incidence) {
    if (count > 2) throw mesh_error("facet shared by more than two cells");
    if (count == 1) expected.insert(facet);
  }
  std::set<std::vector<int>> stored;
  for (const auto& bf : mesh.boundary) {
    if (static_cast<int>(bf.vertices.size()) != mesh.dim) throw mesh_error("boundary facet has wrong vertex count");
    if (!stored.insert(sorted_key(bf.vertices)).second) throw mesh_error("duplicate boundary facet");
  }
  if (stored != expected)
    throw mesh_error("stored boundary facets do not match the facets incident to exactly one cell");

  for (int f = 0; f < static_cast<int>(mesh.boundary.size()); ++f) {
    const Eigen::VectorXd n = mesh.facet_normal(f);
    if (std::abs(n.norm() - 1.0) > 1e-12) throw mesh_error("facet normal not unit");
    const Eigen::VectorXd outward = mesh.facet_centroid(f) - mesh.cell_centroid(mesh.facet_cell(f));
    if (n.dot(outward) <= 0.0) throw mesh_error("facet normal not outward");
  }

  // manifold boundary: every facet ridge (vertex in 2D, edge in 3D) belongs
  // to exactly two boundary facets; catches hanging-node constructions
  std::map<std::vector<int>, int> ridge_count;
  for (const auto& bf : mesh.boundary)
    for (size_t skip = 0; skip < bf.vertices.size(); ++skip) {
      std::vector<int> ridge;
      for (size_t k = 0; k < bf.vertices.size(); ++k)
        if (k != skip) ridge.push_back(bf.vertices[k]);
      ++ridge_count[sorted_key(ridge)];
    }
  for (const auto& [ridge, count] : ridge_count)
    if (count != 2) throw mesh_error("non-manifold boundary: a ridge touches " + std::to_string(count) + " facets");
}

bool is_convex_2d(const SimplicialMesh& mesh) {
  if (mesh.dim != 2) throw mesh_error("is_convex_2d: 2D meshes only");

  // walk the boundary edges into loops
  std::map<int, std::vector<int>> next;  // vertex -> neighbours over boundary edges
  for (const auto& bf : mesh.boundary) {
    next[bf.vertices[0]].push_back(bf.vertices[1]);
    next[bf.vertices[1]].push_back(bf.vertices[0]);
  }
  for (const auto& [v, nb] : next)
    if (nb.size() != 2) return false;  // non-manifold boundary

  std::set<int> visited;
  std::vector<std::vector<int>> loops;
  for (const auto& [start, nb] : next) {
    if (visited.count(start)) continue;
    std::vector<int> loop{start};
    visited.insert(start);
    int prev = start, cur = nb[0];
    while (cur != start) {
      loop.push_back(cur);
      visited.insert(cur);
      const auto& cnb = next[cur];
      const int nxt = (cnb[0] == prev) ? cnb[1] : cnb[0];
      prev = cur;
      cur = nxt;
    }
    loops.push_back(std::move(loop));
  }
  if (loops.size() != 1) return false;

  const auto& loop = loops[0];
  const int n = static_cast<int>(loop.size());
  double scale = 0.0;
  std::vector<double> crosses(n);
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector2d a = mesh.vertex(loop[k]).head<2>();
    const Eigen::Vector2d b = mesh.vertex(loop[(k + 1) % n]).head<2>();
    const Eigen::Vector2d c = mesh.vertex(loop[(k + 2) % n]).head<2>();
    const Eigen::Vector2d e1 = b - a, e2 = c - b;
    crosses[k] = e1.x() * e2.y() - e1.y() * e2.x();
    scale = std::max(scale, e1.norm() * e2.norm());
  }
  const double tol = 1e-12 * scale;
  const bool has_pos = std::any_of(crosses.begin(), crosses.end(), [&](double c) { return c > tol; });
  const bool has_neg = std::any_of(crosses.begin(), crosses.end(), [&](double c) { return c < -tol; });
  return !(has_pos && has_neg);
}

ShapeSpec parse_shape(const std::string& text) {
  ShapeSpec s;
  const auto colon = text.find(':');
  const std::string base = text.substr(0, colon);
  if (base == "square") s.kind = ShapeKind::Square;
  else if (base == "cube") s.kind = ShapeKind::Cube;
  else if (base == "lshape") s.kind = ShapeKind::LShape;
  else if (base == "annulus") s.kind = ShapeKind::Annulus;
  else if (base == "ngon") s.kind = ShapeKind::NGon;
  else if (base == "prism") s.kind = ShapeKind::Prism;
  else throw mesh_error("unknown shape '" + text + "'");
  if (s.kind == ShapeKind::NGon || s.kind == ShapeKind::Prism) {
    if (colon == std::string::npos) throw mesh_error("shape '" + base + "' needs a vertex count, e.g. " + base + ":12");
    try {
      s.n = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
      throw mesh_error("bad vertex count in shape '" + text + "'");
    }
    if (s.n < 3) throw mesh_error("n-gon needs n >= 3");
  } else if (colon != std::string::npos) {
    throw mesh_error("shape '" + base + "' takes no parameter");
  }
  return s;
}

std::string shape_name(const ShapeSpec& spec) {
  switch (spec.kind) {
    case ShapeKind::Square: return "square";
    case ShapeKind::Cube: return "cube";
    case ShapeKind::LShape: return "lshape";
    case ShapeKind::Annulus: return "annulus";
    case ShapeKind::NGon: return "ngon:" + std::to_string(spec.n);
    case ShapeKind::Prism: return "prism:" + std::to_string(spec.n);
  }
  return "?";
}

namespace {

int divisions(double h, double extent = 1.0) {
  if (!(h > 0.0)) throw mesh_error("target edge length must be positive");
  return std::max(1, static_cast<int>(std::ceil(extent / h - 1e-9)));
}

// vertex dedup by exact coordinates; generators produce bitwise-identical
// coordinates for shared points by construction
class VertexPool {
 public:
  explicit VertexPool(int dim) : dim_(dim) {}
  int add(const Eigen::VectorXd& x) {
    std::array<double, 3> key{0, 0, 0};
    for (int k = 0; k < dim_; ++k) key[static_cast<size_t>(k)] = x[k];
    auto [it, inserted] = index_.try_emplace(key, static_cast<int>(coords_.size()));
    if (inserted) coords_.push_back(x);
    return it->second;
  }
  Eigen::MatrixXd matrix() const {
    Eigen::MatrixXd m(static_cast<int>(coords_.size()), dim_);
    for (size_t i = 0; i < coords_.size(); ++i) m.row(static_cast<int>(i)) = coords_[i].transpose();
    return m;
  }

 private:
  int dim_;
  std::map<std::array<double, 3>, int> index_;
  std::vector<Eigen::VectorXd> coords_;
};

void finalize_boundary(SimplicialMesh& mesh) {
  // boundary = facets incident to exactly one cell, all labeled Free
  std::map<std::vector<int>, std::pair<int, std::vector<int>>> incidence;  // sorted -> (count, as-seen)
  for (const auto& cell : mesh.cells)
    for (size_t skip = 0; skip < cell.size(); ++skip) {
      std::vector<int> facet;
      for (size_t k = 0; k < cell.size(); ++k)
        if (k != skip) facet.push_back(cell[k]);
      auto key = sorted_key(facet);
      auto it = incidence.find(key);
      if (it == incidence.end()) incidence.emplace(key, std::make_pair(1, facet));
      else ++it->second.first;
    }
  mesh.boundary.clear();
  for (const auto& [key, entry] : incidence)
    if (entry.first == 1) mesh.boundary.push_back(BoundaryFacet{entry.second, BoundaryLabel::Free});
}

void orient_cells(SimplicialMesh& mesh) {
  for (auto& cell : mesh.cells) {
    Eigen::MatrixXd m(static_cast<int>(cell.size()), mesh.dim);
    for (size_t k = 0; k < cell.size(); ++k) m.row(static_cast<int>(k)) = mesh.vertices.row(cell[k]);
    if (simplex_signed_volume(m) < 0.0) std::swap(cell[cell.size() - 1], cell[cell.size() - 2]);
  }
}

// grid of unit quads scaled by 1/m over [0,1]^2 with a quad-keep predicate
SimplicialMesh grid_2d(int m, const std::function<bool(int, int)>& keep) {
  SimplicialMesh mesh;
  mesh.dim = 2;
  VertexPool pool(2);
  auto point = [&](int i, int j) {
    Eigen::Vector2d x(static_cast<double>(i) / m, static_cast<double>(j) / m);
    return pool.add(x);
  };
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      if (!keep(i, j)) continue;
      const int a = point(i, j), b = point(i + 1, j), c = point(i + 1, j + 1), d = point(i, j + 1);
      if ((i + j) % 2 == 0) {
        mesh.cells.push_back({a, b, c});
        mesh.cells.push_back({a, c, d});
      } else {
        mesh.cells.push_back({b, c, d});
        mesh.cells.push_back({b, d, a});
      }
    }
  mesh.vertices = pool.matrix();
  if (mesh.cells.empty()) throw mesh_error("edge length too coarse: no cells generated");
  finalize_boundary(mesh);
  return mesh;
}

// fan triangulation of the regular n-gon inscribed in the unit circle,
// each fan triangle uniformly subdivided s times
void ngon_fan(int n, int s, VertexPool& pool, std::vector<std::vector<int>>& cells) {
  std::vector<Eigen::Vector2d> rim(n);
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n;
    rim[k] = Eigen::Vector2d(std::cos(phi), std::sin(phi));
  }
  const Eigen::Vector2d center(0.0, 0.0);
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector2d a = center, b = rim[k], c = rim[(k + 1) % n];
    auto sub = [&](int i, int j) {
      const Eigen::Vector2d x =
          a + (static_cast<double>(i) / s) * (b - a) + (static_cast<double>(j) / s) * (c - a);
      return pool.add(x);
    };
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s - i; ++j) {
        cells.push_back({sub(i, j), sub(i + 1, j), sub(i, j + 1)});
        if (j < s - i - 1) cells.push_back({sub(i + 1, j), sub(i + 1, j + 1), sub(i, j + 1)});
      }
  }
}

SimplicialMesh make_ngon(int n, double h) {
  if (n < 3) throw mesh_error("n-gon needs n >= 3");
  const int s = divisions(h);  // longest fan edge is the unit radius
  SimplicialMesh mesh;
  mesh.dim = 2;
  VertexPool pool(2);
  ngon_fan(n, s, pool, mesh.cells);
  mesh.vertices = pool.matrix();
  finalize_boundary(mesh);
  return mesh;
}

SimplicialMesh make_cube(double h) {
  const int m = divisions(h);
  SimplicialMesh mesh;
  mesh.dim = 3;
  VertexPool pool(3);
  auto point = [&](int i, int j, int k) {
    Eigen::Vector3d x(static_cast<double>(i) / m, static_cast<double>(j) / m, static_cast<double>(k) / m);
    return pool.add(x);
  };
  // Kuhn subdivision: six tets per cube, one per permutation of the axes;
  // compatible across neighbouring cubes
  static const std::array<std::array<int, 3>, 6> perms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        for (const auto& p : perms) {
          std::array<int, 3> at = {i, j, k};
          std::vector<int> tet;
          tet.push_back(point(at[0], at[1], at[2]));
          for (int step = 0; step < 3; ++step) {
            at[static_cast<size_t>(p[static_cast<size_t>(step)])] += 1;
            tet.push_back(point(at[0], at[1], at[2]));
          }
          mesh.cells.push_back(std::move(tet));
        }
  mesh.vertices = pool.matrix();
  orient_cells(mesh);
  finalize_boundary(mesh);
  return mesh;
}

// Dompierre-style prism split: rotate the smallest global index to the
// bottom-front corner, then pick the 3-tet pattern from the face diagonals
void split_prism(const std::array<int, 6>& prism, std::vector<std::vector<int>>& cells) {
  std::array<int, 6> v = prism;
  auto rotate = [&] { v = {v[1], v[2], v[0], v[4], v[5], v[3]}; };
  auto flip = [&] { v = {v[3], v[5], v[4], v[0], v[2], v[1]}; };

  const int smallest = static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
  if (smallest >= 3) flip();
  while (v[0] != *std::min_element(v.begin(), v.end())) rotate();

  if (std::min(v[1], v[5]) < std::min(v[2], v[4])) {
    cells.push_back({v[0], v[1], v[2], v[5]});
    cells.push_back({v[0], v[1], v[5], v[4]});
    cells.push_back({v[0], v[4], v[5], v[3]});
  } else {
    cells.push_back({v[0], v[1], v[2], v[4]});
    cells.push_back({v[0], v[4], v[2], v[5]});
    cells.push_back({v[0], v[4], v[5], v[3]});
  }
}

SimplicialMesh make_prism(int n, double h) {
  if (n < 3) throw mesh_error("prism base needs n >= 3");
  const int s = divisions(h);
  const int layers = divisions(h);

  // base triangulation in 2D first
  VertexPool base_pool(2);
  std::vector<std::vector<int>> base_cells;
  ngon_fan(n, s, base_pool, base_cells);
  const Eigen::MatrixXd base = base_pool.matrix();

  SimplicialMesh mesh;
  mesh.dim = 3;
  VertexPool pool(3);
  std::vector<std::vector<int>> layer_ids(static_cast<size_t>(layers) + 1);
  for (int l = 0; l <= layers; ++l) {
    const double z = static_cast<double>(l) / layers;
    layer_ids[l].resize(base.rows());
    for (int i = 0; i < base.rows(); ++i) {
      Eigen::Vector3d x(base(i, 0), base(i, 1), z);
      layer_ids[l][static_cast<size_t>(i)] = pool.add(x);
    }
  }
  for (int l = 0; l < layers; ++l)
    for (const auto& tri : base_cells) {
      const std::array<int, 6> prism = {layer_ids[l][static_cast<size_t>(tri[0])],
                                        layer_ids[l][static_cast<size_t>(tri[1])],
                                        layer_ids[l][static_cast<size_t>(tri[2])],
                                        layer_ids[l + 1][static_cast<size_t>(tri[0])],
                                        layer_ids[l + 1][static_cast<size_t>(tri[1])],
                                        layer_ids[l + 1][static_cast<size_t>(tri[2])]};
      split_prism(prism, mesh.cells);
    }
  mesh.vertices = pool.matrix();
  orient_cells(mesh);
  finalize_boundary(mesh);
  return mesh;
}

}  // namespace

SimplicialMesh generate(const ShapeSpec& shape, double h) {
  if (!(h > 0.0)) throw mesh_error("target edge length must be positive");
  SimplicialMesh mesh;
  switch (shape.kind) {
    case ShapeKind::Square:
      mesh = grid_2d(divisions(h), [](int, int) { return true; });
      break;
    case ShapeKind::LShape: {
      const int half = divisions(h, 0.5);  // even division count
      const int m = 2 * half;
      mesh = grid_2d(m, [half](int i, int j) { return i < half || j < half; });
      break;
    }
    case ShapeKind::Annulus: {
      const int third = divisions(h, 1.0 / 3.0);
      const int m = 3 * third;
      mesh = grid_2d(m, [third](int i, int j) {
        const bool in_hole = i >= third && i < 2 * third && j >= third && j < 2 * third;
        return !in_hole;
      });
      break;
    }
    case ShapeKind::Cube:
      mesh = make_cube(h);
      break;
    case ShapeKind::NGon:
      mesh = make_ngon(shape.n, h);
      break;
    case ShapeKind::Prism:
      mesh = make_prism(shape.n, h);
      break;
  }
  mesh.shape = shape_name(shape);
  mesh.h = h;
  return mesh;
}

namespace {

// finds the parent boundary facet whose span contains the point
int containing_facet(const SimplicialMesh& parent, const Eigen::VectorXd& point) {
  for (int f = 0; f < static_cast<int>(parent.boundary.size()); ++f) {
    const Eigen::MatrixXd m = parent.facet_matrix(f);
    const int d = static_cast<int>(m.rows()) - 1;
    Eigen::MatrixXd edges(parent.dim, d);
    for (int k = 0; k < d; ++k) edges.col(k) = (m.row(k + 1) - m.row(0)).transpose();
    const Eigen::VectorXd rhs = point - m.row(0).transpose();
    const Eigen::VectorXd lambda = (edges.transpose() * edges).ldlt().solve(edges.transpose() * rhs);
    const double off_plane = (edges * lambda - rhs).norm();
    if (off_plane > 1e-10) continue;
    double sum = 0.0;
    bool inside = true;
    for (int k = 0; k < d; ++k) {
      if (lambda[k] < -1e-10) inside = false;
      sum += lambda[k];
    }
    if (inside && sum <= 1.0 + 1e-10) return f;
  }
  return -1;
}

}  // namespace

SimplicialMesh refine(const SimplicialMesh& mesh) {
  SimplicialMesh out;
  out.dim = mesh.dim;
  out.shape = mesh.shape;
  out.h = mesh.h / 2.0;

  const int nv = mesh.n_vertices();
  std::map<std::pair<int, int>, int> midpoint;
  std::vector<Eigen::VectorXd> coords;
  coords.reserve(static_cast<size_t>(nv));
  for (int i = 0; i < nv; ++i) coords.push_back(mesh.vertex(i));
  auto mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int id = static_cast<int>(coords.size());
    coords.push_back(0.5 * (mesh.vertex(key.first) + mesh.vertex(key.second)));
    midpoint.emplace(key, id);
    return id;
  };

  for (const auto& cell : mesh.cells) {
    if (mesh.dim == 2) {
      const int v0 = cell[0], v1 = cell[1], v2 = cell[2];
      const int m01 = mid(v0, v1), m12 = mid(v1, v2), m02 = mid(v0, v2);
      out.cells.push_back({v0, m01, m02});
      out.cells.push_back({v1, m12, m01});
      out.cells.push_back({v2, m02, m12});
      out.cells.push_back({m01, m12, m02});
    } else {
      const int v0 = cell[0], v1 = cell[1], v2 = cell[2], v3 = cell[3];
      const int a = mid(v0, v1), b = mid(v0, v2), c = mid(v0, v3);
      const int d = mid(v1, v2), e = mid(v1, v3), f = mid(v2, v3);
      out.cells.push_back({v0, a, b, c});
      out.cells.push_back({v1, d, a, e});
      out.cells.push_back({v2, b, d, f});
      out.cells.push_back({v3, c, e, f});
      // octahedron split along the fixed diagonal b-e
      out.cells.push_back({b, e, a, c});
      out.cells.push_back({b, e, c, f});
      out.cells.push_back({b, e, f, d});
      out.cells.push_back({b, e, d, a});
    }
  }

  out.vertices.resize(static_cast<int>(coords.size()), out.dim);
  for (size_t i = 0; i < coords.size(); ++i) out.vertices.row(static_cast<int>(i)) = coords[i].transpose();
  orient_cells(out);
  finalize_boundary(out);

  for (auto& bf : out.boundary) {
    const Eigen::MatrixXd m = [&] {
      Eigen::MatrixXd mm(static_cast<int>(bf.vertices.size()), out.dim);
      for (size_t k = 0; k < bf.vertices.size(); ++k) mm.row(static_cast<int>(k)) = out.vertices.row(bf.vertices[k]);
      return mm;
    }();
    const Eigen::VectorXd centroid = m.colwise().mean().transpose();
    const int parent = containing_facet(mesh, centroid);
    if (parent < 0) throw mesh_error("refine: child boundary facet has no parent facet");
    bf.label = mesh.boundary[static_cast<size_t>(parent)].label;
  }
  return out;
}

SimplicialMesh label_boundary(SimplicialMesh mesh,
                              const std::function<BoundaryLabel(const Eigen::VectorXd&)>& rule) {
  for (int f = 0; f < static_cast<int>(mesh.boundary.size()); ++f)
    mesh.boundary[static_cast<size_t>(f)].label = rule(mesh.facet_centroid(f));
  return mesh;
}

SimplicialMesh label_all(SimplicialMesh mesh, BoundaryLabel label) {
  for (auto& bf : mesh.boundary) bf.label = label;
  return mesh;
}

SimplicialMesh apply_named_labeling(SimplicialMesh mesh, const std::string& name) {
  if (name == "all-normal") return label_all(std::move(mesh), BoundaryLabel::Normal);
  if (name == "all-tangential") return label_all(std::move(mesh), BoundaryLabel::Tangential);
  if (name == "all-dirichlet") return label_all(std::move(mesh), BoundaryLabel::Dirichlet);
  if (name == "all-free") return label_all(std::move(mesh), BoundaryLabel::Free);

  const Eigen::VectorXd lo = mesh.vertices.colwise().minCoeff().transpose();
  const Eigen::VectorXd hi = mesh.vertices.colwise().maxCoeff().transpose();
  const Eigen::VectorXd center = 0.5 * (lo + hi);

  if (name == "west-t-rest-n") {
    return label_boundary(std::move(mesh), [center](const Eigen::VectorXd& x) {
      return x[0] < center[0] ? BoundaryLabel::Tangential : BoundaryLabel::Normal;
    });
  }
  if (name == "inner-n-outer-t") {
    // split by inf-distance from the bounding-box center
    double max_dist = 0.0;
    std::vector<double> dists;
    for (int f = 0; f < static_cast<int>(mesh.boundary.size()); ++f) {
      const double d = (mesh.facet_centroid(f) - center).lpNorm<Eigen::Infinity>();
      dists.push_back(d);
      max_dist = std::max(max_dist, d);
    }
    for (size_t f = 0; f < mesh.boundary.size(); ++f)
      mesh.boundary[f].label = dists[f] < 0.5 * max_dist ? BoundaryLabel::Normal : BoundaryLabel::Tangential;
    return mesh;
  }
  throw mesh_error("unknown labeling '" + name + "'");
}

}  // namespace korngauge::meshkit
