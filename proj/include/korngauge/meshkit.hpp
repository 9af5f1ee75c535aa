#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace korngauge::meshkit {

enum class BoundaryLabel { Free, Normal, Tangential, Dirichlet };

std::string to_string(BoundaryLabel label);
BoundaryLabel label_from_string(const std::string& s);

struct BoundaryFacet {
  std::vector<int> vertices;  // dim vertex indices
  BoundaryLabel label = BoundaryLabel::Free;
};

class mesh_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simplicial mesh of a polygon (dim 2) or polyhedron (dim 3).  Vertices are
/// rows of `vertices`; each cell lists dim+1 vertex indices with positive
/// signed volume.  Boundary facets are exactly the facets incident to one
/// cell.  Normals are always recomputed from geometry, never stored.
struct SimplicialMesh {
  int dim = 0;
  Eigen::MatrixXd vertices;                // n_vertices x dim
  std::vector<std::vector<int>> cells;     // each of size dim+1
  std::vector<BoundaryFacet> boundary;

  // generator provenance, carried through save/load when present
  std::string shape;
  double h = 0.0;

  int n_vertices() const { return static_cast<int>(vertices.rows()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  Eigen::VectorXd vertex(int i) const { return vertices.row(i).transpose(); }

  double cell_volume(int c) const;        // positive for valid meshes
  Eigen::VectorXd cell_centroid(int c) const;
  double facet_area(int f) const;
  Eigen::VectorXd facet_centroid(int f) const;
  /// Unit outward normal of boundary facet f, recomputed from geometry.
  Eigen::VectorXd facet_normal(int f) const;
  /// Index of the unique cell incident to boundary facet f.
  int facet_cell(int f) const;

  /// (d+1) x dim vertex matrix of cell c (rows are vertices).
  Eigen::MatrixXd cell_matrix(int c) const;
  /// d x dim vertex matrix of boundary facet f.
  Eigen::MatrixXd facet_matrix(int f) const;

 private:
  mutable std::vector<int> facet_cell_cache_;
  void build_facet_cells() const;
};

double total_volume(const SimplicialMesh& mesh);
double boundary_area(const SimplicialMesh& mesh);

/// Full validity check: positive volumes, boundary closure (stored boundary
/// facets match the facets incident to exactly one cell), unit outward
/// normals.  Throws mesh_error with a description on the first violation.
void validate(const SimplicialMesh& mesh);

/// Sign sweep of the boundary polygon (2D only).  A mesh with more than one
/// boundary loop is reported non-convex.
bool is_convex_2d(const SimplicialMesh& mesh);

enum class ShapeKind { Square, Cube, LShape, NGon, Annulus, Prism };

struct ShapeSpec {
  ShapeKind kind = ShapeKind::Square;
  int n = 0;  // n-gon / prism base vertex count
};

/// Parses "square", "cube", "lshape", "annulus", "ngon:<n>", "prism:<n>".
ShapeSpec parse_shape(const std::string& text);
std::string shape_name(const ShapeSpec& spec);

/// Deterministic generator meshes:
///   square   unit square [0,1]^2, grid of ceil(1/h)^2 quads split in two
///   cube     unit cube [0,1]^3, Kuhn six-tet subdivision per grid cube
///   lshape   [0,1]^2 minus the open quadrant [1/2,1)^2
///   ngon:n   regular n-gon inscribed in the unit circle, centroid fan;
///            fan triangles uniformly subdivided to reach edge length h
///            (subdivision vertices lie on the chords: the polygon stays
///            exact, but only the n rim vertices are on the circle)
///   annulus  [0,1]^2 minus the open middle ninth (1/3,2/3)^2
///   prism:n  ngon:n extruded to height 1, three tets per prism
/// Boundary facets are labeled Free.  Throws mesh_error on unknown shapes or
/// h too coarse to mesh the shape.
SimplicialMesh generate(const ShapeSpec& shape, double h);

/// Uniform refinement: 4 children per triangle, 8 per tetrahedron
/// (octasection, fixed interior diagonal).  Volume preserved; labels
/// inherited from the parent facet containing each child facet.
SimplicialMesh refine(const SimplicialMesh& mesh);

/// Relabels every boundary facet by a total predicate on its centroid.
SimplicialMesh label_boundary(SimplicialMesh mesh,
                              const std::function<BoundaryLabel(const Eigen::VectorXd&)>& rule);
SimplicialMesh label_all(SimplicialMesh mesh, BoundaryLabel label);

/// Named mixed labelings usable from the CLI: "all-normal", "all-tangential",
/// "all-dirichlet", "west-t-rest-n" (facets left of the domain centroid are
/// tangential, the rest normal), "inner-n-outer-t" (annulus-style split by
/// distance from the bounding-box center).
SimplicialMesh apply_named_labeling(SimplicialMesh mesh, const std::string& name);

class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, int line) : std::runtime_error(what), line_number(line) {}
  int line_number;
};

/// JSON document {dim, vertices, cells, boundary:[{facet,label}]} plus the
/// optional provenance keys {shape, h}.  save followed by load is the
/// identity (coordinates round-trip exactly through decimal form).
void save_json(const SimplicialMesh& mesh, const std::string& path);
SimplicialMesh load_json(const std::string& path);

/// Gmsh MSH 2.2 ASCII subset: element types 1 (line), 2 (triangle),
/// 4 (tetrahedron).  Physical tags of boundary elements are mapped to labels
/// through tag_map; untagged boundary facets stay Free.
SimplicialMesh import_gmsh22(const std::string& path,
                             const std::map<int, BoundaryLabel>& tag_map);

/// FNV-1a over the canonical geometry serialization; stable across runs.
std::uint64_t mesh_hash(const SimplicialMesh& mesh);
std::string mesh_hash_hex(const SimplicialMesh& mesh);

/// How facet normals are presented to the constraint builder.
enum class NormalMode { Facet, ExactCircle };

std::string to_string(NormalMode mode);

}  // namespace korngauge::meshkit
