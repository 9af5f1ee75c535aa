#include "korngauge/meshkit.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace korngauge::meshkit {

using nlohmann::json;

void save_json(const SimplicialMesh& mesh, const std::string& path) {
  json doc;
  doc["dim"] = mesh.dim;
  json verts = json::array();
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    json row = json::array();
    for (int k = 0; k < mesh.dim; ++k) row.push_back(mesh.vertices(i, k));
    verts.push_back(std::move(row));
  }
  doc["vertices"] = std::move(verts);
  doc["cells"] = mesh.cells;
  json boundary = json::array();
  for (const auto& bf : mesh.boundary)
    boundary.push_back(json{{"facet", bf.vertices}, {"label", to_string(bf.label)}});
  doc["boundary"] = std::move(boundary);
  if (!mesh.shape.empty()) {
    doc["shape"] = mesh.shape;
    doc["h"] = mesh.h;
  }

  std::ofstream out(path);
  if (!out) throw mesh_error("cannot open '" + path + "' for writing");
  out << doc.dump(1) << "\n";
}

SimplicialMesh load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mesh_error("cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw parse_error(std::string("mesh JSON: ") + e.what(), -1);
  }

  SimplicialMesh mesh;
  try {
    mesh.dim = doc.at("dim").get<int>();
    const auto& verts = doc.at("vertices");
    mesh.vertices.resize(static_cast<int>(verts.size()), mesh.dim);
    for (size_t i = 0; i < verts.size(); ++i)
      for (int k = 0; k < mesh.dim; ++k) mesh.vertices(static_cast<int>(i), k) = verts[i].at(k).get<double>();
    mesh.cells = doc.at("cells").get<std::vector<std::vector<int>>>();
    for (const auto& bf : doc.at("boundary")) {
      BoundaryFacet facet;
      facet.vertices = bf.at("facet").get<std::vector<int>>();
      facet.label = label_from_string(bf.at("label").get<std::string>());
      mesh.boundary.push_back(std::move(facet));
    }
    if (doc.contains("shape")) mesh.shape = doc["shape"].get<std::string>();
    if (doc.contains("h")) mesh.h = doc["h"].get<double>();
  } catch (const json::exception& e) {
    throw parse_error(std::string("mesh JSON schema: ") + e.what(), -1);
  }
  validate(mesh);
  return mesh;
}

namespace {

struct GmshReader {
  std::istringstream stream;
  int line_number = 0;

  explicit GmshReader(const std::string& text) : stream(text) {}

  std::string next_line() {
    std::string line;
    if (!std::getline(stream, line)) throw parse_error("unexpected end of file", line_number);
    ++line_number;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    return line;
  }
};

}  // namespace

SimplicialMesh import_gmsh22(const std::string& path, const std::map<int, BoundaryLabel>& tag_map) {
  std::ifstream in(path);
  if (!in) throw mesh_error("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  GmshReader reader(buffer.str());

  if (reader.next_line() != "$MeshFormat") throw parse_error("expected $MeshFormat", reader.line_number);
  {
    const std::string fmt = reader.next_line();
    std::istringstream fs(fmt);
    double version = 0.0;
    int file_type = -1, data_size = 0;
    fs >> version >> file_type >> data_size;
    if (!fs || version < 2.0 || version >= 3.0 || file_type != 0)
      throw parse_error("unsupported mesh format '" + fmt + "' (need MSH 2.2 ASCII)", reader.line_number);
  }
  if (reader.next_line() != "$EndMeshFormat") throw parse_error("expected $EndMeshFormat", reader.line_number);

  // skip optional sections until $Nodes
  std::string line = reader.next_line();
  while (line != "$Nodes") {
    if (line == "$PhysicalNames") {
      while (reader.next_line() != "$EndPhysicalNames") {}
    }
    line = reader.next_line();
  }

  int n_nodes = 0;
  {
    std::istringstream ns(reader.next_line());
    ns >> n_nodes;
    if (!ns || n_nodes <= 0) throw parse_error("bad node count", reader.line_number);
  }
  std::map<int, Eigen::Vector3d> nodes;
  for (int i = 0; i < n_nodes; ++i) {
    std::istringstream ls(reader.next_line());
    int id = 0;
    double x = 0, y = 0, z = 0;
    ls >> id >> x >> y >> z;
    if (!ls) throw parse_error("bad node line", reader.line_number);
    nodes[id] = Eigen::Vector3d(x, y, z);
  }
  if (reader.next_line() != "$EndNodes") throw parse_error("expected $EndNodes", reader.line_number);
  if (reader.next_line() != "$Elements") throw parse_error("expected $Elements", reader.line_number);

  int n_elems = 0;
  {
    std::istringstream es(reader.next_line());
    es >> n_elems;
    if (!es || n_elems < 0) throw parse_error("bad element count", reader.line_number);
  }

  struct Elem {
    int type;
    int physical;
    std::vector<int> nodes;
  };
  std::vector<Elem> elems;
  for (int i = 0; i < n_elems; ++i) {
    std::istringstream ls(reader.next_line());
    int id = 0, type = 0, n_tags = 0;
    ls >> id >> type >> n_tags;
    if (!ls) throw parse_error("bad element line", reader.line_number);
    std::vector<int> tags(static_cast<size_t>(n_tags));
    for (int t = 0; t < n_tags; ++t) ls >> tags[static_cast<size_t>(t)];
    int n_elem_nodes = 0;
    switch (type) {
      case 1: n_elem_nodes = 2; break;   // line
      case 2: n_elem_nodes = 3; break;   // triangle
      case 4: n_elem_nodes = 4; break;   // tetrahedron
      case 15: n_elem_nodes = 1; break;  // point, ignored
      default:
        throw parse_error("unsupported element type " + std::to_string(type), reader.line_number);
    }
    Elem e;
    e.type = type;
    e.physical = n_tags > 0 ? tags[0] : 0;
    e.nodes.resize(static_cast<size_t>(n_elem_nodes));
    for (int k = 0; k < n_elem_nodes; ++k) ls >> e.nodes[static_cast<size_t>(k)];
    if (!ls) throw parse_error("bad element node list", reader.line_number);
    elems.push_back(std::move(e));
  }
  if (reader.next_line() != "$EndElements") throw parse_error("expected $EndElements", reader.line_number);

  const bool has_tets = std::any_of(elems.begin(), elems.end(), [](const Elem& e) { return e.type == 4; });
  const int dim = has_tets ? 3 : 2;
  const int cell_type = has_tets ? 4 : 2;
  const int facet_type = has_tets ? 2 : 1;

  // compact node numbering over used nodes only
  std::map<int, int> renumber;
  for (const auto& e : elems)
    if (e.type == cell_type || e.type == facet_type)
      for (int n : e.nodes) {
        if (!nodes.count(n)) throw parse_error("element references unknown node " + std::to_string(n), -1);
        renumber.emplace(n, 0);
      }
  int next_id = 0;
  for (auto& [gmsh_id, local] : renumber) local = next_id++;

  SimplicialMesh mesh;
  mesh.dim = dim;
  mesh.vertices.resize(next_id, dim);
  for (const auto& [gmsh_id, local] : renumber)
    for (int k = 0; k < dim; ++k) mesh.vertices(local, k) = nodes[gmsh_id][k];

  for (const auto& e : elems) {
    if (e.type != cell_type) continue;
    std::vector<int> cell;
    for (int n : e.nodes) cell.push_back(renumber[n]);
    mesh.cells.push_back(std::move(cell));
  }
  if (mesh.cells.empty()) throw parse_error("no cells of the expected type found", -1);

  // fix orientation, then derive the boundary and label it from the listed
  // facet elements via the tag map
  for (auto& cell : mesh.cells) {
    Eigen::MatrixXd m(static_cast<int>(cell.size()), dim);
    for (size_t k = 0; k < cell.size(); ++k) m.row(static_cast<int>(k)) = mesh.vertices.row(cell[k]);
    Eigen::MatrixXd edges(dim, dim);
    for (int k = 0; k < dim; ++k) edges.col(k) = (m.row(k + 1) - m.row(0)).transpose();
    if (edges.determinant() < 0.0) std::swap(cell[cell.size() - 1], cell[cell.size() - 2]);
  }

  std::map<std::vector<int>, int> incidence;
  std::map<std::vector<int>, std::vector<int>> oriented;
  for (const auto& cell : mesh.cells)
    for (size_t skip = 0; skip < cell.size(); ++skip) {
      std::vector<int> facet;
      for (size_t k = 0; k < cell.size(); ++k)
        if (k != skip) facet.push_back(cell[k]);
      std::vector<int> key = facet;
      std::sort(key.begin(), key.end());
      ++incidence[key];
      oriented[key] = facet;
    }

  std::map<std::vector<int>, BoundaryLabel> labels;
  for (const auto& e : elems) {
    if (e.type != facet_type) continue;
    std::vector<int> key;
    for (int n : e.nodes) key.push_back(renumber[n]);
    std::sort(key.begin(), key.end());
    auto it = tag_map.find(e.physical);
    labels[key] = it == tag_map.end() ? BoundaryLabel::Free : it->second;
  }

  for (const auto& [key, count] : incidence) {
    if (count != 1) continue;
    BoundaryFacet bf;
    bf.vertices = oriented[key];
    auto it = labels.find(key);
    bf.label = it == labels.end() ? BoundaryLabel::Free : it->second;
    mesh.boundary.push_back(std::move(bf));
  }

  validate(mesh);
  return mesh;
}

std::uint64_t mesh_hash(const SimplicialMesh& mesh) {
  // FNV-1a over the canonical geometry bytes
  std::uint64_t h = 1469598103934665603ull;
  auto eat = [&h](const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  auto eat_int = [&](std::int64_t v) { eat(&v, sizeof v); };
  auto eat_double = [&](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    eat(&bits, sizeof bits);
  };

  eat_int(mesh.dim);
  eat_int(mesh.n_vertices());
  for (int i = 0; i < mesh.n_vertices(); ++i)
    for (int k = 0; k < mesh.dim; ++k) eat_double(mesh.vertices(i, k));
  eat_int(mesh.n_cells());
  for (const auto& cell : mesh.cells)
    for (int v : cell) eat_int(v);
  eat_int(static_cast<std::int64_t>(mesh.boundary.size()));
  for (const auto& bf : mesh.boundary) {
    for (int v : bf.vertices) eat_int(v);
    eat_int(static_cast<int>(bf.label));
  }
  return h;
}

std::string mesh_hash_hex(const SimplicialMesh& mesh) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(mesh_hash(mesh)));
  return std::string(buf);
}

}  // namespace korngauge::meshkit
