#include "korngauge/studies.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace korngauge::studies {

namespace {

using meshkit::ShapeKind;
using meshkit::ShapeSpec;

std::string format_value_sq(const constants::ConstantReport& r) {
  if (r.value.infinite) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << r.value_sq;
  return os.str();
}

// ordered parallel map: results land by index, workers capped by
// KORN_GAUGE_THREADS
void parallel_cases(int n, const std::function<void(int)>& run) {
  const int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) run(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      int i;
      while ((i = next.fetch_add(1)) < n) run(i);
    });
  for (auto& t : pool) t.join();
}

StudyResult run_blowup(const StudySpec& spec) {
  struct Row {
    int n = 0;
    std::string mode;
    constants::ConstantReport report;
  };
  const std::vector<meshkit::NormalMode> modes = {meshkit::NormalMode::Facet, meshkit::NormalMode::ExactCircle};
  std::vector<Row> rows(spec.ngon_values.size() * modes.size());

  parallel_cases(static_cast<int>(rows.size()), [&](int idx) {
    const int n = spec.ngon_values[static_cast<size_t>(idx) / modes.size()];
    const meshkit::NormalMode mode = modes[static_cast<size_t>(idx) % modes.size()];
    // fan meshes keep every boundary vertex on the unit circle, which the
    // exact-circle mode requires; P1 keeps midpoint nodes out of play
    auto mesh = meshkit::apply_named_labeling(meshkit::generate(ShapeSpec{ShapeKind::NGon, n}, 1.0), "all-normal");
    Row row;
    row.n = n;
    row.mode = meshkit::to_string(mode);
    row.report = constants::korn_constant(mesh, 1, mode);
    rows[static_cast<size_t>(idx)] = std::move(row);
  });

  StudyResult result;
  std::ostringstream csv;
  csv << "n,normal_mode,value_sq,kernel_dim,witness_rotation_distance\n";
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& row : rows) {
    csv << row.n << "," << row.mode << "," << format_value_sq(row.report) << "," << row.report.kernel_dim << ",";
    const auto it = row.report.diagnostics.find("witness_rotation_distance");
    if (it != row.report.diagnostics.end()) csv << it->second;
    csv << "\n";
    cases.push_back(row.report.to_json());
  }
  result.csv = csv.str();
  result.report = {{"study", "blowup"}, {"spec", spec.to_json()}, {"cases", cases}};
  return result;
}

StudyResult run_convex_sweep(const StudySpec& spec) {
  struct Row {
    int hull = 0;
    double c_g = 0.0;
    double residual = 0.0;
    nlohmann::json report;
  };
  std::vector<Row> rows(static_cast<size_t>(spec.polygons));
  parallel_cases(spec.polygons, [&](int i) {
    int hull = 0;
    auto mesh = random_convex_polygon_mesh(spec.seed + static_cast<std::uint64_t>(i), spec.h, hull);
    mesh = meshkit::label_all(std::move(mesh), meshkit::BoundaryLabel::Normal);
    const auto sol = constants::grad_number(mesh, spec.order);
    rows[static_cast<size_t>(i)] = Row{hull, sol.c_g, sol.residuals.maxCoeff(), sol.report.to_json()};
  });

  double mean_dev = 0.0;
  for (const auto& r : rows) mean_dev += std::abs(r.c_g - 0.5);
  mean_dev /= static_cast<double>(rows.size());

  StudyResult result;
  std::ostringstream csv;
  csv.precision(17);
  csv << "index,hull_vertices,c_g,abs_dev_from_half,lsq_residual_max\n";
  nlohmann::json cases = nlohmann::json::array();
  for (size_t i = 0; i < rows.size(); ++i) {
    csv << i << "," << rows[i].hull << "," << rows[i].c_g << "," << std::abs(rows[i].c_g - 0.5) << ","
        << rows[i].residual << "\n";
    cases.push_back(rows[i].report);
  }
  result.csv = csv.str();
  result.report = {{"study", "convex-sweep"},
                   {"spec", spec.to_json()},
                   {"mean_abs_dev_from_half", mean_dev},
                   {"cases", cases}};
  return result;
}

StudyResult run_refine_convergence(const StudySpec& spec) {
  std::vector<constants::ConstantReport> reports(static_cast<size_t>(spec.levels));
  parallel_cases(spec.levels, [&](int level) {
    const double h = 1.0 / (4 << level);
    auto mesh = meshkit::apply_named_labeling(meshkit::generate(ShapeSpec{ShapeKind::Square, 0}, h), "all-normal");
    reports[static_cast<size_t>(level)] = constants::korn_constant(mesh, spec.order);
  });

  bool monotone = true, below = true;
  for (size_t l = 0; l < reports.size(); ++l) {
    if (reports[l].value_sq > 2.0 + 1e-8) below = false;
    if (l > 0 && reports[l].value_sq < reports[l - 1].value_sq - 1e-12) monotone = false;
  }

  StudyResult result;
  std::ostringstream csv;
  csv.precision(17);
  csv << "level,h,n_red,value_sq\n";
  nlohmann::json cases = nlohmann::json::array();
  for (size_t l = 0; l < reports.size(); ++l) {
    csv << l << "," << reports[l].h << "," << reports[l].n_red << "," << reports[l].value_sq << "\n";
    cases.push_back(reports[l].to_json());
  }
  result.csv = csv.str();
  result.report = {{"study", "refine-convergence"},
                   {"spec", spec.to_json()},
                   {"monotone_increasing", monotone},
                   {"bounded_by_two", below},
                   {"cases", cases}};
  return result;
}

StudyResult run_dv_bound(const StudySpec& spec) {
  auto mesh = meshkit::apply_named_labeling(meshkit::generate(ShapeSpec{ShapeKind::Square, 0}, 0.125), "all-normal");
  const auto c_kn = constants::korn_constant(mesh, spec.order);
  const auto c_k = constants::korn_constant_no_bc(mesh, spec.order);
  const auto gaffney = constants::gaffney_ratios(mesh, spec.order);
  const auto grad = constants::grad_number(mesh, spec.order);
  const auto bound = constants::dv_bound_check(c_kn, c_k, gaffney, grad);

  StudyResult result;
  std::ostringstream csv;
  csv.precision(17);
  csv << "lhs_c_kn_sq,rhs,holds\n" << bound.lhs << "," << bound.rhs << "," << (bound.holds ? 1 : 0) << "\n";
  result.csv = csv.str();
  result.report = {{"study", "dv-bound"},
                   {"spec", spec.to_json()},
                   {"bound", bound.to_json()},
                   {"c_kn", c_kn.to_json()},
                   {"c_k", c_k.to_json()},
                   {"gaffney_sup", gaffney.sup.to_json()},
                   {"gaffney_inf", gaffney.inf.to_json()},
                   {"c_g", grad.report.to_json()}};
  result.ok = bound.holds;
  return result;
}

StudyResult run_verify_kind(const StudySpec& spec, bool forms) {
  verify::VerifyOptions opt;
  opt.trials = spec.trials;
  opt.seed = spec.seed;
  opt.run_form_checks = forms;
  opt.run_identity_checks = !forms;
  const auto res = verify::run_verification(opt);

  StudyResult result;
  std::ostringstream csv;
  csv << "check,max_residual,tolerance,passed\n";
  for (const auto& c : res.checks)
    csv << c.name << "," << c.max_residual << "," << c.tolerance << "," << (c.passed ? 1 : 0) << "\n";
  result.csv = csv.str();
  result.report = {{"study", forms ? "verify-forms" : "verify-identities"},
                   {"spec", spec.to_json()},
                   {"verification", res.to_json()}};
  result.ok = res.passed();
  return result;
}

}  // namespace

nlohmann::json StudySpec::to_json() const {
  return {{"kind", kind},     {"ngon_values", ngon_values}, {"levels", levels}, {"polygons", polygons},
          {"h", h},           {"order", order},             {"seed", seed},     {"trials", trials}};
}

int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("KORN_GAUGE_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return hw;
}

meshkit::SimplicialMesh random_convex_polygon_mesh(std::uint64_t seed, double h, int& hull_size) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count_dist(5, 9);
  std::uniform_real_distribution<double> radius_dist(0.5, 0.8);
  std::uniform_real_distribution<double> angle_jitter(0.0, 1.0);

  std::vector<Eigen::Vector2d> hull;
  for (int attempt = 0; attempt < 200; ++attempt) {
    const int target = count_dist(rng);
    std::vector<double> angles(static_cast<size_t>(target));
    for (auto& a : angles) a = 2.0 * std::numbers::pi * angle_jitter(rng);
    std::sort(angles.begin(), angles.end());
    std::vector<Eigen::Vector2d> pts;
    for (double a : angles) {
      const double r = radius_dist(rng);
      pts.emplace_back(r * std::cos(a), r * std::sin(a));
    }
    // monotone-chain convex hull
    std::sort(pts.begin(), pts.end(), [](const auto& p, const auto& q) {
      return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y());
    });
    auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
      return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<Eigen::Vector2d> ch;
    for (const auto& p : pts) {
      while (ch.size() >= 2 && cross(ch[ch.size() - 2], ch.back(), p) <= 0) ch.pop_back();
      ch.push_back(p);
    }
    const size_t lower = ch.size() + 1;
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
      while (ch.size() >= lower && cross(ch[ch.size() - 2], ch.back(), *it) <= 0) ch.pop_back();
      ch.push_back(*it);
    }
    ch.pop_back();
    if (static_cast<int>(ch.size()) >= 5 && static_cast<int>(ch.size()) <= 9) {
      hull = std::move(ch);
      break;
    }
  }
  if (hull.empty()) throw meshkit::mesh_error("random_convex_polygon_mesh: no acceptable hull found");
  hull_size = static_cast<int>(hull.size());

  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : hull) centroid += p;
  centroid /= static_cast<double>(hull.size());

  // fan triangulation with uniform subdivision of each fan triangle
  meshkit::SimplicialMesh mesh;
  mesh.dim = 2;
  std::map<std::array<double, 3>, int> pool_index;
  std::vector<Eigen::Vector2d> coords;
  auto add_vertex = [&](const Eigen::Vector2d& x) {
    std::array<double, 3> key{x.x(), x.y(), 0.0};
    auto [it, inserted] = pool_index.try_emplace(key, static_cast<int>(coords.size()));
    if (inserted) coords.push_back(x);
    return it->second;
  };
  // one subdivision count for all fan triangles keeps the shared radial
  // edges conforming
  double longest = 0.0;
  for (size_t k = 0; k < hull.size(); ++k) {
    const Eigen::Vector2d a = centroid, b = hull[k], c = hull[(k + 1) % hull.size()];
    longest = std::max({longest, (b - a).norm(), (c - a).norm(), (c - b).norm()});
  }
  const int s = std::max(1, static_cast<int>(std::ceil(longest / h - 1e-9)));
  for (size_t k = 0; k < hull.size(); ++k) {
    const Eigen::Vector2d a = centroid, b = hull[k], c = hull[(k + 1) % hull.size()];
    auto sub = [&](int i, int j) {
      return add_vertex(a + (static_cast<double>(i) / s) * (b - a) + (static_cast<double>(j) / s) * (c - a));
    };
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s - i; ++j) {
        mesh.cells.push_back({sub(i, j), sub(i + 1, j), sub(i, j + 1)});
        if (j < s - i - 1) mesh.cells.push_back({sub(i + 1, j), sub(i + 1, j + 1), sub(i, j + 1)});
      }
  }
  mesh.vertices.resize(static_cast<int>(coords.size()), 2);
  for (size_t i = 0; i < coords.size(); ++i) mesh.vertices.row(static_cast<int>(i)) = coords[i].transpose();

  // boundary facets = facets incident to one cell
  std::map<std::vector<int>, std::pair<int, std::vector<int>>> incidence;
  for (const auto& cell : mesh.cells)
    for (size_t skip = 0; skip < cell.size(); ++skip) {
      std::vector<int> facet;
      for (size_t kk = 0; kk < cell.size(); ++kk)
        if (kk != skip) facet.push_back(cell[kk]);
      std::vector<int> key = facet;
      std::sort(key.begin(), key.end());
      auto it = incidence.find(key);
      if (it == incidence.end()) incidence.emplace(key, std::make_pair(1, facet));
      else ++it->second.first;
    }
  for (const auto& [key, entry] : incidence)
    if (entry.first == 1) mesh.boundary.push_back(meshkit::BoundaryFacet{entry.second, meshkit::BoundaryLabel::Free});

  mesh.shape = "convex-polygon:" + std::to_string(hull_size);
  mesh.h = h;
  return mesh;
}

StudyResult run_study(const StudySpec& spec) {
  if (spec.kind == "blowup") return run_blowup(spec);
  if (spec.kind == "convex-sweep") return run_convex_sweep(spec);
  if (spec.kind == "refine-convergence") return run_refine_convergence(spec);
  if (spec.kind == "dv-bound") return run_dv_bound(spec);
  if (spec.kind == "verify-forms") return run_verify_kind(spec, true);
  if (spec.kind == "verify-identities") return run_verify_kind(spec, false);
  throw std::invalid_argument("unknown study kind '" + spec.kind + "'");
}

}  // namespace korngauge::studies
