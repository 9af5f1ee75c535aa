#pragma once

#include "korngauge/constants.hpp"
#include "korngauge/meshkit.hpp"
#include "korngauge/verify.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace korngauge::studies {

/// Fully serializable study description; identical specs produce identical
/// reports apart from the timing fields.
struct StudySpec {
  std::string kind;  // blowup | convex-sweep | refine-convergence | dv-bound |
                     // verify-forms | verify-identities
  std::vector<int> ngon_values = {8, 16, 24, 32, 48, 64};
  int levels = 3;           // refine-convergence: h = 1/4, 1/8, ...
  int polygons = 10;        // convex-sweep
  double h = 1.0 / 32.0;    // convex-sweep target edge length
  int order = 2;
  std::uint64_t seed = 20240901;
  int trials = 200;         // verify kinds

  nlohmann::json to_json() const;
};

struct StudyResult {
  nlohmann::json report;
  std::string csv;
  bool ok = true;  // verification kinds report pass/fail here
};

StudyResult run_study(const StudySpec& spec);

/// Random convex polygon with 5-9 hull vertices, fan-triangulated from its
/// centroid and subdivided to the target edge length.  Deterministic per
/// seed.
meshkit::SimplicialMesh random_convex_polygon_mesh(std::uint64_t seed, double h, int& hull_size);

/// Worker cap: min(hardware, KORN_GAUGE_THREADS) when the variable is set.
int worker_count();

}  // namespace korngauge::studies
