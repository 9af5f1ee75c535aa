#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

std::string binary() {
  const char* env = std::getenv("KORN_GAUGE_BIN");
  REQUIRE_MESSAGE(env != nullptr, "KORN_GAUGE_BIN must point at the korn-gauge binary");
  return env;
}

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string out_path = "/tmp/korngauge_cli_out.txt";
  const int status = std::system((binary() + " " + args + " > " + out_path + " 2>&1").c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_path);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

nlohmann::json load(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

nlohmann::json strip_timings(nlohmann::json j) {
  if (j.is_array()) {
    for (auto& item : j) item.erase("timings_ms");
  } else {
    j.erase("timings_ms");
  }
  return j;
}

}  // namespace

TEST_CASE("mesh gen writes the expected cell count") {
  const auto r = run("mesh gen --shape square --h 0.25 -o /tmp/kg_cli_square.json");
  CHECK(r.exit_code == 0);
  const auto doc = load("/tmp/kg_cli_square.json");
  CHECK(doc["cells"].size() == 32);
  CHECK(doc["dim"] == 2);
}

TEST_CASE("mesh gen: ngon shape flag") {
  const auto r = run("mesh gen --shape ngon:12 --h 1 -o /tmp/kg_cli_ngon.json");
  CHECK(r.exit_code == 0);
  CHECK(load("/tmp/kg_cli_ngon.json")["cells"].size() == 12);
}

TEST_CASE("mesh gen: unknown shape exits 2") {
  const auto r = run("mesh gen --shape torus --h 0.5 -o /tmp/kg_cli_bad.json");
  CHECK(r.exit_code == 2);
}

TEST_CASE("invalid flags exit 2") {
  CHECK(run("constants --mesh /tmp/kg_cli_square.json --space p7").exit_code == 2);
  CHECK(run("frobnicate").exit_code == 2);
  CHECK(run("constants --mesh /tmp/does_not_exist.json").exit_code == 2);
}

TEST_CASE("constants: korn report on the square") {
  run("mesh gen --shape square --h 0.125 -o /tmp/kg_cli_sq8.json");
  const auto r = run(
      "constants --mesh /tmp/kg_cli_sq8.json --bc all-normal --space p2 --which korn "
      "-o /tmp/kg_cli_korn.json --csv /tmp/kg_cli_korn.csv");
  CHECK(r.exit_code == 0);
  const auto rep = load("/tmp/kg_cli_korn.json");
  CHECK(rep["result"]["name"] == "c_kn");
  const double sq = rep["result"]["value_sq_or_inf"].get<double>();
  CHECK(sq <= 2.0 + 1e-8);
  CHECK(sq >= 1.99);

  std::ifstream csv("/tmp/kg_cli_korn.csv");
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header.rfind("name,", 0) == 0);
  CHECK(row.rfind("c_kn,square", 0) == 0);
  std::remove("/tmp/kg_cli_korn.csv");
}

TEST_CASE("constants: grad-number close to one half") {
  const auto r = run(
      "constants --mesh /tmp/kg_cli_sq8.json --bc all-normal --space p2 --which grad-number "
      "-o /tmp/kg_cli_grad.json");
  CHECK(r.exit_code == 0);
  const double cg = load("/tmp/kg_cli_grad.json")["result"]["value"].get<double>();
  CHECK(std::abs(cg - 0.5) <= 0.02);
}

TEST_CASE("constants: exact-circle reports inf") {
  const auto r = run(
      "constants --mesh /tmp/kg_cli_ngon.json --bc all-normal --space p1 --normal-mode exact-circle "
      "--which korn -o /tmp/kg_cli_inf.json");
  CHECK(r.exit_code == 0);
  const auto rep = load("/tmp/kg_cli_inf.json");
  CHECK(rep["result"]["value_sq_or_inf"] == "inf");
  CHECK(rep["result"]["residuals"]["witness_rotation_distance"].get<double>() <= 1e-8);
}

TEST_CASE("constants: byte-identical reports modulo timings") {
  const std::string cmd =
      "constants --mesh /tmp/kg_cli_sq8.json --bc all-normal --space p1 --which all -o ";
  CHECK(run(cmd + "/tmp/kg_cli_rep_a.json").exit_code == 0);
  CHECK(run(cmd + "/tmp/kg_cli_rep_b.json").exit_code == 0);
  CHECK(strip_timings(load("/tmp/kg_cli_rep_a.json")).dump() ==
        strip_timings(load("/tmp/kg_cli_rep_b.json")).dump());
}

TEST_CASE("verify: clean run exits 0, injected failure exits 1") {
  const auto good = run("verify --trials 24 --json /tmp/kg_cli_verify.json");
  CHECK(good.exit_code == 0);
  CHECK(load("/tmp/kg_cli_verify.json")["passed"].get<bool>());

  const auto bad = run("verify --trials 8 --inject-failure");
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("form-matrix-decompositions") != std::string::npos);
}

TEST_CASE("study blowup: facet column bounded, exact-circle column infinite") {
  const auto r = run("study --kind blowup --ngons 8 --ngons 16 -o /tmp/kg_cli_blowup");
  CHECK(r.exit_code == 0);
  std::ifstream csv("/tmp/kg_cli_blowup.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "n,normal_mode,value_sq,kernel_dim,witness_rotation_distance");
  int facet_rows = 0, inf_rows = 0;
  while (std::getline(csv, line)) {
    if (line.find(",facet,") != std::string::npos) {
      ++facet_rows;
      const auto a = line.find(",facet,") + 7;
      const double sq = std::stod(line.substr(a));
      CHECK(sq <= 2.0 + 1e-8);
    }
    if (line.find(",exact-circle,inf,") != std::string::npos) ++inf_rows;
  }
  CHECK(facet_rows == 2);
  CHECK(inf_rows == 2);

  const auto doc = load("/tmp/kg_cli_blowup.json");
  CHECK(doc["study"] == "blowup");
  CHECK(doc["cases"].size() == 4);
}

TEST_CASE("study determinism: fixed seeds give identical json modulo timings") {
  auto strip = [](nlohmann::json j) {
    for (auto& c : j["cases"]) c.erase("timings_ms");
    return j.dump();
  };
  CHECK(run("study --kind blowup --ngons 8 -o /tmp/kg_cli_det_a").exit_code == 0);
  CHECK(run("study --kind blowup --ngons 8 -o /tmp/kg_cli_det_b").exit_code == 0);
  CHECK(strip(load("/tmp/kg_cli_det_a.json")) == strip(load("/tmp/kg_cli_det_b.json")));
}

TEST_CASE("study verify-identities honours trials and exits 0") {
  const auto r = run("study --kind verify-identities --trials 16 -o /tmp/kg_cli_vident");
  CHECK(r.exit_code == 0);
  CHECK(load("/tmp/kg_cli_vident.json")["verification"]["passed"].get<bool>());
}
