#include "korngauge/constants.hpp"
#include "korngauge/fem.hpp"
#include "korngauge/meshkit.hpp"
#include "korngauge/spectra.hpp"
#include "korngauge/studies.hpp"
#include "korngauge/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerificationFailure = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitNumericalFailure = 3;

using korngauge::constants::ConstantReport;
using korngauge::meshkit::NormalMode;
using korngauge::meshkit::SimplicialMesh;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
  out << text;
}

std::string csv_row(const ConstantReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.name << "," << r.shape << "," << r.h << "," << r.bc << ",p" << r.space_order << "," << r.normal_mode
     << ",";
  if (r.value.infinite) os << "inf,inf";
  else os << r.value.value << "," << r.value_sq;
  os << "," << r.kernel_dim << "," << r.residual << "\n";
  return os.str();
}

void append_csv(const std::string& path, const std::string& row) {
  const bool fresh = !std::ifstream(path).good();
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
  if (fresh) out << "name,shape,h,bc,space,normal_mode,value,value_sq,kernel_dim,residual\n";
  out << row;
}

struct MeshGenArgs {
  std::string shape = "square";
  double h = 0.25;
  std::string output;
  std::string label = "all-free";
  int refine_steps = 0;
};

int run_mesh_gen(const MeshGenArgs& args) {
  auto mesh = korngauge::meshkit::generate(korngauge::meshkit::parse_shape(args.shape), args.h);
  for (int k = 0; k < args.refine_steps; ++k) mesh = korngauge::meshkit::refine(mesh);
  mesh = korngauge::meshkit::apply_named_labeling(std::move(mesh), args.label);
  korngauge::meshkit::validate(mesh);
  korngauge::meshkit::save_json(mesh, args.output);
  std::cout << "mesh " << args.shape << " h=" << args.h << ": " << mesh.n_cells() << " cells, "
            << mesh.boundary.size() << " boundary facets, volume " << korngauge::meshkit::total_volume(mesh)
            << " -> " << args.output << "\n";
  return kExitOk;
}

struct ConstantsArgs {
  std::string mesh_path;
  std::string bc = "all-normal";
  std::string space = "p2";
  std::string normal_mode = "facet";
  std::string which = "all";
  std::string output;
  std::string csv;
};

int run_constants(const ConstantsArgs& args) {
  SimplicialMesh mesh = korngauge::meshkit::load_json(args.mesh_path);
  mesh = korngauge::meshkit::apply_named_labeling(std::move(mesh), args.bc);

  int order = 0;
  if (args.space == "p1") order = 1;
  else if (args.space == "p2") order = 2;
  else throw std::invalid_argument("space must be p1 or p2");

  NormalMode mode;
  if (args.normal_mode == "facet") mode = NormalMode::Facet;
  else if (args.normal_mode == "exact-circle") mode = NormalMode::ExactCircle;
  else throw std::invalid_argument("normal-mode must be facet or exact-circle");

  std::vector<nlohmann::json> reports;
  std::string csv_rows;
  auto add = [&](const ConstantReport& r) {
    reports.push_back(r.to_json());
    csv_rows += csv_row(r);
    std::cout << r.name << ": " << (r.value.infinite ? std::string("inf") : std::to_string(r.value.value))
              << (r.value.infinite ? "" : " (squared " + std::to_string(r.value_sq) + ")") << "\n";
  };

  const bool all = args.which == "all";
  if (all || args.which == "korn") add(korngauge::constants::korn_constant(mesh, order, mode));
  if (all || args.which == "korn-nobc") add(korngauge::constants::korn_constant_no_bc(mesh, order));
  if (all || args.which == "gaffney") {
    const auto g = korngauge::constants::gaffney_ratios(mesh, order, mode);
    add(g.sup);
    add(g.inf);
  }
  if (all || args.which == "grad-number") {
    if (korngauge::constants::describe_labeling(mesh) == "normal") {
      add(korngauge::constants::grad_number(mesh, order).report);
    } else if (!all) {
      throw std::invalid_argument("grad-number needs the all-normal labeling");
    }
  }
  if (!all && reports.empty()) throw std::invalid_argument("unknown --which value '" + args.which + "'");

  if (!args.output.empty()) {
    nlohmann::json doc = reports.size() == 1 ? reports.front() : nlohmann::json(reports);
    write_file(args.output, doc.dump(1) + "\n");
  }
  if (!args.csv.empty()) append_csv(args.csv, csv_rows);
  return kExitOk;
}

struct StudyArgs {
  std::string kind;
  std::string out_prefix = "study";
  korngauge::studies::StudySpec spec;
};

int run_study_cmd(StudyArgs& args) {
  args.spec.kind = args.kind;
  const auto result = korngauge::studies::run_study(args.spec);
  write_file(args.out_prefix + ".csv", result.csv);
  write_file(args.out_prefix + ".json", result.report.dump(1) + "\n");
  std::cout << "study " << args.kind << " -> " << args.out_prefix << ".{csv,json}\n";
  if (!result.ok) {
    std::cerr << "study reported failures\n";
    return kExitVerificationFailure;
  }
  return kExitOk;
}

struct VerifyArgs {
  int trials = 200;
  std::uint64_t seed = 20240901;
  bool inject_failure = false;
  std::string json_out;
};

int run_verify(const VerifyArgs& args) {
  korngauge::verify::VerifyOptions opt;
  opt.trials = args.trials;
  opt.seed = args.seed;
  opt.inject_failure = args.inject_failure;
  const auto result = korngauge::verify::run_verification(opt);

  for (const auto& c : result.checks)
    std::cout << (c.passed ? "[ok]   " : "[FAIL] ") << c.name << "  max residual " << c.max_residual
              << "  tol " << c.tolerance << "  cases " << c.cases << "\n";
  if (!args.json_out.empty()) write_file(args.json_out, result.to_json().dump(1) + "\n");

  if (!result.passed()) {
    std::cerr << "verification failed:";
    for (const auto& f : result.failures()) std::cerr << " " << f;
    std::cerr << "\n";
    return kExitVerificationFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"korn-gauge: finite-element laboratory for Korn and Gaffney constants on polyhedral domains"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");  // frees -h/--h for edge lengths

  // mesh gen
  auto* mesh_cmd = app.add_subcommand("mesh", "mesh generation and inspection");
  mesh_cmd->require_subcommand(1);
  mesh_cmd->set_help_flag("--help");
  MeshGenArgs mesh_args;
  auto* gen = mesh_cmd->add_subcommand("gen", "generate a mesh");
  gen->set_help_flag("--help");
  gen->add_option("--shape", mesh_args.shape, "square|cube|lshape|annulus|ngon:<n>|prism:<n>");
  gen->add_option("--h", mesh_args.h, "target edge length");
  gen->add_option("-o,--output", mesh_args.output, "output mesh JSON")->required();
  gen->add_option("--label", mesh_args.label, "named labeling applied to the boundary");
  gen->add_option("--refine", mesh_args.refine_steps, "uniform refinement steps");

  ConstantsArgs const_args;
  auto* constants_cmd = app.add_subcommand("constants", "compute constants on a mesh");
  constants_cmd->set_help_flag("--help");
  constants_cmd->add_option("--mesh", const_args.mesh_path, "mesh JSON file")->required();
  constants_cmd->add_option("--bc", const_args.bc,
                            "all-normal|all-tangential|all-dirichlet|west-t-rest-n|inner-n-outer-t");
  constants_cmd->add_option("--space", const_args.space, "p1|p2");
  constants_cmd->add_option("--normal-mode", const_args.normal_mode, "facet|exact-circle");
  constants_cmd->add_option("--which", const_args.which, "korn|korn-nobc|gaffney|grad-number|all");
  constants_cmd->add_option("-o,--output", const_args.output, "report JSON path");
  constants_cmd->add_option("--csv", const_args.csv, "append a summary row to this CSV");

  StudyArgs study_args;
  auto* study_cmd = app.add_subcommand("study", "run a named study");
  study_cmd->set_help_flag("--help");
  study_cmd
      ->add_option("--kind", study_args.kind,
                   "blowup|convex-sweep|refine-convergence|dv-bound|verify-forms|verify-identities")
      ->required();
  study_cmd->add_option("-o,--out", study_args.out_prefix, "output path prefix");
  study_cmd->add_option("--seed", study_args.spec.seed, "random seed");
  study_cmd->add_option("--order", study_args.spec.order, "FE order (1 or 2)");
  study_cmd->add_option("--h", study_args.spec.h, "edge length for convex-sweep");
  study_cmd->add_option("--levels", study_args.spec.levels, "levels for refine-convergence");
  study_cmd->add_option("--polygons", study_args.spec.polygons, "cases for convex-sweep");
  study_cmd->add_option("--ngons", study_args.spec.ngon_values, "n-gon sizes for blowup");
  study_cmd->add_option("--trials", study_args.spec.trials, "trials for verify kinds");

  VerifyArgs verify_args;
  auto* verify_cmd = app.add_subcommand("verify", "run the identity and form verifiers");
  verify_cmd->set_help_flag("--help");
  verify_cmd->add_option("--trials", verify_args.trials, "random trials per check");
  verify_cmd->add_option("--seed", verify_args.seed, "random seed");
  verify_cmd->add_flag("--inject-failure", verify_args.inject_failure, "negative control: perturb one assembly");
  verify_cmd->add_option("--json", verify_args.json_out, "write the machine-readable result here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitInvalidInput;
  }

  try {
    if (gen->parsed()) return run_mesh_gen(mesh_args);
    if (constants_cmd->parsed()) return run_constants(const_args);
    if (study_cmd->parsed()) return run_study_cmd(study_args);
    if (verify_cmd->parsed()) return run_verify(verify_args);
  } catch (const korngauge::fem::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  } catch (const korngauge::spectra::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  } catch (const korngauge::fem::geometry_mismatch_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const korngauge::meshkit::parse_error& e) {
    std::cerr << "parse error";
    if (e.line_number >= 0) std::cerr << " (line " << e.line_number << ")";
    std::cerr << ": " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const korngauge::meshkit::mesh_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalFailure;
  }
  return kExitOk;
}
