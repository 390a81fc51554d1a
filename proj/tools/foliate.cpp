#include "CLI11.hpp"
#include "commands.hpp"

#include "foliate/common.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

namespace {

void add_mesh_options(CLI::App* sub, cli::RunConfig& c) {
  sub->add_option("--mesh", c.mesh.kind, "shell | torus | box | file");
  sub->add_option("--mesh-file", c.mesh.file, "node/ele mesh to load when --mesh file");
  sub->add_option("--refine", c.mesh.refine, "shell refinement");
  sub->add_option("--sphere-level", c.mesh.sphere_level, "shell sphere subdivision level (default refine + 2)");
  sub->add_option("--r-inner", c.mesh.r_inner, "shell inner radius");
  sub->add_option("--r-outer", c.mesh.r_outer, "shell outer radius");
  sub->add_option("--grading", c.mesh.grading, "geometric | uniform radial layers");
  sub->add_option("--n", c.mesh.n, "torus or box cells per side");
}

void add_source_options(CLI::App* sub, cli::RunConfig& c) {
  sub->add_option("--source", c.source.mode, "boundary_flux | density");
  sub->add_option("--mass", c.source.masses, "mass behind each inner boundary component");
  sub->add_option("--density-mass", c.source.density_mass, "total mass in density mode");
  sub->add_option("--density-radius", c.source.density_radius, "density support radius");
  sub->add_option("--outer", c.outer, "balanced | zero_flux | dirichlet");
  sub->add_option("--stencil", c.stencil, "face_patch | tet reconstruction of R");
  sub->add_option("--tol", c.tol, "linear solver tolerance");
  sub->add_option("--radii", c.radii, "gaussian sphere radii");
  sub->add_option("--vtk", c.vtk, "VTK output path");
}

void build_app(CLI::App& app, cli::RunConfig& config, std::string& config_path) {
  app.require_subcommand(1);
  struct Spec {
    const char* name;
    const char* help;
    bool source;
  };
  const Spec specs[] = {
      {"gen-mesh", "generate a mesh fixture and report its statistics", false},
      {"betti", "Betti numbers from incidence ranks", false},
      {"harmonic", "harmonic k-cochains by the smallest Hodge Laplacian eigenpairs", false},
      {"poisson", "solve the flux formulation of Poisson's equation", true},
      {"flux", "gaussian fluxes of a Poisson solution", true},
      {"leaves", "level-set leaves of the potential with symplectic area and curvature", true},
      {"newton", "inverse-square field of an excised point mass", true},
      {"shell-theorem", "point mass against the same mass spread through a shell", true},
      {"linearity", "superposition of two inner-flux sources", true},
      {"lemma-suite", "random pointwise checks of the linear-algebra identities", false},
  };
  for (const Spec& s : specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config_path, "JSON config; explicit flags override it");
    sub->add_option("--out", config.out, "report JSON path (stdout when absent)");
    add_mesh_options(sub, config);
    if (s.source) add_source_options(sub, config);
  }
  app.get_subcommand("gen-mesh")->add_option("--mesh-out", config.mesh_out, "write the mesh in node/ele form");
  CLI::App* harmonic = app.get_subcommand("harmonic");
  harmonic->add_option("--k", config.degree, "degree (all when omitted)");
  harmonic->add_option("--eig-tol", config.eig_tol, "eigen residual tolerance");
  harmonic->add_option("--export", config.export_pattern, "write the basis as text");
  CLI::App* leaves = app.get_subcommand("leaves");
  leaves->add_option("--level-count", config.level_count, "number of leaves");
  leaves->add_option("--export", config.export_pattern, "OBJ path pattern with %d");
  for (const char* name : {"newton", "leaves", "shell-theorem"})
    app.get_subcommand(name)->add_option("--m0", config.m0, "point mass");
  CLI::App* linearity = app.get_subcommand("linearity");
  linearity->add_option("--m1", config.m1, "first inner mass");
  linearity->add_option("--m2", config.m2, "second inner mass");
  CLI::App* lemma = app.get_subcommand("lemma-suite");
  lemma->add_option("--trials", config.trials, "random trials");
  lemma->add_option("--seed", config.seed, "random seed");
}

const char* kAbout = "Discrete exterior calculus experiments on tetrahedral meshes";

}  // namespace

int main(int argc, char** argv) {
  cli::RunConfig config;
  std::string config_path;
  CLI::App app{kAbout, "foliate"};
  build_app(app, config, config_path);
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  config.command = app.get_subcommands().front()->get_name();

  cli::json report;
  report["schema"] = 1;
  report["warnings"] = cli::json::array();
  const auto start = std::chrono::steady_clock::now();
  int code = 0;
  try {
    if (!config_path.empty()) {
      // File values first, then the command line again on top of them.
      std::ifstream in(config_path);
      if (!in) throw foliate::Error(foliate::ErrorKind::io, "cannot read config " + config_path);
      cli::json j;
      try {
        in >> j;
      } catch (const cli::json::exception& e) {
        throw foliate::Error(foliate::ErrorKind::parse, std::string("config: ") + e.what());
      }
      cli::RunConfig layered;
      cli::merge_json(layered, j);
      CLI::App again{kAbout, "foliate"};
      std::string ignored;
      build_app(again, layered, ignored);
      again.parse(argc, argv);
      layered.command = config.command;
      config = layered;
    }
    report["config"] = cli::to_json(config);
    code = cli::run(config, report);
  } catch (const foliate::Error& e) {
    std::cerr << "foliate: " << e.what() << '\n';
    report["error"] = {{"kind", foliate::to_string(e.kind())}, {"message", e.what()}};
    code = e.kind() == foliate::ErrorKind::convergence ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "foliate: " << e.what() << '\n';
    report["error"] = {{"kind", "internal"}, {"message", e.what()}};
    code = 1;
  }
  for (const auto& w : report["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
  report["timing"] = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};

  const std::string text = report.dump(2) + "\n";
  if (config.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(config.out);
    if (!out || !(out << text)) {
      std::cerr << "foliate: cannot write " << config.out << '\n';
      return 1;
    }
  }
  return code;
}
