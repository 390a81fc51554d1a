#pragma once

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cli {

using nlohmann::json;

struct MeshConfig {
  std::string kind = "shell";  // shell | torus | box | file
  double r_inner = 1.0;
  double r_outer = 2.0;
  int refine = 2;
  int sphere_level = -1;
  std::string grading = "geometric";
  int n = 3;  // torus / box resolution
  std::string file;
};

struct SourceConfig {
  std::string mode = "boundary_flux";  // boundary_flux | density
  std::vector<double> masses{1.0};     // per inner boundary component
  double density_mass = 1.0;           // density mode: total mass ...
  double density_radius = 0.0;         // ... spread uniformly below this radius; 0 means the inner third
};

struct RunConfig {
  std::string command;
  MeshConfig mesh;
  SourceConfig source;
  double tol = 1e-10;
  double eig_tol = 1e-8;
  std::string outer = "balanced";  // balanced | zero_flux | dirichlet
  std::string stencil = "face_patch";
  int degree = -1;  // harmonic: -1 means all degrees
  std::vector<double> radii{1.25, 1.5, 1.75};
  int level_count = 3;
  double m0 = 1.0, m1 = 1.0, m2 = 2.0;
  int trials = 1000;
  std::uint64_t seed = 1;
  // Outputs.
  std::string out;
  std::string mesh_out;
  std::string vtk;
  std::string export_pattern;
};

json to_json(const RunConfig& c);
// Fills fields present in j; the rest keep their current values.
void merge_json(RunConfig& c, const json& j);

// Runs the configured command. Results go into report["results"] and
// warnings into report["warnings"]; the return value is the exit code.
int run(const RunConfig& c, json& report);

}  // namespace cli
