#pragma once

#include "foliate/foliation.hpp"
#include "foliate/solve.hpp"

#include <string>

namespace foliate {

enum class SourceMode { density, boundary_flux };

struct SourceSpec {
  SourceMode mode = SourceMode::boundary_flux;
  Cochain density;                   // mass per tet (dual 0-cochain on tets) in density mode
  std::vector<double> boundary_flux; // mass enclosed by each inner boundary component
  double total_mass = 0.0;

  static SourceSpec from_density(const Cochain& mass_per_tet);
  static SourceSpec inner_flux(std::vector<double> masses);
  static SourceSpec zero();
  // Sum of two sources of the same mode.
  static SourceSpec add(const SourceSpec& a, const SourceSpec& b);
  void validate(const TetMesh& mesh) const;
};

enum class OuterBoundary {
  balanced,   // outward flux of the total mass spread over the outer boundary by area
  zero_flux,  // pure Neumann; requires zero total mass
  dirichlet,  // far-field potential -M / (4 pi r) at outer face centroids
};

struct PoissonOptions {
  OuterBoundary outer = OuterBoundary::balanced;
  int max_iterations = 0;
  ReconstructionOptions reconstruction;
};

struct GravitySolution {
  Cochain phi;         // dual 0-cochain: one potential value per tet
  Cochain phi_vertex;  // primal 0-cochain: volume-weighted tet average
  Cochain omega;       // primal 2-cochain, flux of grad phi through each face
  Cochain star_omega;  // dual 1-cochain: the dual coboundary of phi
  PiecewiseVectorField R;
  std::vector<std::string> warnings;
  SolveReport report;
  double imbalance = 0.0;  // total prescribed outflux minus total mass
};

// Boundary components split into the outer one (largest area) and the rest,
// in boundary_components order.
struct BoundaryLayout {
  int outer = -1;
  std::vector<int> inner;
  std::vector<std::vector<int>> components;
};
BoundaryLayout boundary_layout(const TetMesh& mesh);

GravitySolution solve_poisson(const TetMesh& mesh, const HodgeStars& stars, const SourceSpec& src, double tol,
                              const PoissonOptions& options = {});

double gaussian_flux(const Cochain& omega, const SurfaceCycle& surface);

struct FieldAxiomReport {
  std::vector<double> periods;
  double max_abs = 0.0;
  bool satisfied = false;
};

// Periods of a 1-cochain (primal or dual) over matching closed chains.
FieldAxiomReport field_axiom_check(const Cochain& star_omega, const std::vector<Chain>& cycles,
                                   double tol = 1e-8);
FieldAxiomReport field_axiom_check(const GravitySolution& sol, const std::vector<Chain>& cycles,
                                   double tol = 1e-8);

struct LinearityReport {
  double phi_deviation = 0.0;
  double omega_deviation = 0.0;
  bool passed = false;
};

LinearityReport linearity_check(const TetMesh& mesh, const HodgeStars& stars, const SourceSpec& src1,
                                const SourceSpec& src2, double tol, const PoissonOptions& options = {});

struct ShellTheoremReport {
  double support_radius = 0.0;  // density support: tets with centroid radius below this
  std::vector<double> radii;    // exterior gaussian spheres
  std::vector<double> flux_point;
  std::vector<double> flux_density;
  double max_flux_difference = 0.0;
  double max_flux_error = 0.0;   // against m0
  double field_l2_difference = 0.0;  // outer third, relative to the point-source field
  bool passed = false;
};

ShellTheoremReport shell_theorem_check(const TetMesh& mesh, const HodgeStars& stars, double m0, double tol,
                                       const PoissonOptions& options = {});

// Fluxes of the solution over a 2-cycle homology basis: the outer boundary
// for a shell with one hole, each hole boundary when there are several, the
// coordinate planes on a flat torus.
std::vector<double> deRham_class_of_source(const TetMesh& mesh, const HodgeStars& stars, const SourceSpec& src,
                                           double tol, const PoissonOptions& options = {});
std::vector<SurfaceCycle> homology_basis_2(const TetMesh& mesh);

// Volume-weighted relative L2 distance between per-tet R and the analytic
// inverse-square field of mass m0 at the origin, sampled at centroids.
double newton_field_error(const TetMesh& mesh, const PiecewiseVectorField& R, double m0,
                          const std::vector<char>& mask = {});

// Potential at a radius: layer means of the vertex potential, interpolated
// linearly in r between the two layers around it.
double potential_at_radius(const TetMesh& mesh, const Cochain& phi_vertex, double radius);

}  // namespace foliate
