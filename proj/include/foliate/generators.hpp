#pragma once

#include "foliate/mesh.hpp"

namespace foliate {

enum class RadialGrading { geometric, uniform };

struct ShellOptions {
  // Octahedron subdivision level of each layer sphere; negative selects
  // refinement + 2.
  int sphere_level = -1;
  RadialGrading grading = RadialGrading::geometric;
};

int shell_sphere_level(int refinement, const ShellOptions& options = {});
int shell_layer_count(int refinement);

// Shell between concentric spheres about the origin: subdivided octahedron
// spheres extruded through 4 * 2^refinement radial layers, each prism split
// into three tets. Vertex ids are layer-major.
TetMesh generate_shell(double r_inner, double r_outer, int refinement,
                       const ShellOptions& options = {});

// Unit cube with opposite faces identified, n^3 cubes split into 6 tets each
// along the main diagonal.
TetMesh generate_flat_torus(int n);

// Axis-aligned box [lo, hi] split the same way as the torus, no wrap.
TetMesh generate_box(int nx, int ny, int nz, const Vec3& lo = Vec3::Zero(),
                     const Vec3& hi = Vec3::Ones());

TetMesh single_tet();
TetMesh regular_tet();

// Distinct vertex radii of a shell mesh, ascending. Empty when vertices do
// not sit on a small number of concentric spheres.
std::vector<double> layer_radii(const TetMesh& mesh);

// Layer sphere with the given index, oriented as the boundary of the region
// inside it.
SurfaceCycle layer_surface(const TetMesh& mesh, int layer);

// Interior layer sphere nearest to `radius`.
SurfaceCycle gaussian_sphere(const TetMesh& mesh, double radius);

// Grid size of a mesh produced by generate_flat_torus (0 if it is not one).
int torus_size(const TetMesh& mesh);

// Primal edge loop along a coordinate axis of a flat torus through vertex 0.
Chain torus_axis_cycle(const TetMesh& mesh, int axis);

// Dual loop through the tets that a line parallel to `axis` passes, on a
// flat torus. The line is placed at a generic position to avoid hitting
// lower-dimensional simplices.
Chain torus_dual_axis_cycle(const TetMesh& mesh, int axis);

// Dual loop through the tets around an interior edge.
Chain dual_loop_around_edge(const TetMesh& mesh, int edge);

// Region of tets whose centroids lie within the sphere of radius `radius`.
Chain tets_inside(const TetMesh& mesh, double radius);

}  // namespace foliate
