#pragma once

#include "foliate/dec.hpp"

#include <string>

namespace foliate {

struct PiecewiseVectorField {
  std::vector<Vec3> values;  // one per tet
};

enum class ReconstructionStencil {
  tet,         // least squares over the tet's own four faces
  face_patch,  // the tet's faces plus those of its face neighbours
};

struct ReconstructionOptions {
  ReconstructionStencil stencil = ReconstructionStencil::face_patch;
  double warn_fraction = 0.1;
};

struct Reconstruction {
  PiecewiseVectorField R;
  // Per-tet constant 2-form in the (dy^dz, dz^dx, dx^dy) basis; R = -B.
  PiecewiseVectorField omega_proxy;
  // Residual of the tet's own four-face fit relative to its face-value scale.
  std::vector<double> fit_residual;
  std::vector<int> flagged_tets;
  double closedness = 0.0;    // max |d omega| / max |omega|
  double coclosedness = -1.0; // max |delta omega| / max |delta| scale, -1 without stars
  std::vector<std::string> warnings;
};

Reconstruction reconstruct_R(const TetMesh& mesh, const HodgeStars* stars, const Cochain& omega,
                             const ReconstructionOptions& options = {});

struct LeafMesh {
  double level = 0.0;
  std::vector<Vec3> vertices;
  std::vector<int> vertex_edge;  // mesh edge each vertex lies on
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> host_tet;
  std::vector<double> area;
  std::vector<Vec3> normal;          // unit, along increasing phi
  std::vector<double> pulled_omega;  // NaN when no 2-cochain was supplied
  std::vector<double> R_norm;        // |R| at the host tet, NaN without R
  bool perturbed = false;
  std::string note;

  int euler_characteristic() const;
  bool watertight() const;
};

struct LeafFields {
  const Cochain* omega = nullptr;
  const PiecewiseVectorField* R = nullptr;
};

// Marching tetrahedra on a vertex potential. Triangles are oriented along
// the gradient of phi, which is the omega-induced orientation when
// *omega = d phi.
LeafMesh extract_leaf(const TetMesh& mesh, const Cochain& phi, double level, const LeafFields& fields = {});

struct SymplecticArea {
  double value = 0.0;        // sum of pulled-back omega
  double cross_check = 0.0;  // sum of area * |R|
  double identity_error = 0.0;  // sum |omega_tri - |R| area| / sum |R| area
  bool watertight = false;
  std::string warning;
};

SymplecticArea symplectic_area(const LeafMesh& leaf);

struct MeanCurvature {
  // H = 1/2 div n with n = -R/|R|; positive on spheres around a positive
  // mass, where n points away from the centre.
  std::string convention;
  std::vector<double> tet_divergence;  // per tet, divergence route
  std::vector<double> tet_formula;     // per tet, direct formula route
  std::vector<double> vertex_divergence;
  std::vector<double> vertex_formula;
  std::vector<double> triangle_divergence;
  double median_divergence = 0.0;
  double median_formula = 0.0;
};

MeanCurvature mean_curvature(const TetMesh& mesh, const Cochain& omega, const PiecewiseVectorField& R,
                             const LeafMesh& leaf);

struct KernelParts {
  PiecewiseVectorField ker_omega;
  PiecewiseVectorField ker_star;
};

KernelParts kernel_decomposition_field(const Reconstruction& rec, const PiecewiseVectorField& v);

void write_obj(const LeafMesh& leaf, const std::string& path);
void write_vtk(const LeafMesh& leaf, const std::string& path, const MeanCurvature* curvature = nullptr);

// Per-tet fields on the volume mesh as a legacy VTK unstructured grid.
// Periodic meshes are written tet by tet with unshared corners so cells
// that wrap around keep their true shape.
struct CellField {
  std::string name;
  const Eigen::VectorXd* scalars = nullptr;
  const std::vector<Vec3>* vectors = nullptr;
};
void write_vtk_mesh(const TetMesh& mesh, const std::string& path, const std::vector<CellField>& fields);

double median(std::vector<double> values);

}  // namespace foliate
