#include "doctest.h"
#include "oracles.hpp"

#include "foliate/foliation.hpp"
#include "foliate/generators.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace foliate;

namespace {

Cochain vertex_function(const TetMesh& m, const std::function<double(const Vec3&)>& f) {
  Cochain c = Cochain::zeros(m, 0);
  for (int v = 0; v < m.num_vertices(); ++v) c.values[v] = f(m.vertices()[v]);
  return c;
}

int count_prefix(const std::string& path, const std::string& prefix) {
  std::ifstream in(path);
  std::string line;
  int n = 0;
  while (std::getline(in, line))
    if (line.rfind(prefix, 0) == 0) ++n;
  return n;
}

}  // namespace

TEST_CASE("constant 2-forms are reconstructed exactly by both stencils") {
  const TetMesh m = generate_shell(1.0, 2.0, 0);
  const Vec3 b(0.3, -1.0, 2.0);
  const Cochain omega = integrate_form(constant_field(KForm::two_form(b)), m, 2);
  const HodgeStars stars = build_stars(m);
  for (auto stencil : {ReconstructionStencil::tet, ReconstructionStencil::face_patch}) {
    ReconstructionOptions o;
    o.stencil = stencil;
    const Reconstruction rec = reconstruct_R(m, &stars, omega, o);
    for (int t = 0; t < m.num_tets(); ++t) {
      CHECK((rec.omega_proxy.values[t] - b).norm() < 1e-12);
      CHECK((rec.R.values[t] + b).norm() < 1e-12);
      CHECK(rec.fit_residual[t] < 1e-12);
    }
    CHECK(rec.flagged_tets.empty());
    CHECK(rec.closedness < 1e-12);
  }
  CHECK_THROWS_AS(reconstruct_R(m, nullptr, Cochain::zeros(m, 1)), Error);
}

TEST_CASE("plane leaves of a linear potential") {
  const TetMesh box = generate_box(3, 3, 3);
  const Cochain phi = vertex_function(box, [](const Vec3& p) { return p.x(); });
  const Cochain omega = integrate_form(constant_field(KForm::two_form({1, 0, 0})), box, 2);
  const Reconstruction rec = reconstruct_R(box, nullptr, omega);
  const LeafMesh leaf = extract_leaf(box, phi, 0.37, {&omega, &rec.R});
  CHECK_FALSE(leaf.perturbed);
  CHECK_FALSE(leaf.watertight());
  double area = 0.0;
  for (std::size_t i = 0; i < leaf.triangles.size(); ++i) {
    area += leaf.area[i];
    CHECK((leaf.normal[i] - Vec3(1, 0, 0)).norm() < 1e-12);
  }
  CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
  for (const Vec3& p : leaf.vertices) CHECK(p.x() == doctest::Approx(0.37).epsilon(1e-12));
  const SymplecticArea s = symplectic_area(leaf);
  CHECK(s.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.cross_check == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.identity_error < 1e-12);
  CHECK_FALSE(s.watertight);
  CHECK_FALSE(s.warning.empty());
  // Constant field: both curvature routes vanish.
  const MeanCurvature mc = mean_curvature(box, omega, rec.R, leaf);
  CHECK(std::abs(mc.median_divergence) < 1e-10);
  CHECK(std::abs(mc.median_formula) < 1e-10);
  // Scaling omega scales the symplectic area.
  Cochain twice = omega;
  twice.values *= 2.0;
  CHECK(symplectic_area(extract_leaf(box, phi, 0.37, {&twice, &rec.R})).value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("leaf extraction edge cases") {
  const TetMesh box = generate_box(3, 3, 3);
  const Cochain phi = vertex_function(box, [](const Vec3& p) { return p.x(); });
  const LeafMesh on_vertex = extract_leaf(box, phi, 1.0 / 3.0);
  CHECK(on_vertex.perturbed);
  CHECK_FALSE(on_vertex.note.empty());
  CHECK(on_vertex.level > 1.0 / 3.0);
  CHECK(std::isnan(on_vertex.pulled_omega.front()));
  CHECK_THROWS_AS(extract_leaf(box, phi, 2.0), Error);
  CHECK_THROWS_AS(extract_leaf(box, Cochain::zeros(box, 0), 0.0), Error);
  CHECK_THROWS_AS(extract_leaf(box, Cochain::zeros(box, 1), 0.5), Error);
}

TEST_CASE("closed leaves are watertight spheres") {
  const TetMesh box = generate_box(6, 6, 6, Vec3(-1, -1, -1), Vec3(1, 1, 1));
  const Cochain phi = vertex_function(box, [](const Vec3& p) { return p.squaredNorm() + 0.1 * p.x(); });
  for (double level : {0.2, 0.45}) {
    const LeafMesh leaf = extract_leaf(box, phi, level);
    CHECK(leaf.watertight());
    CHECK(leaf.euler_characteristic() == 2);
    // Outward orientation: signed volume enclosed is positive.
    double vol = 0.0;
    for (const auto& t : leaf.triangles)
      vol += leaf.vertices[t[0]].dot(leaf.vertices[t[1]].cross(leaf.vertices[t[2]])) / 6.0;
    CHECK(vol > 0.0);
  }
}

TEST_CASE("mean curvature of spheres in the inverse-square field") {
  const TetMesh m = generate_shell(1.0, 2.0, 1);
  const Cochain omega = integrate_form(newton_sigma_field(4.0 * M_PI), m, 2);
  const Reconstruction rec = reconstruct_R(m, nullptr, omega);
  const Cochain phi = vertex_function(m, [](const Vec3& p) { return -1.0 / p.norm(); });
  for (double r : {1.25, 1.5, 1.75}) {
    const LeafMesh leaf = extract_leaf(m, phi, -1.0 / r, {&omega, &rec.R});
    CHECK(leaf.watertight());
    const MeanCurvature mc = mean_curvature(m, omega, rec.R, leaf);
    CHECK(mc.median_divergence == doctest::Approx(1.0 / r).epsilon(0.1));
    CHECK(mc.median_formula == doctest::Approx(1.0 / r).epsilon(0.1));
    CHECK_FALSE(mc.convention.empty());
    const SymplecticArea s = symplectic_area(leaf);
    CHECK(s.value == doctest::Approx(4.0 * M_PI).epsilon(0.03));
  }
  PiecewiseVectorField zero;
  zero.values.assign(m.num_tets(), Vec3::Zero());
  const LeafMesh leaf = extract_leaf(m, phi, -1.0 / 1.5);
  try {
    mean_curvature(m, omega, zero, leaf);
    FAIL("vanishing field accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_form);
  }
}

TEST_CASE("kernel decomposition per tet") {
  const TetMesh m = generate_box(2, 2, 2);
  const Cochain omega = integrate_form(constant_field(KForm::two_form({0, 0, 2})), m, 2);
  const Reconstruction rec = reconstruct_R(m, nullptr, omega);
  PiecewiseVectorField v;
  v.values.assign(m.num_tets(), Vec3(1, 2, 3));
  const KernelParts parts = kernel_decomposition_field(rec, v);
  for (int t = 0; t < m.num_tets(); ++t) {
    CHECK((parts.ker_omega.values[t] - Vec3(0, 0, 3)).norm() < 1e-12);
    CHECK((parts.ker_star.values[t] - Vec3(1, 2, 0)).norm() < 1e-12);
  }
  v.values.pop_back();
  CHECK_THROWS_AS(kernel_decomposition_field(rec, v), Error);
}

TEST_CASE("OBJ and VTK exports") {
  const TetMesh box = generate_box(4, 4, 4, Vec3(-1, -1, -1), Vec3(1, 1, 1));
  const Cochain phi = vertex_function(box, [](const Vec3& p) { return p.squaredNorm(); });
  const LeafMesh leaf = extract_leaf(box, phi, 0.5);
  write_obj(leaf, "leaf_export_test.obj");
  CHECK(count_prefix("leaf_export_test.obj", "v ") == static_cast<int>(leaf.vertices.size()));
  CHECK(count_prefix("leaf_export_test.obj", "f ") == static_cast<int>(leaf.triangles.size()));
  write_vtk(leaf, "leaf_export_test.vtk");
  CHECK(count_prefix("leaf_export_test.vtk", "POLYGONS") == 1);
  Eigen::VectorXd vol(box.num_tets());
  for (int t = 0; t < box.num_tets(); ++t) vol[t] = box.tet_volume(t);
  write_vtk_mesh(box, "mesh_export_test.vtk", {{"volume", &vol, nullptr}});
  CHECK(count_prefix("mesh_export_test.vtk", "CELL_TYPES") == 1);
  for (const char* p : {"leaf_export_test.obj", "leaf_export_test.vtk", "mesh_export_test.vtk"}) std::remove(p);
  CHECK_THROWS_AS(write_obj(leaf, "no/such/dir/leaf.obj"), Error);
}

TEST_CASE("median helper") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(std::isnan(median({})));
}
