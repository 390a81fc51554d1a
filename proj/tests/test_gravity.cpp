#include "doctest.h"
#include "oracles.hpp"

#include "foliate/generators.hpp"
#include "foliate/gravity.hpp"
#include "foliate/hodge.hpp"

#include <cmath>

using namespace foliate;

namespace {

const TetMesh& shell1() {
  static const TetMesh m = generate_shell(1.0, 2.0, 1);
  return m;
}

const HodgeStars& shell1_stars() {
  static const HodgeStars s = build_stars(shell1());
  return s;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::parameter;
}

Cochain tet_density(const TetMesh& m) {
  Cochain c = Cochain::zeros(m, 0, Complex::dual);
  return c;
}

}  // namespace

TEST_CASE("zero source gives a zero field") {
  const GravitySolution s = solve_poisson(shell1(), shell1_stars(), SourceSpec::zero(), 1e-10);
  CHECK(s.phi.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.omega.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.report.converged);
}

TEST_CASE("point source: gaussian flux equals the enclosed mass") {
  const TetMesh& m = shell1();
  const GravitySolution s = solve_poisson(m, shell1_stars(), SourceSpec::inner_flux({1.0}), 1e-10);
  REQUIRE(s.report.converged);
  CHECK(s.phi_vertex.values[0] == 0.0);
  CHECK(s.omega.degree == 2);
  CHECK(s.star_omega.complex == Complex::dual);
  for (double r : {1.25, 1.5, 1.75}) {
    const SurfaceCycle sphere = gaussian_sphere(m, r);
    const double flux = gaussian_flux(s.omega, sphere);
    CHECK(std::abs(flux - 1.0) < 1e-8);
    CHECK(gaussian_flux(s.omega, sphere.reversed(m)) == doctest::Approx(-flux).epsilon(1e-14));
  }
  // Every interior layer carries the same flux.
  const std::vector<double> radii = layer_radii(m);
  for (std::size_t i = 1; i + 1 < radii.size(); ++i)
    CHECK(std::abs(gaussian_flux(s.omega, layer_surface(m, static_cast<int>(i))) - 1.0) < 1e-8);
  CHECK(kind_of([&] { gaussian_flux(s.star_omega, gaussian_sphere(m, 1.5)); }) == ErrorKind::degree);

  // Interior faces: star_omega is the dual coboundary of phi and equals w * omega.
  // Grounding shifts phi afterwards, which only costs rounding.
  const Eigen::VectorXd& w = shell1_stars()[2].weights;
  const double phi_scale = s.phi.values.cwiseAbs().maxCoeff();
  for (int f = 0; f < m.num_faces(); ++f) {
    const auto& ft = m.face_tets(f);
    if (ft[0] < 0 || ft[1] < 0) continue;
    CHECK(std::abs(s.star_omega.values[f] - (s.phi.values[ft[1]] - s.phi.values[ft[0]])) <= 1e-14 * phi_scale);
    CHECK(std::abs(s.star_omega.values[f] - w[f] * s.omega.values[f]) <= 1e-14 * (1 + std::abs(s.star_omega.values[f])));
  }
}

TEST_CASE("potential is monotone and increases outward") {
  const TetMesh& m = shell1();
  const GravitySolution s = solve_poisson(m, shell1_stars(), SourceSpec::inner_flux({1.0}), 1e-10);
  const double a = potential_at_radius(m, s.phi_vertex, 1.25);
  const double b = potential_at_radius(m, s.phi_vertex, 1.5);
  const double c = potential_at_radius(m, s.phi_vertex, 1.75);
  CHECK(a < b);
  CHECK(b < c);
  // Differences follow -m/(4 pi r) within discretisation error.
  const double exact = (1.0 / 1.25 - 1.0 / 1.75) / (4.0 * M_PI);
  CHECK(std::abs((c - a) - exact) < 0.05 * exact);
  CHECK(kind_of([&] { potential_at_radius(m, s.phi_vertex, 2.5); }) == ErrorKind::parameter);
  // The nominal boundary radii are inside even though vertex norms round.
  CHECK(potential_at_radius(m, s.phi_vertex, 1.0) < a);
  CHECK(potential_at_radius(m, s.phi_vertex, 2.0) > c);
}

TEST_CASE("flux through the boundary of any tet set equals its mass") {
  const TetMesh& m = shell1();
  oracle::Gen gen(17);
  Cochain density = Cochain::zeros(m, 0, Complex::dual);
  for (int t = 0; t < m.num_tets(); ++t) density.values[t] = gen.uniform(0.0, 1.0) * m.tet_volume(t);
  const GravitySolution s = solve_poisson(m, shell1_stars(), SourceSpec::from_density(density), 1e-12);
  REQUIRE(s.report.converged);
  const double total = density.values.sum();
  for (int trial = 0; trial < 20; ++trial) {
    Chain v;
    v.degree = 3;
    double mass = 0.0;
    const double p = gen.uniform(0.05, 0.6);
    for (int t = 0; t < m.num_tets(); ++t)
      if (gen.uniform(0.0, 1.0) < p) {
        v.coefficients[t] = 1;
        mass += density.values[t];
      }
    const SurfaceCycle surface(m, boundary(m, v));
    CHECK(std::abs(gaussian_flux(s.omega, surface) - mass) < 1e-8 * total);
  }
  // Outer boundary under the balanced condition carries the total mass.
  const auto hb = homology_basis_2(m);
  REQUIRE(hb.size() == 1);
  CHECK(std::abs(gaussian_flux(s.omega, hb[0]) - total) < 1e-10 * total);
}

TEST_CASE("sources validate and refuse incompatible data") {
  const TetMesh& m = shell1();
  const HodgeStars& st = shell1_stars();
  PoissonOptions neumann;
  neumann.outer = OuterBoundary::zero_flux;
  CHECK(kind_of([&] { solve_poisson(m, st, SourceSpec::inner_flux({1.0}), 1e-10, neumann); }) ==
        ErrorKind::compatibility);
  // Zero total mass is fine under pure Neumann.
  Cochain dipole = tet_density(m);
  dipole.values[0] = 1.0;
  dipole.values[m.num_tets() - 1] = -1.0;
  CHECK_NOTHROW(solve_poisson(m, st, SourceSpec::from_density(dipole), 1e-10, neumann));

  CHECK(kind_of([&] { solve_poisson(m, st, SourceSpec::inner_flux({1.0, 2.0}), 1e-10); }) == ErrorKind::validation);
  Cochain wrong = Cochain::zeros(m, 0);
  CHECK(kind_of([&] { solve_poisson(m, st, SourceSpec::from_density(wrong), 1e-10); }) == ErrorKind::validation);
  CHECK(kind_of([&] { SourceSpec::add(SourceSpec::inner_flux({1.0}), SourceSpec::from_density(dipole)); }) ==
        ErrorKind::parameter);
  CHECK(kind_of([&] { solve_poisson(m, st, SourceSpec::zero(), 0.0); }) == ErrorKind::parameter);

  const TetMesh torus = generate_flat_torus(3);
  const HodgeStars ts = build_stars(torus);
  Cochain lump = tet_density(torus);
  lump.values[0] = 1.0;
  CHECK(kind_of([&] { solve_poisson(torus, ts, SourceSpec::from_density(lump), 1e-10); }) ==
        ErrorKind::compatibility);
}

TEST_CASE("torus with a balanced density") {
  const TetMesh torus = generate_flat_torus(3);
  const HodgeStars ts = build_stars(torus);
  oracle::Gen gen(3);
  Cochain rho = tet_density(torus);
  for (int t = 0; t < torus.num_tets(); ++t) rho.values[t] = gen.normal();
  rho.values.array() -= rho.values.mean();
  const GravitySolution s = solve_poisson(torus, ts, SourceSpec::from_density(rho), 1e-12);
  REQUIRE(s.report.converged);
  // d omega reproduces the density on every tet.
  const Cochain div = apply(coboundary(torus, 2), s.omega);
  CHECK((div.values - rho.values).cwiseAbs().maxCoeff() < 1e-9 * rho.values.cwiseAbs().maxCoeff());
  // star omega is a coboundary, so it has no periods on dual loops.
  std::vector<Chain> loops;
  for (int axis = 0; axis < 3; ++axis) loops.push_back(torus_dual_axis_cycle(torus, axis));
  const FieldAxiomReport fa = field_axiom_check(s, loops);
  CHECK(fa.satisfied);
  CHECK(fa.max_abs < 1e-12);

  const auto zero = deRham_class_of_source(torus, ts, SourceSpec::zero(), 1e-10);
  REQUIRE(zero.size() == 3);
  for (double x : zero) CHECK(x == 0.0);
}

TEST_CASE("field axiom on dual loops around interior edges") {
  const TetMesh& m = shell1();
  const GravitySolution s = solve_poisson(m, shell1_stars(), SourceSpec::inner_flux({1.0}), 1e-10);
  std::vector<Chain> loops;
  for (int e = 0; e < m.num_edges() && loops.size() < 200; e += 7) {
    try {
      loops.push_back(dual_loop_around_edge(m, e));
    } catch (const Error&) {
    }
  }
  REQUIRE(loops.size() > 50);
  const FieldAxiomReport fa = field_axiom_check(s, loops);
  CHECK(fa.satisfied);
  CHECK(fa.periods.size() == loops.size());

  // A harmonic 1-cochain on the torus has a period and fails the axiom.
  const TetMesh torus = generate_flat_torus(3);
  const DecOperators ops = build_operators(torus);
  const HarmonicBasis h1 = harmonic_basis(torus, ops, 1);
  const Cochain dz = integrate_form(constant_field(KForm::one_form({0, 0, 1})), torus, 1);
  const Cochain h = project_harmonic(h1, ops.stars, dz);
  const FieldAxiomReport bad = field_axiom_check(h, {torus_axis_cycle(torus, 2)});
  CHECK_FALSE(bad.satisfied);
  CHECK(std::abs(bad.periods[0] - 1.0) < 1e-6);
}

TEST_CASE("superposition") {
  const TetMesh& m = shell1();
  const HodgeStars& st = shell1_stars();
  const SourceSpec a = SourceSpec::inner_flux({1.0});
  CHECK(linearity_check(m, st, a, SourceSpec::inner_flux({2.0}), 1e-10).passed);
  CHECK(linearity_check(m, st, a, SourceSpec::inner_flux({0.0}), 1e-10).passed);
  const LinearityReport opposite = linearity_check(m, st, a, SourceSpec::inner_flux({-1.0}), 1e-10);
  CHECK(opposite.passed);
  CHECK(opposite.phi_deviation <= 1e-9);

  oracle::Gen gen(9);
  Cochain r1 = tet_density(m), r2 = tet_density(m);
  for (int t = 0; t < m.num_tets(); ++t) {
    r1.values[t] = gen.uniform(0, 1) * m.tet_volume(t);
    r2.values[t] = gen.normal() * m.tet_volume(t);
  }
  const LinearityReport dens = linearity_check(m, st, SourceSpec::from_density(r1), SourceSpec::from_density(r2), 1e-10);
  CHECK(dens.passed);
  CHECK(dens.omega_deviation <= 1e-9);
}

TEST_CASE("shell theorem for positive, zero and negative mass") {
  const TetMesh& m = shell1();
  const HodgeStars& st = shell1_stars();
  const ShellTheoremReport pos = shell_theorem_check(m, st, 1.0, 1e-10);
  CHECK(pos.passed);
  REQUIRE(!pos.radii.empty());
  CHECK(pos.max_flux_error <= 1e-8);
  CHECK(pos.support_radius > 1.0);
  for (double r : pos.radii) CHECK(r > pos.support_radius);
  for (std::size_t i = 0; i < pos.radii.size(); ++i) CHECK(std::abs(pos.flux_density[i] - 1.0) < 1e-8);

  const ShellTheoremReport zero = shell_theorem_check(m, st, 0.0, 1e-10);
  CHECK(zero.max_flux_error == 0.0);
  CHECK(zero.field_l2_difference == 0.0);

  const ShellTheoremReport neg = shell_theorem_check(m, st, -1.0, 1e-10);
  for (double f : neg.flux_point) CHECK(std::abs(f + 1.0) < 1e-8);
  CHECK(std::abs(neg.field_l2_difference - pos.field_l2_difference) < 1e-6);

  const TetMesh box = generate_box(2, 2, 2);
  CHECK(kind_of([&] { shell_theorem_check(box, build_stars(box), 1.0, 1e-10); }) == ErrorKind::parameter);
}

TEST_CASE("de Rham class of the source on a shell") {
  const TetMesh& m = shell1();
  const HodgeStars& st = shell1_stars();
  const auto point = deRham_class_of_source(m, st, SourceSpec::inner_flux({1.0}), 1e-10);
  REQUIRE(point.size() == 1);
  CHECK(std::abs(point[0] - 1.0) < 1e-9);

  Cochain rho = tet_density(m);
  for (int t = 0; t < m.num_tets(); ++t) rho.values[t] = m.tet_volume(t);
  rho.values *= 0.5 / rho.values.sum();
  const auto spread = deRham_class_of_source(m, st, SourceSpec::from_density(rho), 1e-10);
  REQUIRE(spread.size() == 1);
  CHECK(std::abs(spread[0] - 0.5) < 1e-9);
}

TEST_CASE("Dirichlet far field") {
  const TetMesh& m = shell1();
  PoissonOptions o;
  o.outer = OuterBoundary::dirichlet;
  const GravitySolution s = solve_poisson(m, shell1_stars(), SourceSpec::inner_flux({1.0}), 1e-11, o);
  REQUIRE(s.report.converged);
  // Source-free between the inner hole and any layer, so the flux is exact.
  for (double r : {1.25, 1.5, 1.75}) CHECK(std::abs(gaussian_flux(s.omega, gaussian_sphere(m, r)) - 1.0) < 1e-8);
  // The potential itself tracks -1/(4 pi r) without a shift.
  const double p = potential_at_radius(m, s.phi_vertex, 1.5);
  CHECK(std::abs(p + 1.0 / (4.0 * M_PI * 1.5)) < 0.05 / (4.0 * M_PI * 1.5));
}

TEST_CASE("reconstructed field approaches the inverse-square law") {
  const TetMesh& m = shell1();
  const GravitySolution s = solve_poisson(m, shell1_stars(), SourceSpec::inner_flux({1.0}), 1e-10);
  const double err = newton_field_error(m, s.R, 1.0);
  CHECK(err < 0.1);
  MESSAGE("refinement 1 relative L2 error of R: " << err);
  // Homology basis of the shell is the outward outer boundary.
  const auto hb = homology_basis_2(m);
  REQUIRE(hb.size() == 1);
  CHECK(std::abs(gaussian_flux(s.omega, hb[0]) - 1.0) < 1e-10);
  const BoundaryLayout layout = boundary_layout(m);
  CHECK(layout.components.size() == 2);
  CHECK(layout.inner.size() == 1);
  CHECK(layout.outer != layout.inner[0]);
}
