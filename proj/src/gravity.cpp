#include "foliate/gravity.hpp"

#include "foliate/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace foliate {

namespace {

constexpr double kPi = 3.14159265358979323846;

double relative_gap(const Eigen::VectorXd& sum, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double denom = std::max({sum.norm(), a.norm(), b.norm()});
  return denom > 0.0 ? (sum - a - b).norm() / denom : 0.0;
}

}  // namespace

SourceSpec SourceSpec::from_density(const Cochain& mass_per_tet) {
  SourceSpec s;
  s.mode = SourceMode::density;
  s.density = mass_per_tet;
  s.total_mass = mass_per_tet.values.sum();
  return s;
}

SourceSpec SourceSpec::inner_flux(std::vector<double> masses) {
  SourceSpec s;
  s.mode = SourceMode::boundary_flux;
  s.total_mass = std::accumulate(masses.begin(), masses.end(), 0.0);
  s.boundary_flux = std::move(masses);
  return s;
}

SourceSpec SourceSpec::zero() { return inner_flux({}); }

SourceSpec SourceSpec::add(const SourceSpec& a, const SourceSpec& b) {
  if (a.mode != b.mode) throw Error(ErrorKind::parameter, "cannot add sources of different modes");
  if (a.mode == SourceMode::density) {
    if (a.density.values.size() != b.density.values.size())
      throw Error(ErrorKind::validation, "density sizes differ");
    Cochain d = a.density;
    d.values += b.density.values;
    return from_density(d);
  }
  std::vector<double> m(std::max(a.boundary_flux.size(), b.boundary_flux.size()), 0.0);
  for (std::size_t i = 0; i < a.boundary_flux.size(); ++i) m[i] += a.boundary_flux[i];
  for (std::size_t i = 0; i < b.boundary_flux.size(); ++i) m[i] += b.boundary_flux[i];
  return inner_flux(std::move(m));
}

void SourceSpec::validate(const TetMesh& mesh) const {
  double sum = 0.0, scale = 0.0;
  if (mode == SourceMode::density) {
    if (density.degree != 0 || density.complex != Complex::dual || density.values.size() != mesh.num_tets())
      throw Error(ErrorKind::validation, "density must be a dual 0-cochain with one value per tet");
    sum = density.values.sum();
    scale = density.values.cwiseAbs().sum();
  } else {
    for (double m : boundary_flux) {
      sum += m;
      scale += std::abs(m);
    }
  }
  if (std::abs(sum - total_mass) > 1e-12 * std::max(scale, 1e-300) && std::abs(sum - total_mass) > 0.0) {
    std::ostringstream os;
    os << "source total_mass " << total_mass << " differs from the sum of its parts " << sum;
    throw Error(ErrorKind::validation, os.str());
  }
}

BoundaryLayout boundary_layout(const TetMesh& mesh) {
  BoundaryLayout layout;
  layout.components = mesh.boundary_components();
  double best = -1.0;
  for (std::size_t c = 0; c < layout.components.size(); ++c) {
    double area = 0.0;
    for (int f : layout.components[c]) area += mesh.face_area(f);
    if (area > best) {
      best = area;
      layout.outer = static_cast<int>(c);
    }
  }
  for (int c = 0; c < static_cast<int>(layout.components.size()); ++c)
    if (c != layout.outer) layout.inner.push_back(c);
  return layout;
}

GravitySolution solve_poisson(const TetMesh& mesh, const HodgeStars& stars, const SourceSpec& src, double tol,
                              const PoissonOptions& options) {
  if (!(tol > 0.0)) throw Error(ErrorKind::parameter, "tolerance must be positive");
  src.validate(mesh);
  const int nt = mesh.num_tets(), nf = mesh.num_faces();
  const Eigen::VectorXd& w = stars[2].weights;
  const BoundaryLayout layout = boundary_layout(mesh);

  if (src.mode == SourceMode::boundary_flux && src.boundary_flux.size() > layout.inner.size()) {
    std::ostringstream os;
    os << src.boundary_flux.size() << " boundary masses for " << layout.inner.size() << " inner boundary component(s)";
    throw Error(ErrorKind::validation, os.str());
  }

  // Outward flux of grad phi prescribed on boundary faces.
  Eigen::VectorXd outflux = Eigen::VectorXd::Zero(nf);
  std::vector<char> dirichlet(nf, 0);
  if (src.mode == SourceMode::boundary_flux)
    for (std::size_t i = 0; i < src.boundary_flux.size(); ++i) {
      const auto& faces = layout.components[layout.inner[i]];
      double area = 0.0;
      for (int f : faces) area += mesh.face_area(f);
      // Flux of grad phi leaving the domain into the hole is -m.
      for (int f : faces) outflux[f] = -src.boundary_flux[i] * mesh.face_area(f) / area;
    }

  GravitySolution sol;
  const double volume_mass = src.mode == SourceMode::density ? src.total_mass : 0.0;
  if (layout.outer >= 0) {
    const auto& faces = layout.components[layout.outer];
    double area = 0.0;
    for (int f : faces) area += mesh.face_area(f);
    switch (options.outer) {
      case OuterBoundary::balanced:
        for (int f : faces) outflux[f] = src.total_mass * mesh.face_area(f) / area;
        break;
      case OuterBoundary::zero_flux:
        break;
      case OuterBoundary::dirichlet:
        for (int f : faces) dirichlet[f] = 1;
        break;
    }
  }
  if (options.outer != OuterBoundary::dirichlet || layout.outer < 0) {
    double out_total = 0.0;
    for (int f : mesh.boundary_faces()) out_total += outflux[f];
    sol.imbalance = out_total - volume_mass;
    double scale = 0.0;
    if (src.mode == SourceMode::density) scale = src.density.values.cwiseAbs().sum();
    for (double m : src.boundary_flux) scale += std::abs(m);
    if (std::abs(sol.imbalance) > 1e-12 * scale) {
      std::ostringstream os;
      os << "source mass does not balance the boundary flux: imbalance " << sol.imbalance;
      throw Error(ErrorKind::compatibility, os.str());
    }
  }

  // Two-point fluxes across dual edges: sum over neighbours of
  // (phi_nb - phi_t) / w_f plus boundary outflux equals the tet's mass.
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(nt) * 5);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(nt);
  if (src.mode == SourceMode::density) b = -src.density.values;
  for (int f = 0; f < nf; ++f) {
    const auto& ft = mesh.face_tets(f);
    const double c = 1.0 / w[f];
    if (ft[0] >= 0 && ft[1] >= 0) {
      trip.emplace_back(ft[0], ft[0], c);
      trip.emplace_back(ft[1], ft[1], c);
      trip.emplace_back(ft[0], ft[1], -c);
      trip.emplace_back(ft[1], ft[0], -c);
      continue;
    }
    const int t = ft[0] >= 0 ? ft[0] : ft[1];
    if (dirichlet[f]) {
      const Vec3 x = (mesh.face_corners(f)[0] + mesh.face_corners(f)[1] + mesh.face_corners(f)[2]) / 3.0;
      const double phi_d = -src.total_mass / (4.0 * kPi * x.norm());
      trip.emplace_back(t, t, c);
      b[t] += c * phi_d;
    } else {
      b[t] += outflux[f];
    }
  }
  SparseMatrix L(nt, nt);
  L.setFromTriplets(trip.begin(), trip.end());
  // L phi = b with L the positive dual graph Laplacian: rows read
  // sum_nb (phi_t - phi_nb)/w = outflux - mass, i.e. d omega = mass.

  SolveOptions so;
  so.max_iterations = options.max_iterations;
  const bool floating = options.outer != OuterBoundary::dirichlet || layout.outer < 0;
  if (floating) {
    so.kernel = Eigen::MatrixXd::Ones(nt, 1);
    so.constraint.kind = Constraint::Kind::grounded;
    so.constraint.index = 0;
  }
  SolveResult r;
  if (floating && nt > 0) {
    // Remove the rounding-level kernel component left by the balance check.
    Eigen::VectorXd bc = b;
    bc.array() -= bc.mean();
    r = solve_spsd(L, bc, tol, so);
    r.report.relative_residual = b.norm() > 0.0 ? (b - L * r.x).norm() / b.norm() : 0.0;
  } else {
    r = solve_spsd(L, b, tol, so);
  }
  sol.report = r.report;

  sol.phi.degree = 0;
  sol.phi.complex = Complex::dual;
  sol.phi.values = r.x;

  sol.omega = Cochain::zeros(mesh, 2);
  sol.star_omega.degree = 1;
  sol.star_omega.complex = Complex::dual;
  sol.star_omega.values = Eigen::VectorXd::Zero(nf);
  for (int f = 0; f < nf; ++f) {
    const auto& ft = mesh.face_tets(f);
    if (ft[0] >= 0 && ft[1] >= 0) {
      // Dual edge runs along the canonical normal, out of ft[0] into ft[1].
      sol.star_omega.values[f] = r.x[ft[1]] - r.x[ft[0]];
      sol.omega.values[f] = sol.star_omega.values[f] / w[f];
      continue;
    }
    const int t = ft[0] >= 0 ? ft[0] : ft[1];
    const double along = ft[0] >= 0 ? 1.0 : -1.0;  // canonical normal leaves the domain
    double q = outflux[f];
    if (dirichlet[f]) {
      const Vec3 x = (mesh.face_corners(f)[0] + mesh.face_corners(f)[1] + mesh.face_corners(f)[2]) / 3.0;
      q = (-src.total_mass / (4.0 * kPi * x.norm()) - r.x[t]) / w[f];
    }
    sol.omega.values[f] = along * q;
    sol.star_omega.values[f] = w[f] * sol.omega.values[f];
  }

  sol.phi_vertex = Cochain::zeros(mesh, 0);
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (int t = 0; t < nt; ++t)
    for (int v : mesh.tets()[t]) {
      sol.phi_vertex.values[v] += mesh.tet_volume(t) * r.x[t];
      weight[v] += mesh.tet_volume(t);
    }
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (weight[v] > 0.0) sol.phi_vertex.values[v] /= weight[v];
  if (floating && mesh.num_vertices() > 0) {
    // Ground at vertex 0; the dual potential moves with it.
    const double g = sol.phi_vertex.values[0];
    sol.phi_vertex.values.array() -= g;
    sol.phi.values.array() -= g;
  }

  const Reconstruction rec = reconstruct_R(mesh, nullptr, sol.omega, options.reconstruction);
  sol.R = rec.R;
  for (const auto& m : rec.warnings)
    if (m.find("closed") == std::string::npos || src.mode == SourceMode::boundary_flux) sol.warnings.push_back(m);
  if (!sol.report.converged) sol.warnings.push_back("Poisson solve did not reach the tolerance");
  return sol;
}

double gaussian_flux(const Cochain& omega, const SurfaceCycle& surface) {
  if (omega.degree != 2 || omega.complex != Complex::primal)
    throw Error(ErrorKind::degree, "gaussian flux expects a primal 2-cochain");
  return pair(omega, surface.chain());
}

FieldAxiomReport field_axiom_check(const Cochain& star_omega, const std::vector<Chain>& cycles, double tol) {
  FieldAxiomReport rep;
  double scale = star_omega.values.size() ? star_omega.values.cwiseAbs().maxCoeff() : 0.0;
  scale = std::max(scale, 1.0);
  for (const Chain& c : cycles) {
    const double p = pair(star_omega, c);
    rep.periods.push_back(p);
    rep.max_abs = std::max(rep.max_abs, std::abs(p));
  }
  rep.satisfied = rep.max_abs <= tol * scale;
  return rep;
}

FieldAxiomReport field_axiom_check(const GravitySolution& sol, const std::vector<Chain>& cycles, double tol) {
  return field_axiom_check(sol.star_omega, cycles, tol);
}

LinearityReport linearity_check(const TetMesh& mesh, const HodgeStars& stars, const SourceSpec& src1,
                                const SourceSpec& src2, double tol, const PoissonOptions& options) {
  const GravitySolution a = solve_poisson(mesh, stars, src1, tol, options);
  const GravitySolution b = solve_poisson(mesh, stars, src2, tol, options);
  const GravitySolution s = solve_poisson(mesh, stars, SourceSpec::add(src1, src2), tol, options);
  for (const GravitySolution* g : {&a, &b, &s})
    if (!g->report.converged) throw Error(ErrorKind::convergence, "Poisson solve did not converge");
  LinearityReport rep;
  rep.phi_deviation = relative_gap(s.phi.values, a.phi.values, b.phi.values);
  rep.omega_deviation = relative_gap(s.omega.values, a.omega.values, b.omega.values);
  rep.passed = rep.phi_deviation <= 10.0 * tol && rep.omega_deviation <= 10.0 * tol;
  return rep;
}

ShellTheoremReport shell_theorem_check(const TetMesh& mesh, const HodgeStars& stars, double m0, double tol,
                                       const PoissonOptions& options) {
  const std::vector<double> radii = layer_radii(mesh);
  if (radii.size() < 4) throw Error(ErrorKind::parameter, "shell theorem check needs at least 3 radial zones");
  const double r_in = radii.front(), r_out = radii.back();
  ShellTheoremReport rep;
  rep.support_radius = r_in + (r_out - r_in) / 3.0;

  const int nt = mesh.num_tets();
  Cochain density;
  density.degree = 0;
  density.complex = Complex::dual;
  density.values = Eigen::VectorXd::Zero(nt);
  double support_volume = 0.0, support_reach = 0.0;
  for (int t = 0; t < nt; ++t)
    if (mesh.tet_centroid(t).norm() < rep.support_radius) {
      density.values[t] = mesh.tet_volume(t);
      support_volume += mesh.tet_volume(t);
      for (const Vec3& p : mesh.tet_corners(t)) support_reach = std::max(support_reach, p.norm());
    }
  if (support_volume <= 0.0) throw Error(ErrorKind::parameter, "density support is empty");
  density.values *= m0 / support_volume;

  const GravitySolution point = solve_poisson(mesh, stars, SourceSpec::inner_flux({m0}), tol, options);
  const GravitySolution spread = solve_poisson(mesh, stars, SourceSpec::from_density(density), tol, options);
  if (!point.report.converged || !spread.report.converged)
    throw Error(ErrorKind::convergence, "Poisson solve did not converge");

  for (std::size_t i = 1; i + 1 < radii.size(); ++i) {
    if (radii[i] < support_reach * (1.0 + 1e-12)) continue;
    const SurfaceCycle s = layer_surface(mesh, static_cast<int>(i));
    const double fa = gaussian_flux(point.omega, s), fb = gaussian_flux(spread.omega, s);
    rep.radii.push_back(radii[i]);
    rep.flux_point.push_back(fa);
    rep.flux_density.push_back(fb);
    rep.max_flux_difference = std::max(rep.max_flux_difference, std::abs(fa - fb));
    rep.max_flux_error = std::max({rep.max_flux_error, std::abs(fa - m0), std::abs(fb - m0)});
  }

  const double outer_third = r_in + 2.0 * (r_out - r_in) / 3.0;
  double num = 0.0, den = 0.0;
  for (int t = 0; t < nt; ++t) {
    if (mesh.tet_centroid(t).norm() <= outer_third) continue;
    num += mesh.tet_volume(t) * (point.R.values[t] - spread.R.values[t]).squaredNorm();
    den += mesh.tet_volume(t) * point.R.values[t].squaredNorm();
  }
  rep.field_l2_difference = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  rep.passed = !rep.radii.empty() && rep.max_flux_difference <= 1e-8 && rep.max_flux_error <= 1e-8 &&
               rep.field_l2_difference <= 0.05;
  return rep;
}

std::vector<SurfaceCycle> homology_basis_2(const TetMesh& mesh) {
  std::vector<SurfaceCycle> basis;
  if (torus_size(mesh) > 0) {
    for (int axis = 0; axis < 3; ++axis) {
      Chain c;
      c.degree = 2;
      for (int f = 0; f < mesh.num_faces(); ++f) {
        bool on_plane = true;
        for (int v : mesh.faces()[f]) on_plane = on_plane && mesh.vertices()[v][axis] == 0.0;
        const auto p = mesh.face_corners(f);
        on_plane = on_plane && p[1][axis] == p[0][axis] && p[2][axis] == p[0][axis];
        if (on_plane) c.coefficients[f] = mesh.face_vector_area(f)[axis] > 0.0 ? 1 : -1;
      }
      basis.emplace_back(mesh, std::move(c));
    }
    return basis;
  }
  const BoundaryLayout layout = boundary_layout(mesh);
  auto outward = [&](const std::vector<int>& faces, long sign) {
    Chain c;
    c.degree = 2;
    for (int f : faces) c.coefficients[f] = sign * (mesh.face_tets(f)[0] >= 0 ? 1 : -1);
    return SurfaceCycle(mesh, std::move(c));
  };
  if (layout.inner.size() == 1) {
    basis.push_back(outward(layout.components[layout.outer], 1));
  } else {
    // Each hole boundary, oriented away from the hole.
    for (int c : layout.inner) basis.push_back(outward(layout.components[c], -1));
  }
  return basis;
}

std::vector<double> deRham_class_of_source(const TetMesh& mesh, const HodgeStars& stars, const SourceSpec& src,
                                           double tol, const PoissonOptions& options) {
  const GravitySolution sol = solve_poisson(mesh, stars, src, tol, options);
  if (!sol.report.converged) throw Error(ErrorKind::convergence, "Poisson solve did not converge");
  std::vector<double> out;
  for (const SurfaceCycle& s : homology_basis_2(mesh)) out.push_back(gaussian_flux(sol.omega, s));
  return out;
}

double newton_field_error(const TetMesh& mesh, const PiecewiseVectorField& R, double m0,
                          const std::vector<char>& mask) {
  double num = 0.0, den = 0.0;
  for (int t = 0; t < mesh.num_tets(); ++t) {
    if (!mask.empty() && !mask[t]) continue;
    const Vec3 exact = newton_oracle(m0, mesh.tet_centroid(t)).R;
    num += mesh.tet_volume(t) * (R.values[t] - exact).squaredNorm();
    den += mesh.tet_volume(t) * exact.squaredNorm();
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

double potential_at_radius(const TetMesh& mesh, const Cochain& phi_vertex, double radius) {
  const std::vector<double> radii = layer_radii(mesh);
  if (radii.size() < 2) throw Error(ErrorKind::parameter, "mesh has no radial layers");
  // Layer radii come from vertex norms, so the boundary radii themselves may
  // sit a rounding error outside them.
  const double tol = 1e-9 * radii.back();
  if (radius < radii.front() - tol || radius > radii.back() + tol)
    throw Error(ErrorKind::parameter, "radius " + std::to_string(radius) + " lies outside the shell");
  radius = std::clamp(radius, radii.front(), radii.back());
  // Mean vertex potential per layer, then linear in r between layers.
  std::vector<double> sum(radii.size(), 0.0);
  std::vector<int> count(radii.size(), 0);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const double r = mesh.vertices()[v].norm();
    const auto it = std::lower_bound(radii.begin(), radii.end(), r - tol);
    if (it == radii.end() || std::abs(*it - r) > tol) continue;
    const auto i = it - radii.begin();
    sum[i] += phi_vertex.values[v];
    ++count[i];
  }
  std::size_t i = std::upper_bound(radii.begin(), radii.end(), radius) - radii.begin();
  i = std::clamp<std::size_t>(i, 1, radii.size() - 1);
  const double a = sum[i - 1] / count[i - 1], b = sum[i] / count[i];
  const double s = (radius - radii[i - 1]) / (radii[i] - radii[i - 1]);
  return a + s * (b - a);
}

}  // namespace foliate
