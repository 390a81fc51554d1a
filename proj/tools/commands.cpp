#include "commands.hpp"

#include "foliate/generators.hpp"
#include "foliate/gravity.hpp"
#include "foliate/hodge.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>

namespace cli {

using namespace foliate;

namespace {

template <class T>
void take(const json& j, const char* key, T& value) {
  if (j.contains(key)) value = j.at(key).get<T>();
}

TetMesh make_mesh(const MeshConfig& m) {
  if (m.kind == "shell") {
    ShellOptions o;
    o.sphere_level = m.sphere_level;
    if (m.grading == "uniform")
      o.grading = RadialGrading::uniform;
    else if (m.grading != "geometric")
      throw Error(ErrorKind::parameter, "unknown grading '" + m.grading + "'");
    return generate_shell(m.r_inner, m.r_outer, m.refine, o);
  }
  if (m.kind == "torus") return generate_flat_torus(m.n);
  if (m.kind == "box") return generate_box(m.n, m.n, m.n);
  if (m.kind == "file") {
    if (m.file.empty()) throw Error(ErrorKind::parameter, "mesh kind 'file' needs --mesh-file");
    return load_mesh(m.file);
  }
  throw Error(ErrorKind::parameter, "unknown mesh kind '" + m.kind + "'");
}

PoissonOptions poisson_options(const RunConfig& c) {
  PoissonOptions o;
  if (c.outer == "balanced")
    o.outer = OuterBoundary::balanced;
  else if (c.outer == "zero_flux")
    o.outer = OuterBoundary::zero_flux;
  else if (c.outer == "dirichlet")
    o.outer = OuterBoundary::dirichlet;
  else
    throw Error(ErrorKind::parameter, "unknown outer boundary '" + c.outer + "'");
  if (c.stencil == "tet")
    o.reconstruction.stencil = ReconstructionStencil::tet;
  else if (c.stencil != "face_patch")
    throw Error(ErrorKind::parameter, "unknown stencil '" + c.stencil + "'");
  return o;
}

SourceSpec make_source(const RunConfig& c, const TetMesh& mesh) {
  if (c.source.mode == "boundary_flux") return SourceSpec::inner_flux(c.source.masses);
  if (c.source.mode != "density") throw Error(ErrorKind::parameter, "unknown source mode '" + c.source.mode + "'");
  double radius = c.source.density_radius;
  if (radius <= 0.0) {
    const auto radii = layer_radii(mesh);
    if (radii.size() < 2) throw Error(ErrorKind::parameter, "density mode needs --density-radius on this mesh");
    radius = radii.front() + (radii.back() - radii.front()) / 3.0;
  }
  Cochain d;
  d.degree = 0;
  d.complex = Complex::dual;
  d.values = Eigen::VectorXd::Zero(mesh.num_tets());
  double volume = 0.0;
  for (int t = 0; t < mesh.num_tets(); ++t)
    if (mesh.tet_centroid(t).norm() < radius) {
      d.values[t] = mesh.tet_volume(t);
      volume += mesh.tet_volume(t);
    }
  if (volume <= 0.0) throw Error(ErrorKind::parameter, "density support is empty");
  d.values *= c.source.density_mass / volume;
  return SourceSpec::from_density(d);
}

json vec_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json solve_json(const SolveReport& r) {
  return {{"converged", r.converged}, {"iterations", r.iterations}, {"relative_residual", r.relative_residual}};
}

json mesh_json(const TetMesh& mesh) {
  return {{"vertices", mesh.num_vertices()}, {"edges", mesh.num_edges()}, {"faces", mesh.num_faces()},
          {"tets", mesh.num_tets()}, {"euler_characteristic", mesh.euler_characteristic()},
          {"boundary_components", mesh.boundary_components().size()}};
}

void add_warnings(json& report, const std::vector<std::string>& w) {
  for (const auto& s : w) report["warnings"].push_back(s);
}

struct Context {
  const RunConfig& config;
  json& report;
  json& results;
  int exit_code = 0;

  void require(const SolveReport& r, const char* what) {
    if (!r.converged) {
      report["warnings"].push_back(std::string(what) + " did not converge");
      exit_code = 2;
    }
  }
};

std::vector<double> fluxes_at(const TetMesh& mesh, const Cochain& omega, const std::vector<double>& radii) {
  std::vector<double> out;
  for (double r : radii) out.push_back(gaussian_flux(omega, gaussian_sphere(mesh, r)));
  return out;
}

void write_solution_vtk(const TetMesh& mesh, const GravitySolution& sol, const std::string& path) {
  Eigen::VectorXd rnorm(mesh.num_tets());
  for (int t = 0; t < mesh.num_tets(); ++t) rnorm[t] = sol.R.values[t].norm();
  write_vtk_mesh(mesh, path, {{"phi", &sol.phi.values, nullptr}, {"R_norm", &rnorm, nullptr}, {"R", nullptr, &sol.R.values}});
}

std::string expand_pattern(const std::string& pattern, int index) {
  const auto pos = pattern.find("%d");
  if (pos == std::string::npos) return pattern + "_" + std::to_string(index);
  return pattern.substr(0, pos) + std::to_string(index) + pattern.substr(pos + 2);
}

void cmd_gen_mesh(Context& ctx) {
  const TetMesh mesh = make_mesh(ctx.config.mesh);
  const HodgeStars stars = build_stars(mesh);
  ctx.results["mesh"] = mesh_json(mesh);
  json sources;
  for (int k = 0; k < 3; ++k)
    sources.push_back({{"degree", k},
                       {"circumcentric", stars[k].count(WeightSource::circumcentric)},
                       {"floored", stars[k].count(WeightSource::floored)},
                       {"barycentric", stars[k].count(WeightSource::barycentric)}});
  ctx.results["star_weights"] = sources;
  double vmin = mesh.num_tets() ? mesh.tet_volume(0) : 0.0;
  for (int t = 0; t < mesh.num_tets(); ++t) vmin = std::min(vmin, mesh.tet_volume(t));
  ctx.results["min_volume"] = vmin;
  ctx.results["total_volume"] = mesh.total_volume();
  if (!ctx.config.mesh_out.empty()) save_mesh(mesh, ctx.config.mesh_out);
}

void cmd_betti(Context& ctx) {
  const TetMesh mesh = make_mesh(ctx.config.mesh);
  const BettiNumbers b = betti_numbers(mesh);
  ctx.results["mesh"] = mesh_json(mesh);
  ctx.results["betti"] = b.b;
  ctx.results["euler_consistent"] = b.euler_consistent;
  add_warnings(ctx.report, b.warnings);
}

void cmd_harmonic(Context& ctx) {
  const TetMesh mesh = make_mesh(ctx.config.mesh);
  const DecOperators ops = build_operators(mesh);
  ctx.results["mesh"] = mesh_json(mesh);
  json per;
  std::ofstream exported;
  if (!ctx.config.export_pattern.empty()) {
    exported.open(ctx.config.export_pattern);
    if (!exported) throw Error(ErrorKind::io, "cannot open " + ctx.config.export_pattern);
  }
  const int lo = ctx.config.degree < 0 ? 0 : ctx.config.degree;
  const int hi = ctx.config.degree < 0 ? 3 : ctx.config.degree;
  if (lo > 3) throw Error(ErrorKind::degree, "degree must be 0..3");
  for (int k = lo; k <= hi; ++k) {
    const HarmonicBasis hb = harmonic_basis(mesh, ops, k, ctx.config.eig_tol);
    per.push_back({{"degree", k},
                   {"betti", hb.basis.size()},
                   {"dimension", hb.dimension},
                   {"eigenvalues", vec_json(hb.eigenvalues)},
                   {"gap_ratio", hb.gap_ratio},
                   {"d_residual", hb.d_residual},
                   {"delta_residual", hb.delta_residual},
                   {"converged", hb.converged}});
    if (!hb.converged) {
      ctx.report["warnings"].push_back("eigensolver did not converge for degree " + std::to_string(k));
      ctx.exit_code = 2;
    }
    if (exported.is_open()) export_harmonic_basis(hb, exported);
  }
  ctx.results["harmonic"] = per;
}

GravitySolution solve_configured(Context& ctx, const TetMesh& mesh, const HodgeStars& stars) {
  const SourceSpec src = make_source(ctx.config, mesh);
  GravitySolution sol = solve_poisson(mesh, stars, src, ctx.config.tol, poisson_options(ctx.config));
  ctx.require(sol.report, "Poisson solve");
  ctx.results["solve"] = solve_json(sol.report);
  ctx.results["total_mass"] = src.total_mass;
  ctx.results["imbalance"] = sol.imbalance;
  add_warnings(ctx.report, sol.warnings);
  return sol;
}

void cmd_poisson(Context& ctx) {
  const TetMesh mesh = make_mesh(ctx.config.mesh);
  const HodgeStars stars = build_stars(mesh);
  ctx.results["mesh"] = mesh_json(mesh);
  const GravitySolution sol = solve_configured(ctx, mesh, stars);
  ctx.results["phi_range"] = {sol.phi.values.minCoeff(), sol.phi.values.maxCoeff()};
  if (!layer_radii(mesh).empty()) ctx.results["fluxes"] = fluxes_at(mesh, sol.omega, ctx.config.radii);
  if (!ctx.config.vtk.empty()) write_solution_vtk(mesh, sol, ctx.config.vtk);
}

void cmd_flux(Context& ctx) {
  const TetMesh mesh = make_mesh(ctx.config.mesh);
  const HodgeStars stars = build_stars(mesh);
  const GravitySolution sol = solve_configured(ctx, mesh, stars);
  ctx.results["radii"] = ctx.config.radii;
  const std::vector<double> f = fluxes_at(mesh, sol.omega, ctx.config.radii);
  ctx.results["fluxes"] = f;
  double spread = 0.0;
  for (double a : f)
    for (double b : f) spread = std::max(spread, std::abs(a - b));
  ctx.results["max_flux_spread"] = spread;
  std::vector<double> cls;
  for (const SurfaceCycle& s : homology_basis_2(mesh)) cls.push_back(gaussian_flux(sol.omega, s));
  ctx.results["de_rham_class"] = cls;
}

void cmd_newton(Context& ctx) {
  RunConfig c = ctx.config;
  c.mesh.kind = "shell";
  c.source.mode = "boundary_flux";
  c.source.masses = {c.m0};
  Context inner{c, ctx.report, ctx.results};
  const TetMesh mesh = make_mesh(c.mesh);
  const HodgeStars stars = build_stars(mesh);
  ctx.results["mesh"] = mesh_json(mesh);
  const GravitySolution sol = solve_configured(inner, mesh, stars);
  ctx.exit_code = std::max(ctx.exit_code, inner.exit_code);
  const std::vector<double> f = fluxes_at(mesh, sol.omega, c.radii);
  ctx.results["radii"] = c.radii;
  ctx.results["fluxes"] = f;
  // The flux through the middle sphere is the headline value.
  ctx.results["flux"] = gaussian_flux(sol.omega, gaussian_sphere(mesh, 0.5 * (c.mesh.r_inner + c.mesh.r_outer)));
  ctx.results["field_relative_l2_error"] = newton_field_error(mesh, sol.R, c.m0);
  json samples;
  for (double r : c.radii) {
    const double phi = potential_at_radius(mesh, sol.phi_vertex, r);
    const double phi_outer = potential_at_radius(mesh, sol.phi_vertex, c.mesh.r_outer);
    const double exact = newton_oracle(c.m0, Vec3(r, 0, 0)).phi - newton_oracle(c.m0, Vec3(c.mesh.r_outer, 0, 0)).phi;
    samples.push_back({{"radius", r}, {"potential_difference_to_outer", phi - phi_outer}, {"analytic", exact}});
  }
  ctx.results["potential"] = samples;
  if (!c.vtk.empty()) write_solution_vtk(mesh, sol, c.vtk);
}

void cmd_leaves(Context& ctx) {
  RunConfig c = ctx.config;
  Context inner{c, ctx.report, ctx.results};
  const TetMesh mesh = make_mesh(c.mesh);
  const HodgeStars stars = build_stars(mesh);
  if (c.source.mode == "boundary_flux" && c.source.masses == std::vector<double>{1.0}) c.source.masses = {c.m0};
  const GravitySolution sol = solve_configured(inner, mesh, stars);
  ctx.exit_code = std::max(ctx.exit_code, inner.exit_code);
  if (c.level_count < 1) throw Error(ErrorKind::parameter, "level count must be positive");

  const auto radii = layer_radii(mesh);
  const double lo = sol.phi_vertex.values.minCoeff(), hi = sol.phi_vertex.values.maxCoeff();
  json leaves;
  for (int i = 0; i < c.level_count; ++i) {
    const double frac = (i + 1.0) / (c.level_count + 1.0);
    double level, radius = 0.0;
    if (radii.size() >= 2) {
      radius = radii.front() + frac * (radii.back() - radii.front());
      level = potential_at_radius(mesh, sol.phi_vertex, radius);
    } else {
      level = lo + frac * (hi - lo);
    }
    const LeafMesh leaf = extract_leaf(mesh, sol.phi_vertex, level, {&sol.omega, &sol.R});
    const SymplecticArea area = symplectic_area(leaf);
    const MeanCurvature mc = mean_curvature(mesh, sol.omega, sol.R, leaf);
    json l = {{"index", i},
              {"level", leaf.level},
              {"triangles", leaf.triangles.size()},
              {"euler_characteristic", leaf.euler_characteristic()},
              {"watertight", area.watertight},
              {"symplectic_area", area.value},
              {"area_cross_check", area.cross_check},
              {"area_identity_error", area.identity_error},
              {"mean_curvature_divergence", mc.median_divergence},
              {"mean_curvature_formula", mc.median_formula},
              {"curvature_convention", mc.convention}};
    if (radius > 0.0) l["radius"] = radius;
    if (leaf.perturbed) l["note"] = leaf.note;
    if (!area.warning.empty()) ctx.report["warnings"].push_back("leaf " + std::to_string(i) + ": " + area.warning);
    if (!c.export_pattern.empty()) {
      const std::string path = expand_pattern(c.export_pattern, i);
      write_obj(leaf, path);
      l["obj"] = path;
    }
    if (!c.vtk.empty()) {
      const std::string path = expand_pattern(c.vtk, i);
      write_vtk(leaf, path, &mc);
      l["vtk"] = path;
    }
    leaves.push_back(l);
  }
  ctx.results["leaves"] = leaves;
}

void cmd_shell_theorem(Context& ctx) {
  const TetMesh mesh = make_mesh(ctx.config.mesh);
  const HodgeStars stars = build_stars(mesh);
  const ShellTheoremReport r = shell_theorem_check(mesh, stars, ctx.config.m0, ctx.config.tol, poisson_options(ctx.config));
  ctx.results["support_radius"] = r.support_radius;
  ctx.results["radii"] = r.radii;
  ctx.results["flux_point"] = r.flux_point;
  ctx.results["flux_density"] = r.flux_density;
  ctx.results["max_flux_difference"] = r.max_flux_difference;
  ctx.results["max_flux_error"] = r.max_flux_error;
  ctx.results["field_l2_difference"] = r.field_l2_difference;
  ctx.results["passed"] = r.passed;
}

void cmd_linearity(Context& ctx) {
  const TetMesh mesh = make_mesh(ctx.config.mesh);
  const HodgeStars stars = build_stars(mesh);
  const LinearityReport r = linearity_check(mesh, stars, SourceSpec::inner_flux({ctx.config.m1}),
                                            SourceSpec::inner_flux({ctx.config.m2}), ctx.config.tol,
                                            poisson_options(ctx.config));
  ctx.results["phi_deviation"] = r.phi_deviation;
  ctx.results["omega_deviation"] = r.omega_deviation;
  ctx.results["passed"] = r.passed;
}

void cmd_lemma_suite(Context& ctx) {
  const LemmaSuiteReport r = lemma_suite(ctx.config.trials, ctx.config.seed);
  ctx.results = {{"trials", r.trials},
                 {"lemma1_identity", r.lemma1_identity},
                 {"lemma1_reconstruction", r.lemma1_reconstruction},
                 {"star_involution", r.star_involution},
                 {"kernel_orthogonality", r.kernel_orthogonality},
                 {"kernel_reconstruction", r.kernel_reconstruction},
                 {"j_square", r.j_square},
                 {"j_isometry", r.j_isometry},
                 {"j_min_positivity", r.j_min_positivity}};
  const double worst = std::max({r.lemma1_identity, r.lemma1_reconstruction, r.star_involution, r.kernel_orthogonality,
                                 r.kernel_reconstruction, r.j_square, r.j_isometry});
  ctx.results["passed"] = worst <= 1e-12 && r.j_min_positivity > 0.0;
}

}  // namespace

json to_json(const RunConfig& c) {
  json mesh = {{"kind", c.mesh.kind},
               {"params",
                {{"r_inner", c.mesh.r_inner},
                 {"r_outer", c.mesh.r_outer},
                 {"refine", c.mesh.refine},
                 {"sphere_level", c.mesh.sphere_level},
                 {"grading", c.mesh.grading},
                 {"n", c.mesh.n},
                 {"file", c.mesh.file}}}};
  json source = {{"mode", c.source.mode},
                 {"masses", c.source.masses},
                 {"density_mass", c.source.density_mass},
                 {"density_radius", c.source.density_radius}};
  json outputs = json::array();
  for (const std::string* s : {&c.out, &c.mesh_out, &c.vtk, &c.export_pattern})
    if (!s->empty()) outputs.push_back(*s);
  return {{"command", c.command},
          {"mesh", mesh},
          {"source", source},
          {"tol", c.tol},
          {"eig_tol", c.eig_tol},
          {"outer", c.outer},
          {"stencil", c.stencil},
          {"degree", c.degree},
          {"radii", c.radii},
          {"level_count", c.level_count},
          {"m0", c.m0},
          {"m1", c.m1},
          {"m2", c.m2},
          {"trials", c.trials},
          {"seed", c.seed},
          {"outputs", outputs}};
}

void merge_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::parse, "config must be a JSON object");
  if (j.contains("mesh")) {
    const json& m = j.at("mesh");
    take(m, "kind", c.mesh.kind);
    const json& p = m.contains("params") ? m.at("params") : m;
    take(p, "r_inner", c.mesh.r_inner);
    take(p, "r_outer", c.mesh.r_outer);
    take(p, "refine", c.mesh.refine);
    take(p, "sphere_level", c.mesh.sphere_level);
    take(p, "grading", c.mesh.grading);
    take(p, "n", c.mesh.n);
    take(p, "file", c.mesh.file);
  }
  if (j.contains("source")) {
    const json& s = j.at("source");
    take(s, "mode", c.source.mode);
    take(s, "masses", c.source.masses);
    take(s, "density_mass", c.source.density_mass);
    take(s, "density_radius", c.source.density_radius);
  }
  take(j, "tol", c.tol);
  take(j, "eig_tol", c.eig_tol);
  take(j, "outer", c.outer);
  take(j, "stencil", c.stencil);
  take(j, "degree", c.degree);
  take(j, "radii", c.radii);
  take(j, "level_count", c.level_count);
  take(j, "m0", c.m0);
  take(j, "m1", c.m1);
  take(j, "m2", c.m2);
  take(j, "trials", c.trials);
  take(j, "seed", c.seed);
}

int run(const RunConfig& c, json& report) {
  if (!(c.tol > 0.0) || !(c.eig_tol > 0.0)) throw Error(ErrorKind::parameter, "tolerances must be positive");
  static const std::map<std::string, std::function<void(Context&)>> commands = {
      {"gen-mesh", cmd_gen_mesh},     {"betti", cmd_betti},
      {"harmonic", cmd_harmonic},     {"poisson", cmd_poisson},
      {"flux", cmd_flux},             {"leaves", cmd_leaves},
      {"newton", cmd_newton},         {"shell-theorem", cmd_shell_theorem},
      {"linearity", cmd_linearity},   {"lemma-suite", cmd_lemma_suite},
  };
  const auto it = commands.find(c.command);
  if (it == commands.end()) throw Error(ErrorKind::parameter, "unknown command '" + c.command + "'");
  report["results"] = json::object();
  Context ctx{c, report, report["results"]};
  it->second(ctx);
  return ctx.exit_code;
}

}  // namespace cli
