#include "foliate/generators.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>

namespace foliate {

namespace {

struct SphereMesh {
  std::vector<Vec3> points;
  std::vector<std::array<int, 3>> triangles;  // outward oriented
};

// Octahedron with each face cut into level-many halvings per edge; lattice
// points on |x|+|y|+|z| = N are projected radially onto the unit sphere.
SphereMesh octahedron_sphere(int level) {
  const int N = 1 << level;
  SphereMesh s;
  std::map<std::array<int, 3>, int> index;
  auto vertex = [&](int x, int y, int z) {
    auto [it, inserted] = index.try_emplace({x, y, z}, static_cast<int>(s.points.size()));
    if (inserted) s.points.push_back(Vec3(x, y, z).normalized());
    return it->second;
  };
  for (int sz : {1, -1})
    for (int sy : {1, -1})
      for (int sx : {1, -1}) {
        auto at = [&](int i, int j) { return vertex(sx * i, sy * j, sz * (N - i - j)); };
        auto add = [&](int a, int b, int c) {
          const Vec3 &pa = s.points[a], &pb = s.points[b], &pc = s.points[c];
          if ((pb - pa).cross(pc - pa).dot(pa + pb + pc) < 0.0) std::swap(b, c);
          s.triangles.push_back({a, b, c});
        };
        for (int i = 0; i < N; ++i)
          for (int j = 0; i + j < N; ++j) {
            add(at(i, j), at(i + 1, j), at(i, j + 1));
            if (i + j + 2 <= N) add(at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
          }
      }
  return s;
}

double signed_volume(const std::array<Vec3, 4>& p) {
  return (p[1] - p[0]).cross(p[2] - p[0]).dot(p[3] - p[0]) / 6.0;
}

// Kuhn split of an nx * ny * nz grid; wraps indices when periodic.
TetMesh kuhn_grid(int nx, int ny, int nz, const Vec3& lo, const Vec3& hi, bool periodic) {
  const int mx = periodic ? nx : nx + 1, my = periodic ? ny : ny + 1, mz = periodic ? nz : nz + 1;
  const Vec3 h((hi.x() - lo.x()) / nx, (hi.y() - lo.y()) / ny, (hi.z() - lo.z()) / nz);
  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<std::size_t>(mx) * my * mz);
  for (int k = 0; k < mz; ++k)
    for (int j = 0; j < my; ++j)
      for (int i = 0; i < mx; ++i)
        vertices.push_back(lo + Vec3(i * h.x(), j * h.y(), k * h.z()));

  const std::array<std::array<int, 3>, 6> perms{{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  std::vector<TetMesh::Tet> tets;
  Periodicity per;
  per.period = hi - lo;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (const auto& p : perms) {
          std::array<Vec3i, 4> c;
          c[0] = Vec3i(i, j, k);
          c[1] = c[0] + Vec3i::Unit(p[0]);
          c[2] = c[1] + Vec3i::Unit(p[1]);
          c[3] = c[2] + Vec3i::Unit(p[2]);
          std::array<Vec3, 4> pos;
          for (int q = 0; q < 4; ++q) pos[q] = lo + c[q].cast<double>().cwiseProduct(h);
          if (signed_volume(pos) < 0.0) std::swap(c[2], c[3]);
          TetMesh::Tet tet;
          std::array<Vec3i, 4> shifts;
          for (int q = 0; q < 4; ++q) {
            Vec3i w = c[q], s = Vec3i::Zero();
            if (periodic) {
              const Vec3i n(nx, ny, nz);
              for (int a = 0; a < 3; ++a)
                if (w[a] >= n[a]) {
                  w[a] -= n[a];
                  s[a] = 1;
                }
            }
            tet[q] = w.x() + mx * (w.y() + my * w.z());
            shifts[q] = s;
          }
          tets.push_back(tet);
          per.corner_shifts.push_back(shifts);
        }
  if (!periodic) return TetMesh(std::move(vertices), std::move(tets));
  return TetMesh(std::move(vertices), std::move(tets), std::move(per));
}

}  // namespace

int shell_sphere_level(int refinement, const ShellOptions& options) {
  return options.sphere_level >= 0 ? options.sphere_level : refinement + 2;
}

int shell_layer_count(int refinement) { return 4 << refinement; }

TetMesh generate_shell(double r_inner, double r_outer, int refinement, const ShellOptions& options) {
  if (!(r_inner > 0.0) || !(r_outer > r_inner) || !std::isfinite(r_outer))
    throw Error(ErrorKind::parameter, "shell radii must satisfy 0 < r_inner < r_outer");
  if (refinement < 0 || refinement > 6) throw Error(ErrorKind::parameter, "refinement must be in 0..6");
  const int level = shell_sphere_level(refinement, options);
  if (level > 8) throw Error(ErrorKind::parameter, "sphere level must be at most 8");

  const SphereMesh sphere = octahedron_sphere(level);
  const int ns = static_cast<int>(sphere.points.size());
  const int layers = shell_layer_count(refinement);

  std::vector<double> radii(layers + 1);
  for (int l = 0; l <= layers; ++l) {
    const double s = static_cast<double>(l) / layers;
    radii[l] = options.grading == RadialGrading::geometric ? r_inner * std::pow(r_outer / r_inner, s)
                                                           : r_inner + s * (r_outer - r_inner);
  }
  radii.front() = r_inner;
  radii.back() = r_outer;

  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<std::size_t>(ns) * (layers + 1));
  for (int l = 0; l <= layers; ++l)
    for (const Vec3& p : sphere.points) vertices.push_back(radii[l] * p);

  // Prism over triangle a < b < c: the quad diagonals always run from the
  // lower copy of the larger id to the upper copy of the smaller one, so
  // neighbouring prisms agree.
  std::vector<TetMesh::Tet> tets;
  tets.reserve(3 * sphere.triangles.size() * layers);
  for (int l = 0; l < layers; ++l) {
    const int lo = l * ns, hi = (l + 1) * ns;
    for (auto tri : sphere.triangles) {
      std::sort(tri.begin(), tri.end());
      const auto [a, b, c] = tri;
      const std::array<TetMesh::Tet, 3> split{{{lo + a, lo + b, lo + c, hi + a},
                                                {lo + b, lo + c, hi + a, hi + b},
                                                {lo + c, hi + a, hi + b, hi + c}}};
      for (auto tet : split) {
        const std::array<Vec3, 4> p{vertices[tet[0]], vertices[tet[1]], vertices[tet[2]], vertices[tet[3]]};
        if (signed_volume(p) < 0.0) std::swap(tet[2], tet[3]);
        tets.push_back(tet);
      }
    }
  }
  return TetMesh(std::move(vertices), std::move(tets));
}

TetMesh generate_flat_torus(int n) {
  if (n < 2) throw Error(ErrorKind::parameter, "torus needs at least 2 cells per axis");
  return kuhn_grid(n, n, n, Vec3::Zero(), Vec3::Ones(), true);
}

TetMesh generate_box(int nx, int ny, int nz, const Vec3& lo, const Vec3& hi) {
  if (nx < 1 || ny < 1 || nz < 1) throw Error(ErrorKind::parameter, "box needs at least one cell per axis");
  if (!((hi - lo).minCoeff() > 0.0)) throw Error(ErrorKind::parameter, "box extent must be positive");
  return kuhn_grid(nx, ny, nz, lo, hi, false);
}

TetMesh single_tet() {
  return TetMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}, {{0, 1, 2, 3}});
}

TetMesh regular_tet() {
  return TetMesh({Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)}, {{0, 1, 3, 2}});
}

namespace {

// Cluster index per vertex, or empty if the radii do not form layers.
std::vector<int> layer_index(const TetMesh& mesh, std::vector<double>& centres) {
  const auto& v = mesh.vertices();
  centres.clear();
  if (v.empty() || mesh.is_periodic()) return {};
  std::vector<std::pair<double, int>> r;
  r.reserve(v.size());
  double rmax = 0.0;
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    r.push_back({v[i].norm(), i});
    rmax = std::max(rmax, r.back().first);
  }
  std::sort(r.begin(), r.end());
  const double tol = 1e-9 * rmax;
  std::vector<int> layer(v.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i == 0 || r[i].first - r[i - 1].first > tol) centres.push_back(r[i].first);
    layer[r[i].second] = static_cast<int>(centres.size()) - 1;
  }
  if (centres.size() < 2 || centres.size() * 3 > v.size()) {
    centres.clear();
    return {};
  }
  return layer;
}

}  // namespace

std::vector<double> layer_radii(const TetMesh& mesh) {
  std::vector<double> centres;
  layer_index(mesh, centres);
  return centres;
}

SurfaceCycle layer_surface(const TetMesh& mesh, int layer) {
  std::vector<double> centres;
  const std::vector<int> idx = layer_index(mesh, centres);
  if (centres.empty()) throw Error(ErrorKind::parameter, "mesh has no spherical layers");
  if (layer <= 0 || layer >= static_cast<int>(centres.size()))
    throw Error(ErrorKind::parameter, "layer index outside the interior layers");
  Chain chain;
  chain.degree = 2;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto& fv = mesh.faces()[f];
    if (idx[fv[0]] != layer || idx[fv[1]] != layer || idx[fv[2]] != layer) continue;
    for (int t : mesh.face_tets(f)) {
      if (t < 0) continue;
      for (int i = 0; i < 4; ++i)
        if (mesh.tet_faces(t)[i] == f && idx[mesh.tets()[t][i]] < layer)
          chain.coefficients[f] = mesh.tet_face_signs(t)[i];
    }
  }
  if (chain.coefficients.empty()) throw Error(ErrorKind::parameter, "layer has no faces");
  return SurfaceCycle(mesh, std::move(chain));
}

SurfaceCycle gaussian_sphere(const TetMesh& mesh, double radius) {
  const std::vector<double> centres = layer_radii(mesh);
  if (centres.size() < 3) throw Error(ErrorKind::parameter, "mesh has no interior spherical layers");
  if (!(radius > centres.front() && radius < centres.back()))
    throw Error(ErrorKind::parameter, "radius " + std::to_string(radius) + " lies outside the shell");
  int best = 1;
  for (int l = 1; l + 1 < static_cast<int>(centres.size()); ++l)
    if (std::abs(centres[l] - radius) < std::abs(centres[best] - radius)) best = l;
  return layer_surface(mesh, best);
}

int torus_size(const TetMesh& mesh) {
  if (!mesh.is_periodic()) return 0;
  const int n = static_cast<int>(std::lround(std::cbrt(static_cast<double>(mesh.num_vertices()))));
  return (n >= 2 && n * n * n == mesh.num_vertices() && mesh.num_tets() == 6 * n * n * n) ? n : 0;
}

Chain torus_axis_cycle(const TetMesh& mesh, int axis) {
  const int n = torus_size(mesh);
  if (n == 0) throw Error(ErrorKind::parameter, "mesh is not a flat torus");
  if (axis < 0 || axis > 2) throw Error(ErrorKind::parameter, "axis must be 0, 1 or 2");
  const int stride = axis == 0 ? 1 : axis == 1 ? n : n * n;
  Chain chain;
  chain.degree = 1;
  for (int i = 0; i < n; ++i) {
    const int a = i * stride, b = ((i + 1) % n) * stride;
    const Vec3i shift = (i + 1 == n) ? Vec3i(Vec3i::Unit(axis)) : Vec3i(Vec3i::Zero());
    const auto e = mesh.find_edge(a, b, shift);
    if (!e) throw Error(ErrorKind::validation, "torus axis edge missing");
    chain.coefficients[*e] += (a < b) ? 1 : -1;
  }
  return chain;
}

namespace {

Eigen::Vector4d barycentric(const std::array<Vec3, 4>& p, const Vec3& x) {
  Mat3 m;
  m << p[1] - p[0], p[2] - p[0], p[3] - p[0];
  const Vec3 l = m.partialPivLu().solve(x - p[0]);
  return Eigen::Vector4d(1.0 - l.sum(), l[0], l[1], l[2]);
}

}  // namespace

Chain torus_dual_axis_cycle(const TetMesh& mesh, int axis) {
  if (torus_size(mesh) == 0) throw Error(ErrorKind::parameter, "mesh is not a flat torus");
  if (axis < 0 || axis > 2) throw Error(ErrorKind::parameter, "axis must be 0, 1 or 2");
  Vec3 x(0.3183098861837907, 0.2718281828459045, 0.1414213562373095);
  const Vec3 dir = Vec3::Unit(axis);
  int t = -1;
  for (int s = 0; s < mesh.num_tets() && t < 0; ++s)
    if (barycentric(mesh.tet_corners(s), x).minCoeff() > 0.0) t = s;
  if (t < 0) throw Error(ErrorKind::validation, "no tet contains the loop seed");
  const int start = t;
  Chain chain;
  chain.degree = 1;
  chain.dual = true;
  for (int steps = 0; steps < 10 * mesh.num_tets(); ++steps) {
    const auto p = mesh.tet_corners(t);
    const Eigen::Vector4d l = barycentric(p, x);
    const Eigen::Vector4d dl = barycentric(p, x + dir) - l;
    int exit = -1;
    double best = 0.0;
    for (int i = 0; i < 4; ++i)
      if (dl[i] < 0.0) {
        const double s = -l[i] / dl[i];
        if (exit < 0 || s < best) {
          best = s;
          exit = i;
        }
      }
    x += best * dir;
    const int f = mesh.tet_faces(t)[exit];
    const auto& ft = mesh.face_tets(f);
    const int next = ft[0] == t ? ft[1] : ft[0];
    chain.coefficients[f] += ft[0] == t ? 1 : -1;
    // Move the point into the frame of the next tet through a shared vertex.
    const int shared = mesh.tets()[t][(exit + 1) % 4];
    const auto q = mesh.tet_corners(next);
    for (int i = 0; i < 4; ++i)
      if (mesh.tets()[next][i] == shared) {
        const Vec3 offset = q[i] - p[(exit + 1) % 4];
        x += offset;
        break;
      }
    t = next;
    if (t == start) {
      std::erase_if(chain.coefficients, [](const auto& kv) { return kv.second == 0; });
      return chain;
    }
  }
  throw Error(ErrorKind::validation, "dual loop did not close");
}

Chain dual_loop_around_edge(const TetMesh& mesh, int edge) {
  std::vector<int> ring;
  for (int t = 0; t < mesh.num_tets(); ++t)
    for (int e : mesh.tet_edges(t))
      if (e == edge) ring.push_back(t);
  if (ring.empty()) throw Error(ErrorKind::parameter, "edge has no tets");
  auto contains_edge = [&](int f) {
    for (int e : mesh.face_edges(f))
      if (e == edge) return true;
    return false;
  };
  Chain chain;
  chain.degree = 1;
  chain.dual = true;
  int t = ring.front(), came_from = -1;
  for (std::size_t step = 0; step <= ring.size(); ++step) {
    int through = -1;
    for (int f : mesh.tet_faces(t))
      if (f != came_from && contains_edge(f)) {
        through = f;
        break;
      }
    const auto& ft = mesh.face_tets(through);
    if (ft[0] < 0 || ft[1] < 0) throw Error(ErrorKind::parameter, "edge touches the boundary");
    chain.coefficients[through] += ft[0] == t ? 1 : -1;
    t = ft[0] == t ? ft[1] : ft[0];
    came_from = through;
    if (t == ring.front()) return chain;
  }
  throw Error(ErrorKind::validation, "tets around edge do not close up");
}

Chain tets_inside(const TetMesh& mesh, double radius) {
  Chain chain;
  chain.degree = 3;
  for (int t = 0; t < mesh.num_tets(); ++t)
    if (mesh.tet_centroid(t).norm() < radius) chain.coefficients[t] = 1;
  return chain;
}

}  // namespace foliate
