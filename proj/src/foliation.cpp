#include "foliate/foliation.hpp"

#include "foliate/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace foliate {

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double hi = values[mid];
  if (values.size() % 2) return hi;
  return 0.5 * (hi + *std::max_element(values.begin(), values.begin() + mid));
}

namespace {

Vec3 least_squares_proxy(const TetMesh& mesh, const Cochain& omega, const int* faces, int count) {
  Mat3 normal = Mat3::Zero();
  Vec3 rhs = Vec3::Zero();
  for (int i = 0; i < count; ++i) {
    const Vec3 n = mesh.face_vector_area(faces[i]);
    normal += n * n.transpose();
    rhs += n * omega.values[faces[i]];
  }
  return normal.ldlt().solve(rhs);
}

}  // namespace

Reconstruction reconstruct_R(const TetMesh& mesh, const HodgeStars* stars, const Cochain& omega,
                             const ReconstructionOptions& options) {
  if (omega.degree != 2 || omega.complex != Complex::primal || omega.values.size() != mesh.num_faces())
    throw Error(ErrorKind::degree, "reconstruction expects a primal 2-cochain");
  const int nt = mesh.num_tets();
  Reconstruction rec;
  rec.R.values.resize(nt);
  rec.omega_proxy.values.resize(nt);
  rec.fit_residual.resize(nt);
  const TangentMetric flat = TangentMetric::identity();

  parallel_for(nt, [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      const auto& own = mesh.tet_faces(t);
      const Vec3 b_tet = least_squares_proxy(mesh, omega, own.data(), 4);
      double scale = 0.0, worst = 0.0;
      for (int f : own) {
        scale = std::max(scale, std::abs(omega.values[f]));
        worst = std::max(worst, std::abs(mesh.face_vector_area(f).dot(b_tet) - omega.values[f]));
      }
      rec.fit_residual[t] = scale > 0.0 ? worst / scale : 0.0;

      Vec3 b = b_tet;
      if (options.stencil == ReconstructionStencil::face_patch) {
        std::array<int, 16> patch;
        int count = 0;
        auto add = [&](int f) {
          if (std::find(patch.begin(), patch.begin() + count, f) == patch.begin() + count) patch[count++] = f;
        };
        for (int f : own) {
          add(f);
          for (int nb : mesh.face_tets(f))
            if (nb >= 0 && nb != t)
              for (int g : mesh.tet_faces(nb)) add(g);
        }
        b = least_squares_proxy(mesh, omega, patch.data(), count);
      }
      rec.omega_proxy.values[t] = b;
      rec.R.values[t] = sharp(flat, hodge_star(flat, KForm::two_form(b)) * -1.0);
    }
  });

  for (int t = 0; t < nt; ++t)
    if (rec.fit_residual[t] > options.warn_fraction) rec.flagged_tets.push_back(t);
  if (!rec.flagged_tets.empty())
    rec.warnings.push_back(std::to_string(rec.flagged_tets.size()) +
                           " tet(s) with four-face fit residual above the warning fraction");

  const double scale = omega.values.cwiseAbs().maxCoeff();
  if (scale > 0.0) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(nt);
    for (int t = 0; t < nt; ++t)
      for (int i = 0; i < 4; ++i) d[t] += mesh.tet_face_signs(t)[i] * omega.values[mesh.tet_faces(t)[i]];
    rec.closedness = d.cwiseAbs().maxCoeff() / scale;
    if (rec.closedness > 1e-6) rec.warnings.push_back("2-cochain is not closed to 1e-6");
    if (stars) {
      const Eigen::VectorXd dual = (*stars)[2].weights.cwiseProduct(omega.values);
      Eigen::VectorXd div = Eigen::VectorXd::Zero(mesh.num_edges());
      Eigen::VectorXd mag = Eigen::VectorXd::Zero(mesh.num_edges());
      for (int f = 0; f < mesh.num_faces(); ++f)
        for (int i = 0; i < 3; ++i) {
          const int e = mesh.face_edges(f)[i];
          div[e] += mesh.face_edge_signs(f)[i] * dual[f];
          mag[e] += std::abs(dual[f]);
        }
      // Edges touching the boundary carry incomplete dual cells.
      std::vector<char> on_boundary(mesh.num_edges(), 0);
      for (int f : mesh.boundary_faces())
        for (int e : mesh.face_edges(f)) on_boundary[e] = 1;
      double worst = 0.0, magmax = 0.0;
      for (int e = 0; e < mesh.num_edges(); ++e) {
        magmax = std::max(magmax, mag[e]);
        if (!on_boundary[e]) worst = std::max(worst, std::abs(div[e]));
      }
      rec.coclosedness = magmax > 0.0 ? worst / magmax : 0.0;
      if (rec.coclosedness > 1e-6) rec.warnings.push_back("2-cochain is not coclosed to 1e-6");
    }
  }
  return rec;
}

int LeafMesh::euler_characteristic() const {
  std::map<std::pair<int, int>, int> edges;
  for (const auto& t : triangles)
    for (int i = 0; i < 3; ++i) {
      int a = t[i], b = t[(i + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edges[{a, b}];
    }
  return static_cast<int>(vertices.size()) - static_cast<int>(edges.size()) + static_cast<int>(triangles.size());
}

bool LeafMesh::watertight() const {
  // Every undirected edge used exactly twice, once in each direction.
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : triangles)
    for (int i = 0; i < 3; ++i) ++directed[{t[i], t[(i + 1) % 3]}];
  for (const auto& [e, n] : directed) {
    if (n != 1) return false;
    auto back = directed.find({e.second, e.first});
    if (back == directed.end() || back->second != 1) return false;
  }
  return !triangles.empty();
}

LeafMesh extract_leaf(const TetMesh& mesh, const Cochain& phi, double level, const LeafFields& fields) {
  if (phi.degree != 0 || phi.complex != Complex::primal || phi.values.size() != mesh.num_vertices())
    throw Error(ErrorKind::degree, "leaf extraction expects a vertex potential");
  const double lo = phi.values.minCoeff(), hi = phi.values.maxCoeff();
  const double range = hi - lo;
  if (!(range > 0.0)) throw Error(ErrorKind::parameter, "potential is constant");
  if (!(level > lo && level < hi)) throw Error(ErrorKind::parameter, "level outside the potential's range");

  LeafMesh leaf;
  for (int attempt = 0; attempt < 8; ++attempt) {
    bool hit = false;
    for (int v = 0; v < phi.values.size() && !hit; ++v)
      hit = std::abs(phi.values[v] - level) <= 1e-12 * range;
    if (!hit) break;
    level += 1e-10 * range;
    leaf.perturbed = true;
  }
  if (leaf.perturbed) leaf.note = "level moved by a multiple of 1e-10 of the range off a vertex value";
  leaf.level = level;

  std::unordered_map<int, int> vertex_of_edge;
  auto crossing = [&](int e) {
    auto [it, inserted] = vertex_of_edge.try_emplace(e, static_cast<int>(leaf.vertices.size()));
    if (inserted) {
      const auto p = mesh.edge_corners(e);
      const double fa = phi.values[mesh.edges()[e][0]], fb = phi.values[mesh.edges()[e][1]];
      const double s = (level - fa) / (fb - fa);
      leaf.vertices.push_back(p[0] + s * (p[1] - p[0]));
      leaf.vertex_edge.push_back(e);
    }
    return it->second;
  };
  auto local_edge = [&](int t, int a, int b) {
    static constexpr int idx[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
    return mesh.tet_edges(t)[idx[a][b]];
  };

  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto& tv = mesh.tets()[t];
    std::array<int, 4> above, below;
    int na = 0, nb = 0;
    for (int i = 0; i < 4; ++i) {
      if (phi.values[tv[i]] > level)
        above[na++] = i;
      else
        below[nb++] = i;
    }
    if (na == 0 || nb == 0) continue;

    const auto p = mesh.tet_corners(t);
    Mat3 m;
    m << (p[1] - p[0]).transpose(), (p[2] - p[0]).transpose(), (p[3] - p[0]).transpose();
    const Vec3 dphi(phi.values[tv[1]] - phi.values[tv[0]], phi.values[tv[2]] - phi.values[tv[0]],
                    phi.values[tv[3]] - phi.values[tv[0]]);
    const Vec3 grad = m.partialPivLu().solve(dphi);
    auto local_point = [&](int a, int b) {
      const double fa = phi.values[tv[a]], fb = phi.values[tv[b]];
      return Vec3(p[a] + (level - fa) / (fb - fa) * (p[b] - p[a]));
    };

    struct Corner {
      int id;
      Vec3 pos;
    };
    auto emit = [&](Corner c0, Corner c1, Corner c2) {
      Vec3 n = (c1.pos - c0.pos).cross(c2.pos - c0.pos);
      if (n.dot(grad) < 0.0) {
        std::swap(c1, c2);
        n = -n;
      }
      const double twice = n.norm();
      leaf.triangles.push_back({c0.id, c1.id, c2.id});
      leaf.host_tet.push_back(t);
      leaf.area.push_back(0.5 * twice);
      leaf.normal.push_back(twice > 0.0 ? Vec3(n / twice) : Vec3::Zero());
      // Whitney interpolation of omega in the host tet, integrated exactly
      // over the flat triangle through its centroid value.
      double pulled = std::numeric_limits<double>::quiet_NaN();
      if (fields.omega) {
        const Vec3 x = (c0.pos + c1.pos + c2.pos) / 3.0;
        Vec3 w = Vec3::Zero();
        for (int i = 0; i < 4; ++i)
          w += mesh.tet_face_signs(t)[i] * fields.omega->values[mesh.tet_faces(t)[i]] * (x - p[i]);
        w /= 3.0 * mesh.tet_volume(t);
        pulled = w.dot(0.5 * n);
      }
      leaf.pulled_omega.push_back(pulled);
      leaf.R_norm.push_back(fields.R ? fields.R->values[t].norm() : std::numeric_limits<double>::quiet_NaN());
    };
    auto corner = [&](int a, int b) { return Corner{crossing(local_edge(t, a, b)), local_point(a, b)}; };

    if (na == 1 || nb == 1) {
      const int apex = na == 1 ? above[0] : below[0];
      std::array<int, 3> others;
      for (int i = 0, c = 0; i < 4; ++i)
        if (i != apex) others[c++] = i;
      emit(corner(apex, others[0]), corner(apex, others[1]), corner(apex, others[2]));
    } else {
      const int a = above[0], b = above[1], c = below[0], d = below[1];
      const Corner ac = corner(a, c), ad = corner(a, d), bd = corner(b, d), bc = corner(b, c);
      emit(ac, ad, bd);
      emit(ac, bd, bc);
    }
  }
  if (fields.omega && fields.omega->values.size() != mesh.num_faces())
    throw Error(ErrorKind::validation, "2-cochain size mismatch");
  return leaf;
}

SymplecticArea symplectic_area(const LeafMesh& leaf) {
  SymplecticArea s;
  s.watertight = leaf.watertight();
  if (!s.watertight) s.warning = "leaf is open; value still reported";
  double mismatch = 0.0;
  for (std::size_t i = 0; i < leaf.triangles.size(); ++i) {
    s.value += leaf.pulled_omega[i];
    const double expected = leaf.area[i] * leaf.R_norm[i];
    s.cross_check += expected;
    mismatch += std::abs(leaf.pulled_omega[i] - expected);
  }
  s.identity_error = s.cross_check > 0.0 ? mismatch / s.cross_check : 0.0;
  return s;
}

MeanCurvature mean_curvature(const TetMesh& mesh, const Cochain& omega, const PiecewiseVectorField& R,
                             const LeafMesh& leaf) {
  const int nt = mesh.num_tets();
  if (static_cast<int>(R.values.size()) != nt) throw Error(ErrorKind::validation, "field size mismatch");
  double scale = 0.0;
  for (const Vec3& r : R.values) scale = std::max(scale, r.norm());
  for (int t : leaf.host_tet)
    if (!(R.values[t].norm() >= 1e-10 * scale) || scale == 0.0)
      throw Error(ErrorKind::degenerate_form, "field vanishes in host tet " + std::to_string(t));

  MeanCurvature mc;
  mc.convention = "H = +1/2 div(n), n = -R/|R| (outward on spheres around positive mass)";
  mc.tet_divergence.assign(nt, 0.0);
  mc.tet_formula.assign(nt, 0.0);

  // Divergence route: eta = omega / |R| on faces is the flux of the unit
  // normal field; its coboundary over the tet volume is div n.
  Eigen::VectorXd face_norm(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    double s = 0.0;
    int c = 0;
    for (int t : mesh.face_tets(f))
      if (t >= 0) {
        s += R.values[t].norm();
        ++c;
      }
    face_norm[f] = s / c;
  }
  // Formula route: 1/2 B . grad(1/|R|), with 1/|R| carried to vertices by
  // volume-weighted averaging.
  Eigen::VectorXd inv_norm = Eigen::VectorXd::Zero(mesh.num_vertices());
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (int t = 0; t < nt; ++t) {
    const double rn = R.values[t].norm();
    if (rn == 0.0) continue;
    for (int v : mesh.tets()[t]) {
      inv_norm[v] += mesh.tet_volume(t) / rn;
      weight[v] += mesh.tet_volume(t);
    }
  }
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (weight[v] > 0.0) inv_norm[v] /= weight[v];

  parallel_for(nt, [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      double flux = 0.0;
      bool ok = true;
      for (int i = 0; i < 4; ++i) {
        const int f = mesh.tet_faces(t)[i];
        if (!(face_norm[f] > 0.0)) ok = false;
        else flux += mesh.tet_face_signs(t)[i] * omega.values[f] / face_norm[f];
      }
      mc.tet_divergence[t] = ok ? 0.5 * flux / mesh.tet_volume(t) : 0.0;

      const auto p = mesh.tet_corners(t);
      const auto& tv = mesh.tets()[t];
      Mat3 m;
      m << (p[1] - p[0]).transpose(), (p[2] - p[0]).transpose(), (p[3] - p[0]).transpose();
      const Vec3 df(inv_norm[tv[1]] - inv_norm[tv[0]], inv_norm[tv[2]] - inv_norm[tv[0]],
                    inv_norm[tv[3]] - inv_norm[tv[0]]);
      const Vec3 grad = m.partialPivLu().solve(df);
      mc.tet_formula[t] = 0.5 * grad.dot(-R.values[t]);
    }
  });

  const int nv = static_cast<int>(leaf.vertices.size());
  mc.vertex_divergence.assign(nv, 0.0);
  mc.vertex_formula.assign(nv, 0.0);
  std::vector<double> w(nv, 0.0);
  mc.triangle_divergence.resize(leaf.triangles.size());
  for (std::size_t i = 0; i < leaf.triangles.size(); ++i) {
    const int t = leaf.host_tet[i];
    mc.triangle_divergence[i] = mc.tet_divergence[t];
    for (int v : leaf.triangles[i]) {
      mc.vertex_divergence[v] += leaf.area[i] * mc.tet_divergence[t];
      mc.vertex_formula[v] += leaf.area[i] * mc.tet_formula[t];
      w[v] += leaf.area[i];
    }
  }
  for (int v = 0; v < nv; ++v)
    if (w[v] > 0.0) {
      mc.vertex_divergence[v] /= w[v];
      mc.vertex_formula[v] /= w[v];
    }
  mc.median_divergence = median(mc.vertex_divergence);
  mc.median_formula = median(mc.vertex_formula);
  return mc;
}

KernelParts kernel_decomposition_field(const Reconstruction& rec, const PiecewiseVectorField& v) {
  const std::size_t n = rec.omega_proxy.values.size();
  if (v.values.size() != n) throw Error(ErrorKind::validation, "field size mismatch");
  KernelParts parts;
  parts.ker_omega.values.resize(n);
  parts.ker_star.values.resize(n);
  const TangentMetric flat = TangentMetric::identity();
  double scale = 0.0;
  for (const Vec3& b : rec.omega_proxy.values) scale = std::max(scale, b.cwiseAbs().maxCoeff());
  for (std::size_t t = 0; t < n; ++t) {
    const KernelSplit s = pointwise_kernel_split(flat, KForm::two_form(rec.omega_proxy.values[t]), v.values[t], scale);
    parts.ker_omega.values[t] = s.ker_omega;
    parts.ker_star.values[t] = s.ker_star;
  }
  return parts;
}

void write_obj(const LeafMesh& leaf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path + " for writing");
  out << std::setprecision(10);
  out << "# leaf at level " << leaf.level << '\n';
  for (const Vec3& p : leaf.vertices) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const auto& t : leaf.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  if (!out) throw Error(ErrorKind::io, "failed writing " + path);
}

void write_vtk(const LeafMesh& leaf, const std::string& path, const MeanCurvature* curvature) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path + " for writing");
  out << std::setprecision(10);
  out << "# vtk DataFile Version 3.0\nleaf\nASCII\nDATASET POLYDATA\n";
  out << "POINTS " << leaf.vertices.size() << " double\n";
  for (const Vec3& p : leaf.vertices) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  out << "POLYGONS " << leaf.triangles.size() << ' ' << 4 * leaf.triangles.size() << '\n';
  for (const auto& t : leaf.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_DATA " << leaf.triangles.size() << '\n';
  auto scalars = [&](const char* name, auto value) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < leaf.triangles.size(); ++i) {
      const double v = value(i);
      out << (std::isfinite(v) ? v : 0.0) << '\n';
    }
  };
  scalars("pulled_omega", [&](std::size_t i) { return leaf.pulled_omega[i]; });
  scalars("R_norm", [&](std::size_t i) { return leaf.R_norm[i]; });
  if (curvature) scalars("mean_curvature", [&](std::size_t i) { return curvature->triangle_divergence[i]; });
  if (!out) throw Error(ErrorKind::io, "failed writing " + path);
}

void write_vtk_mesh(const TetMesh& mesh, const std::string& path, const std::vector<CellField>& fields) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path + " for writing");
  out << std::setprecision(10);
  out << "# vtk DataFile Version 3.0\nfields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  const int nt = mesh.num_tets();
  const bool periodic = mesh.periodicity().has_value();
  if (periodic) {
    out << "POINTS " << 4 * nt << " double\n";
    for (int t = 0; t < nt; ++t)
      for (const Vec3& p : mesh.tet_corners(t)) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  } else {
    out << "POINTS " << mesh.num_vertices() << " double\n";
    for (const Vec3& p : mesh.vertices()) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  }
  out << "CELLS " << nt << ' ' << 5 * nt << '\n';
  for (int t = 0; t < nt; ++t) {
    out << 4;
    for (int i = 0; i < 4; ++i) out << ' ' << (periodic ? 4 * t + i : mesh.tets()[t][i]);
    out << '\n';
  }
  out << "CELL_TYPES " << nt << '\n';
  for (int t = 0; t < nt; ++t) out << "10\n";
  out << "CELL_DATA " << nt << '\n';
  for (const CellField& f : fields) {
    if (f.scalars) {
      if (f.scalars->size() != nt) throw Error(ErrorKind::validation, "field " + f.name + " has the wrong size");
      out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (int t = 0; t < nt; ++t) out << (*f.scalars)[t] << '\n';
    }
    if (f.vectors) {
      if (static_cast<int>(f.vectors->size()) != nt)
        throw Error(ErrorKind::validation, "field " + f.name + " has the wrong size");
      out << "VECTORS " << f.name << " double\n";
      for (const Vec3& v : *f.vectors) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::io, "failed writing " + path);
}

}  // namespace foliate
