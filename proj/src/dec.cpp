#include "foliate/dec.hpp"

#include "foliate/parallel.hpp"

#include <Eigen/Dense>

#include <ostream>
#include <sstream>

namespace foliate {

namespace {

constexpr int kLocalEdges[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

int cochain_size(const TetMesh& mesh, int degree, Complex complex) {
  if (degree < 0 || degree > 3) throw Error(ErrorKind::degree, "cochain degree outside 0..3");
  return mesh.count(complex == Complex::primal ? degree : 3 - degree);
}

}  // namespace

Cochain Cochain::zeros(const TetMesh& mesh, int degree, Complex complex) {
  Cochain c;
  c.degree = degree;
  c.complex = complex;
  c.values = Eigen::VectorXd::Zero(cochain_size(mesh, degree, complex));
  return c;
}

double pair(const Cochain& c, const Chain& chain) {
  const bool dual = c.complex == Complex::dual;
  if (chain.dual != dual || chain.degree != c.degree)
    throw Error(ErrorKind::degree, "chain and cochain do not match");
  double s = 0.0;
  for (const auto& [id, w] : chain.coefficients) {
    if (id < 0 || id >= c.values.size()) throw Error(ErrorKind::validation, "chain id out of range");
    s += static_cast<double>(w) * c.values[id];
  }
  return s;
}

SparseMatrix IncidenceOperator::real() const { return SparseMatrix(matrix.cast<double>()); }

IncidenceOperator coboundary(const TetMesh& mesh, int k) {
  if (k < 0 || k > 2) throw Error(ErrorKind::degree, "coboundary degree must be 0, 1 or 2");
  std::vector<Eigen::Triplet<int>> trip;
  IncidenceOperator d;
  d.degree = k;
  if (k == 0) {
    trip.reserve(2 * static_cast<std::size_t>(mesh.num_edges()));
    for (int e = 0; e < mesh.num_edges(); ++e) {
      trip.emplace_back(e, mesh.edges()[e][0], -1);
      trip.emplace_back(e, mesh.edges()[e][1], 1);
    }
  } else if (k == 1) {
    trip.reserve(3 * static_cast<std::size_t>(mesh.num_faces()));
    for (int f = 0; f < mesh.num_faces(); ++f)
      for (int i = 0; i < 3; ++i) trip.emplace_back(f, mesh.face_edges(f)[i], mesh.face_edge_signs(f)[i]);
  } else {
    trip.reserve(4 * static_cast<std::size_t>(mesh.num_tets()));
    for (int t = 0; t < mesh.num_tets(); ++t)
      for (int i = 0; i < 4; ++i) trip.emplace_back(t, mesh.tet_faces(t)[i], mesh.tet_face_signs(t)[i]);
  }
  d.matrix.resize(mesh.count(k + 1), mesh.count(k));
  d.matrix.setFromTriplets(trip.begin(), trip.end());
  return d;
}

Cochain apply(const IncidenceOperator& d, const Cochain& c) {
  if (c.degree != d.degree || c.complex != Complex::primal)
    throw Error(ErrorKind::degree, "coboundary applied to a cochain of the wrong degree");
  Cochain r;
  r.degree = d.degree + 1;
  r.values = d.matrix.cast<double>() * c.values;
  return r;
}

Vec3 circumcenter(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 u = b - a, v = c - a;
  const Vec3 w = u.cross(v);
  return a + (u.squaredNorm() * v - v.squaredNorm() * u).cross(w) / (2.0 * w.squaredNorm());
}

Vec3 circumcenter(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  Mat3 m;
  m.row(0) = 2.0 * (b - a);
  m.row(1) = 2.0 * (c - a);
  m.row(2) = 2.0 * (d - a);
  const Vec3 rhs((b - a).squaredNorm(), (c - a).squaredNorm(), (d - a).squaredNorm());
  return a + m.partialPivLu().solve(rhs);
}

int DiagonalStar::count(WeightSource s) const {
  return static_cast<int>(std::count(source.begin(), source.end(), s));
}

Cochain HodgeStars::apply(const Cochain& c) const {
  if (c.complex != Complex::primal) throw Error(ErrorKind::degree, "star expects a primal cochain");
  Cochain r;
  r.degree = 3 - c.degree;
  r.complex = Complex::dual;
  r.values = star.at(c.degree).weights.cwiseProduct(c.values);
  return r;
}

Cochain HodgeStars::apply_inverse(const Cochain& c) const {
  if (c.complex != Complex::dual) throw Error(ErrorKind::degree, "inverse star expects a dual cochain");
  Cochain r;
  r.degree = 3 - c.degree;
  r.complex = Complex::primal;
  r.values = c.values.cwiseQuotient(star.at(r.degree).weights);
  return r;
}

HodgeStars build_stars(const TetMesh& mesh, const StarOptions& options) {
  // Dual measures: vertex volumes, edge areas, face lengths; circumcentric
  // (signed) and barycentric, accumulated tet by tet.
  std::array<Eigen::VectorXd, 3> circ, bary;
  for (int k = 0; k < 3; ++k) {
    circ[k] = Eigen::VectorXd::Zero(mesh.count(k));
    bary[k] = Eigen::VectorXd::Zero(mesh.count(k));
  }
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto p = mesh.tet_corners(t);
    const Vec3 ct = circumcenter(p[0], p[1], p[2], p[3]);
    const Vec3 bt = 0.25 * (p[0] + p[1] + p[2] + p[3]);
    const double vol = mesh.tet_volume(t);

    std::array<Vec3, 4> cf, bf;
    std::array<double, 4> h_ft;
    for (int i = 0; i < 4; ++i) {
      const Vec3 &a = p[(i + 1) % 4], &b = p[(i + 2) % 4], &c = p[(i + 3) % 4];
      cf[i] = circumcenter(a, b, c);
      bf[i] = (a + b + c) / 3.0;
      Vec3 n = (b - a).cross(c - a).normalized();
      if (n.dot(p[i] - a) < 0.0) n = -n;
      h_ft[i] = (ct - cf[i]).dot(n);
      const int f = mesh.tet_faces(t)[i];
      circ[2][f] += h_ft[i];
      bary[2][f] += (bt - bf[i]).norm();
    }

    std::array<double, 6> area_c;
    for (int le = 0; le < 6; ++le) {
      const int a = kLocalEdges[le][0], b = kLocalEdges[le][1];
      const Vec3 m = 0.5 * (p[a] + p[b]);
      const Vec3 dir = (p[b] - p[a]).normalized();
      double ac = 0.0, ab = 0.0;
      for (int opp = 0; opp < 4; ++opp) {
        if (opp == a || opp == b) continue;
        const int third = 6 - a - b - opp;  // remaining corner, on the face opposite `opp`
        Vec3 u = p[third] - m;
        u = (u - u.dot(dir) * dir).normalized();
        ac += 0.5 * (cf[opp] - m).dot(u) * h_ft[opp];
        ab += 0.5 * (bf[opp] - m).cross(bt - m).norm();
      }
      area_c[le] = ac;
      const int e = mesh.tet_edges(t)[le];
      circ[1][e] += ac;
      bary[1][e] += ab;
    }

    for (int v = 0; v < 4; ++v) {
      double vc = 0.0;
      for (int le = 0; le < 6; ++le)
        if (kLocalEdges[le][0] == v || kLocalEdges[le][1] == v)
          vc += (p[kLocalEdges[le][0]] - p[kLocalEdges[le][1]]).norm() / 6.0 * area_c[le];
      circ[0][mesh.tets()[t][v]] += vc;
      bary[0][mesh.tets()[t][v]] += 0.25 * vol;
    }
  }

  HodgeStars stars;
  for (int k = 0; k < 3; ++k) {
    DiagonalStar& s = stars.star[k];
    s.degree = k;
    const int n = mesh.count(k);
    s.weights.resize(n);
    s.source.resize(n);
    for (int i = 0; i < n; ++i) {
      const double b = bary[k][i], c = circ[k][i];
      double dual;
      WeightSource src;
      if (options.measure == DualMeasure::barycentric) {
        dual = b;
        src = WeightSource::barycentric;
      } else if (options.measure == DualMeasure::circumcentric) {
        dual = c;
        src = WeightSource::circumcentric;
      } else if (c > options.degenerate_tolerance * b) {
        dual = c;
        src = WeightSource::circumcentric;
      } else if (c >= -options.degenerate_tolerance * b) {
        dual = options.degenerate_floor * b;
        src = WeightSource::floored;
      } else {
        dual = b;
        src = WeightSource::barycentric;
      }
      const double primal = k == 0 ? 1.0 : k == 1 ? mesh.edge_length(i) : mesh.face_area(i);
      if (!(dual > 0.0)) {
        static const char* names[3] = {"vertex", "edge", "face"};
        throw Error(ErrorKind::mesh_quality, std::string("non-positive dual measure at ") + names[k] + " " +
                                                 std::to_string(i));
      }
      s.weights[i] = dual / primal;
      s.source[i] = src;
    }
  }
  DiagonalStar& s3 = stars.star[3];
  s3.degree = 3;
  s3.weights.resize(mesh.num_tets());
  s3.source.assign(mesh.num_tets(), WeightSource::circumcentric);
  for (int t = 0; t < mesh.num_tets(); ++t) s3.weights[t] = 1.0 / mesh.tet_volume(t);
  return stars;
}

DecOperators build_operators(const TetMesh& mesh, const StarOptions& options) {
  DecOperators ops;
  for (int k = 0; k < 3; ++k) ops.d[k] = coboundary(mesh, k);
  ops.stars = build_stars(mesh, options);
  return ops;
}

SparseMatrix codifferential(const HodgeStars& stars, const IncidenceOperator& d_prev, int k) {
  if (k < 0 || k > 3) throw Error(ErrorKind::degree, "codifferential degree outside 0..3");
  if (k == 0) return SparseMatrix(0, stars[0].weights.size());
  if (d_prev.degree != k - 1) throw Error(ErrorKind::degree, "codifferential needs d_{k-1}");
  const SparseMatrix dt = d_prev.real().transpose();
  return stars[k - 1].weights.cwiseInverse().asDiagonal() * dt * stars[k].weights.asDiagonal();
}

Eigen::VectorXd Laplacian::apply(const Eigen::VectorXd& x) const {
  return (stiffness * x).cwiseQuotient(mass);
}

Laplacian laplacian(const DecOperators& ops, int k) {
  if (k < 0 || k > 3) throw Error(ErrorKind::degree, "Laplacian degree outside 0..3");
  const HodgeStars& s = ops.stars;
  Laplacian L;
  L.degree = k;
  L.mass = s[k].weights;
  const int n = static_cast<int>(L.mass.size());
  SparseMatrix K(n, n);
  if (k < 3) {
    const SparseMatrix d = ops.d[k].real();
    K = SparseMatrix(d.transpose() * s[k + 1].weights.asDiagonal() * d);
  }
  if (k > 0) {
    const SparseMatrix d = ops.d[k - 1].real();
    const SparseMatrix md = L.mass.asDiagonal() * d;
    K += SparseMatrix(md * s[k - 1].weights.cwiseInverse().asDiagonal() * md.transpose());
  }
  K.prune(0.0);
  L.stiffness = K;
  return L;
}

double inner_product(const HodgeStars& stars, int k, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.dot(stars[k].weights.cwiseProduct(b));
}

namespace {

void check_singularity(const AnalyticField& field, const Vec3* points, int count, int id, const char* what) {
  if (!field.singular_distance) return;
  double scale = 0.0;
  for (int i = 0; i < count; ++i) scale = std::max(scale, points[i].norm());
  for (int i = 0; i < count; ++i)
    if (field.singular_distance(points[i]) <= 1e-12 * (1.0 + scale))
      throw Error(ErrorKind::singularity, std::string(what) + " " + std::to_string(id) +
                                              " touches the singular locus of the field");
}

KForm eval_checked(const AnalyticField& field, const Vec3& x, int degree) {
  KForm v = field.eval(x);
  if (v.degree() != degree) throw Error(ErrorKind::degree, "field returned the wrong degree");
  return v;
}

}  // namespace

Cochain integrate_form(const AnalyticField& field, const TetMesh& mesh, int k) {
  if (field.degree != k) throw Error(ErrorKind::degree, "field degree does not match k");
  Cochain c = Cochain::zeros(mesh, k);
  const int n = mesh.count(k);
  parallel_for(n, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      switch (k) {
        case 0: {
          const Vec3 p = mesh.vertices()[i];
          check_singularity(field, &p, 1, i, "vertex");
          c.values[i] = eval_checked(field, p, 0)[0];
          break;
        }
        case 1: {
          const auto p = mesh.edge_corners(i);
          const std::array<Vec3, 3> pts{p[0], p[1], 0.5 * (p[0] + p[1])};
          check_singularity(field, pts.data(), 3, i, "edge");
          c.values[i] = eval_checked(field, pts[2], 1).vec().dot(p[1] - p[0]);
          break;
        }
        case 2: {
          const auto p = mesh.face_corners(i);
          const std::array<Vec3, 6> pts{p[0], p[1], p[2], 0.5 * (p[0] + p[1]), 0.5 * (p[1] + p[2]),
                                        0.5 * (p[0] + p[2])};
          check_singularity(field, pts.data(), 6, i, "face");
          const Vec3 area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
          Vec3 mean = Vec3::Zero();
          for (int q = 3; q < 6; ++q) mean += eval_checked(field, pts[q], 2).vec();
          c.values[i] = (mean / 3.0).dot(area);
          break;
        }
        case 3: {
          const auto p = mesh.tet_corners(i);
          const std::array<Vec3, 5> pts{p[0], p[1], p[2], p[3], 0.25 * (p[0] + p[1] + p[2] + p[3])};
          check_singularity(field, pts.data(), 5, i, "tet");
          c.values[i] = eval_checked(field, pts[4], 3)[0] * mesh.tet_volume(i);
          break;
        }
      }
    }
  });
  return c;
}

void export_coo(const SparseMatrix& m, std::ostream& out) {
  std::ostringstream os;
  os.precision(17);
  for (int j = 0; j < m.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  out << os.str();
}

void export_coo(const IntSparseMatrix& m, std::ostream& out) {
  for (int i = 0; i < m.outerSize(); ++i)
    for (IntSparseMatrix::InnerIterator it(m, i); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace foliate
