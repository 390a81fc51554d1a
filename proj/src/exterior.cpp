#include "foliate/exterior.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace foliate {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::degree: return "degree";
    case ErrorKind::metric: return "metric";
    case ErrorKind::degenerate_form: return "degenerate-form";
    case ErrorKind::tangency: return "tangency";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::mesh_quality: return "mesh-quality";
    case ErrorKind::compatibility: return "compatibility";
    case ErrorKind::cycle: return "cycle";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

TangentMetric::TangentMetric(const Mat3& g) : g_(g) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < i; ++j)
      if (g(i, j) != g(j, i)) throw Error(ErrorKind::metric, "metric is not symmetric");
  const double m1 = g(0, 0);
  const double m2 = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
  const double m3 = g.determinant();
  if (!(m1 > 0.0 && m2 > 0.0 && m3 > 0.0))
    throw Error(ErrorKind::metric, "metric is not positive definite");
  inv_ = g.inverse();
  sqrt_det_ = std::sqrt(m3);
}

int KForm::size_for(int degree) {
  switch (degree) {
    case 0: case 3: return 1;
    case 1: case 2: return 3;
    default: throw Error(ErrorKind::degree, "form degree " + std::to_string(degree) + " outside 0..3");
  }
}

KForm::KForm(int degree, std::initializer_list<double> coeffs) : degree_(degree) {
  if (static_cast<int>(coeffs.size()) != size_for(degree))
    throw Error(ErrorKind::degree, "coefficient count does not match degree");
  int i = 0;
  for (double c : coeffs) c_[i++] = c;
}

KForm KForm::zero(int degree) {
  KForm a;
  size_for(degree);
  a.degree_ = degree;
  return a;
}

KForm KForm::one_form(const Vec3& c) { return KForm(1, {c.x(), c.y(), c.z()}); }
KForm KForm::two_form(const Vec3& c) { return KForm(2, {c.x(), c.y(), c.z()}); }

double KForm::max_abs() const {
  double m = 0.0;
  for (int i = 0; i < size(); ++i) m = std::max(m, std::abs(c_[i]));
  return m;
}

double KForm::norm() const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += c_[i] * c_[i];
  return std::sqrt(s);
}

KForm KForm::operator+(const KForm& o) const {
  if (o.degree_ != degree_) throw Error(ErrorKind::degree, "adding forms of different degree");
  KForm r = *this;
  for (int i = 0; i < size(); ++i) r.c_[i] += o.c_[i];
  return r;
}

KForm KForm::operator-(const KForm& o) const { return *this + o * -1.0; }

KForm KForm::operator*(double s) const {
  KForm r = *this;
  for (int i = 0; i < size(); ++i) r.c_[i] *= s;
  return r;
}

namespace {

// Forms are expanded over the 8 increasing multi-indices, encoded as bitmasks
// of {x, y, z}. The 2-form basis element dz^dx is -1 times the sorted dx^dz.
struct Expanded {
  std::array<double, 8> c{};
};

constexpr int kMask1[3] = {0b001, 0b010, 0b100};
constexpr int kMask2[3] = {0b110, 0b101, 0b011};
constexpr double kSign2[3] = {1.0, -1.0, 1.0};

Expanded expand(const KForm& a) {
  Expanded e;
  switch (a.degree()) {
    case 0: e.c[0] = a[0]; break;
    case 1: for (int i = 0; i < 3; ++i) e.c[kMask1[i]] = a[i]; break;
    case 2: for (int i = 0; i < 3; ++i) e.c[kMask2[i]] = kSign2[i] * a[i]; break;
    case 3: e.c[0b111] = a[0]; break;
  }
  return e;
}

KForm collapse(const Expanded& e, int degree) {
  KForm r = KForm::zero(degree);
  switch (degree) {
    case 0: r[0] = e.c[0]; break;
    case 1: for (int i = 0; i < 3; ++i) r[i] = e.c[kMask1[i]]; break;
    case 2: for (int i = 0; i < 3; ++i) r[i] = kSign2[i] * e.c[kMask2[i]]; break;
    case 3: r[0] = e.c[0b111]; break;
  }
  return r;
}

// Sign of moving the sorted factors of b past those of a into sorted order.
double merge_sign(int a, int b) {
  int swaps = 0;
  for (int i = 0; i < 3; ++i)
    if (b & (1 << i))
      for (int j = i + 1; j < 3; ++j)
        if (a & (1 << j)) ++swaps;
  return (swaps % 2) ? -1.0 : 1.0;
}

}  // namespace

KForm wedge(const KForm& a, const KForm& b) {
  const int degree = a.degree() + b.degree();
  if (degree > 3) throw Error(ErrorKind::degree, "wedge degree exceeds 3");
  const Expanded ea = expand(a), eb = expand(b);
  Expanded r;
  for (int ma = 0; ma < 8; ++ma) {
    if (ea.c[ma] == 0.0) continue;
    for (int mb = 0; mb < 8; ++mb) {
      if (eb.c[mb] == 0.0 || (ma & mb)) continue;
      r.c[ma | mb] += merge_sign(ma, mb) * ea.c[ma] * eb.c[mb];
    }
  }
  return collapse(r, degree);
}

KForm interior_product(const Vec3& x, const KForm& a) {
  if (a.degree() < 1) throw Error(ErrorKind::degree, "interior product of a 0-form");
  const Expanded ea = expand(a);
  Expanded r;
  for (int m = 0; m < 8; ++m) {
    if (ea.c[m] == 0.0) continue;
    int position = 0;
    for (int i = 0; i < 3; ++i) {
      if (!(m & (1 << i))) continue;
      const double sign = (position % 2) ? -1.0 : 1.0;
      r.c[m & ~(1 << i)] += sign * x[i] * ea.c[m];
      ++position;
    }
  }
  return collapse(r, a.degree() - 1);
}

// With the chosen bases, *dx^i and *(dual 2-form) reduce to g^{-1} and g up
// to the volume factor, which is what the defining relation
// b ^ *a = <b, a>_g vol forces.
KForm hodge_star(const TangentMetric& g, const KForm& a) {
  const double s = g.sqrt_det();
  switch (a.degree()) {
    case 0: return KForm::volume(a[0] * s);
    case 1: return KForm::two_form(s * (g.inverse() * a.vec()));
    case 2: return KForm::one_form((g.g() * a.vec()) / s);
    case 3: return KForm::scalar(a[0] / s);
  }
  throw Error(ErrorKind::degree, "bad degree");
}

Vec3 sharp(const TangentMetric& g, const KForm& a) {
  if (a.degree() != 1) throw Error(ErrorKind::degree, "sharp needs a 1-form");
  return g.inverse() * a.vec();
}

KForm flat(const TangentMetric& g, const Vec3& v) { return KForm::one_form(g.g() * v); }

double evaluate(const KForm& a, const Vec3& u) {
  if (a.degree() != 1) throw Error(ErrorKind::degree, "evaluate(u) needs a 1-form");
  return a.vec().dot(u);
}

double evaluate(const KForm& a, const Vec3& u, const Vec3& v) {
  if (a.degree() != 2) throw Error(ErrorKind::degree, "evaluate(u, v) needs a 2-form");
  return a.vec().dot(u.cross(v));
}

Lemma1Report lemma1_check(const TangentMetric& g, const KForm& alpha) {
  if (alpha.degree() != 2) throw Error(ErrorKind::degree, "lemma1_check needs a 2-form");
  Lemma1Report r;
  const KForm star_alpha = hodge_star(g, alpha);
  r.X = sharp(g, star_alpha);
  const KForm vol = hodge_star(g, KForm::scalar(1.0));
  const KForm lhs = wedge(alpha, star_alpha);
  r.residual_identity = std::abs(lhs[0] - g.inner(r.X, r.X) * vol[0]);
  r.residual_reconstruction = (alpha - interior_product(r.X, vol)).max_abs();
  return r;
}

Vec3 field_vector(const TangentMetric& g, const KForm& omega) {
  if (omega.degree() != 2) throw Error(ErrorKind::degree, "field_vector needs a 2-form");
  return sharp(g, hodge_star(g, omega) * -1.0);
}

namespace {

void require_nondegenerate(const KForm& omega, double scale) {
  if (omega.degree() != 2) throw Error(ErrorKind::degree, "expected a 2-form");
  if (omega.max_abs() < 1e-14 * (1.0 + std::abs(scale)))
    throw Error(ErrorKind::degenerate_form, "2-form vanishes at this point");
}

}  // namespace

KernelSplit pointwise_kernel_split(const TangentMetric& g, const KForm& omega, const Vec3& v,
                                   double scale) {
  require_nondegenerate(omega, scale);
  const Vec3 R = field_vector(g, omega);
  KernelSplit s;
  s.ker_omega = (g.inner(v, R) / g.inner(R, R)) * R;
  s.ker_star = v - s.ker_omega;
  return s;
}

Vec3 leaf_complex_structure(const TangentMetric& g, const KForm& omega, const Vec3& u,
                            double scale) {
  require_nondegenerate(omega, scale);
  const KForm star_omega = hodge_star(g, omega);
  const double un = std::sqrt(g.inner(u, u));
  if (std::abs(evaluate(star_omega, u)) > 1e-12 * (1.0 + star_omega.max_abs() * un))
    throw Error(ErrorKind::tangency, "vector is not tangent to the leaf");
  const Vec3 R = field_vector(g, omega);
  const double rn = std::sqrt(g.inner(R, R));
  // iota_u omega already annihilates R, so its sharp lies in the leaf plane.
  return sharp(g, interior_product(u, omega)) / rn;
}

KForm fd_exterior_derivative(const AnalyticField& f, const Vec3& p) {
  if (f.degree > 2) throw Error(ErrorKind::degree, "d of a 3-form is zero-dimensional");
  const double h = f.fd_step;
  if (!(h > 0.0)) throw Error(ErrorKind::parameter, "fd_step must be positive");
  if (f.singular_distance && f.singular_distance(p) <= 2.0 * h)
    throw Error(ErrorKind::singularity, "finite-difference stencil reaches the singular locus");
  KForm result = KForm::zero(f.degree + 1);
  for (int i = 0; i < 3; ++i) {
    Vec3 e = Vec3::Zero();
    e[i] = h;
    const KForm plus = f.eval(p + e), minus = f.eval(p - e);
    if (plus.degree() != f.degree || minus.degree() != f.degree)
      throw Error(ErrorKind::degree, "field returned the wrong degree");
    const KForm partial = (plus - minus) * (1.0 / (2.0 * h));
    Vec3 axis = Vec3::Zero();
    axis[i] = 1.0;
    result = result + wedge(KForm::one_form(axis), partial);
  }
  return result;
}

NewtonSample newton_oracle(double m0, const Vec3& p) {
  const double r = p.norm();
  if (!(r > 0.0)) throw Error(ErrorKind::singularity, "Newton field evaluated at the origin");
  const double k = m0 / (4.0 * std::numbers::pi);
  const double r3 = r * r * r;
  NewtonSample s;
  // x dy^dz - y dx^dz + z dx^dy, and -dx^dz = dz^dx.
  s.sigma = KForm::two_form(p * (k / r3));
  s.star_sigma = KForm::one_form(p * (k / r3));
  s.R = -k * p / r3;
  s.phi = -k / r;
  return s;
}

AnalyticField constant_field(const KForm& value) {
  AnalyticField f;
  f.degree = value.degree();
  f.eval = [value](const Vec3&) { return value; };
  return f;
}

AnalyticField coordinate_field(int axis) {
  AnalyticField f;
  f.degree = 0;
  f.eval = [axis](const Vec3& p) { return KForm::scalar(p[axis]); };
  return f;
}

namespace {

AnalyticField origin_singular(int degree, std::function<KForm(const Vec3&)> eval) {
  AnalyticField f;
  f.degree = degree;
  f.eval = std::move(eval);
  f.singular_distance = [](const Vec3& p) { return p.norm(); };
  return f;
}

}  // namespace

AnalyticField newton_sigma_field(double m0) {
  return origin_singular(2, [m0](const Vec3& p) { return newton_oracle(m0, p).sigma; });
}

AnalyticField newton_star_sigma_field(double m0) {
  return origin_singular(1, [m0](const Vec3& p) { return newton_oracle(m0, p).star_sigma; });
}

AnalyticField newton_potential_field(double m0) {
  return origin_singular(0, [m0](const Vec3& p) { return KForm::scalar(newton_oracle(m0, p).phi); });
}

LemmaSuiteReport lemma_suite(int trials, std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorKind::parameter, "trial count must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto random_vec = [&] { return Vec3(normal(rng), normal(rng), normal(rng)); };
  LemmaSuiteReport rep;
  rep.trials = trials;
  rep.j_min_positivity = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Mat3 a;
    for (int i = 0; i < 3; ++i) a.col(i) = random_vec();
    Mat3 m = a * a.transpose() + 0.1 * Mat3::Identity();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < i; ++j) m(i, j) = m(j, i);
    const TangentMetric g(m);
    const KForm alpha = KForm::two_form(random_vec());
    const double an = alpha.max_abs();

    const Lemma1Report l1 = lemma1_check(g, alpha);
    const double vol = g.sqrt_det();
    rep.lemma1_identity = std::max(rep.lemma1_identity, l1.residual_identity / (g.inner(l1.X, l1.X) * vol));
    rep.lemma1_reconstruction = std::max(rep.lemma1_reconstruction, l1.residual_reconstruction / an);

    const KForm beta = KForm::one_form(random_vec());
    rep.star_involution = std::max({rep.star_involution,
                                    (hodge_star(g, hodge_star(g, alpha)) - alpha).max_abs() / an,
                                    (hodge_star(g, hodge_star(g, beta)) - beta).max_abs() / beta.max_abs()});

    const Vec3 v = random_vec();
    const KernelSplit split = pointwise_kernel_split(g, alpha, v);
    const double vn = std::sqrt(g.inner(v, v));
    rep.kernel_orthogonality = std::max(rep.kernel_orthogonality, std::abs(g.inner(split.ker_omega, split.ker_star)) / (vn * vn));
    const Vec3 back = split.ker_omega + split.ker_star - v;
    rep.kernel_reconstruction = std::max(rep.kernel_reconstruction, std::sqrt(g.inner(back, back)) / vn);

    const Vec3 u = split.ker_star;
    const double un2 = g.inner(u, u);
    if (un2 < 1e-6 * vn * vn) continue;  // v almost along R; the leaf vector is too short to test
    const Vec3 ju = leaf_complex_structure(g, alpha, u);
    const Vec3 jju = leaf_complex_structure(g, alpha, ju);
    rep.j_square = std::max(rep.j_square, std::sqrt(g.inner(jju + u, jju + u) / un2));
    rep.j_isometry = std::max(rep.j_isometry, std::abs(g.inner(ju, ju) - un2) / un2);
    rep.j_min_positivity = std::min(rep.j_min_positivity, evaluate(alpha, u, ju) / un2);
  }
  return rep;
}

}  // namespace foliate
