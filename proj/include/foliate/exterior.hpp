#pragma once

#include "foliate/common.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>

namespace foliate {

// Symmetric positive definite metric on a single 3-dimensional tangent space.
class TangentMetric {
 public:
  // Throws ErrorKind::metric unless g is exactly symmetric with positive
  // leading principal minors.
  explicit TangentMetric(const Mat3& g);
  static TangentMetric identity() { return TangentMetric(Mat3::Identity()); }

  const Mat3& g() const { return g_; }
  const Mat3& inverse() const { return inv_; }
  double sqrt_det() const { return sqrt_det_; }
  double inner(const Vec3& u, const Vec3& v) const { return u.dot(g_ * v); }

 private:
  Mat3 g_;
  Mat3 inv_;
  double sqrt_det_ = 1.0;
};

// Constant-coefficient k-form on R^3.
// Bases: 1 | dx, dy, dz | dy^dz, dz^dx, dx^dy | dx^dy^dz.
class KForm {
 public:
  KForm() = default;
  KForm(int degree, std::initializer_list<double> coeffs);
  static KForm zero(int degree);
  static KForm scalar(double c) { return KForm(0, {c}); }
  static KForm one_form(const Vec3& c);
  static KForm two_form(const Vec3& c);
  static KForm volume(double c) { return KForm(3, {c}); }

  int degree() const { return degree_; }
  int size() const { return size_for(degree_); }
  double operator[](int i) const { return c_[i]; }
  double& operator[](int i) { return c_[i]; }
  // Coefficients as a 3-vector; only meaningful for degree 1 and 2.
  Vec3 vec() const { return Vec3(c_[0], c_[1], c_[2]); }
  double max_abs() const;
  double norm() const;

  KForm operator+(const KForm& o) const;
  KForm operator-(const KForm& o) const;
  KForm operator*(double s) const;

  static int size_for(int degree);

 private:
  int degree_ = 0;
  std::array<double, 3> c_{0.0, 0.0, 0.0};
};

inline KForm operator*(double s, const KForm& a) { return a * s; }

KForm wedge(const KForm& a, const KForm& b);
KForm hodge_star(const TangentMetric& g, const KForm& a);
Vec3 sharp(const TangentMetric& g, const KForm& a);
KForm flat(const TangentMetric& g, const Vec3& v);
KForm interior_product(const Vec3& x, const KForm& a);
// Evaluates a k-form on k vectors (k = 1 or 2).
double evaluate(const KForm& a, const Vec3& u);
double evaluate(const KForm& a, const Vec3& u, const Vec3& v);

struct Lemma1Report {
  Vec3 X = Vec3::Zero();
  double residual_identity = 0.0;
  double residual_reconstruction = 0.0;
};

Lemma1Report lemma1_check(const TangentMetric& g, const KForm& alpha);

struct KernelSplit {
  Vec3 ker_omega;
  Vec3 ker_star;
};

// Splits v into the line ker(omega) = span(R) and the plane ker(*omega),
// orthogonally with respect to g. |omega| below 1e-14 (1 + scale) is refused.
KernelSplit pointwise_kernel_split(const TangentMetric& g, const KForm& omega, const Vec3& v,
                                   double scale = 1.0);

// Complex structure on the leaf plane: g(j u, w) = omega(u, w) / |R|.
// The rotation sense makes omega(u, j u) > 0.
Vec3 leaf_complex_structure(const TangentMetric& g, const KForm& omega, const Vec3& u,
                            double scale = 1.0);

// R = sharp(-*omega).
Vec3 field_vector(const TangentMetric& g, const KForm& omega);

struct AnalyticField {
  int degree = 0;
  std::function<KForm(const Vec3&)> eval;
  double fd_step = 1e-3;
  // Distance from p to the declared singular locus; empty when there is none.
  std::function<double(const Vec3&)> singular_distance;
};

KForm fd_exterior_derivative(const AnalyticField& f, const Vec3& p);

struct NewtonSample {
  KForm sigma;
  KForm star_sigma;
  Vec3 R;
  double phi = 0.0;
};

NewtonSample newton_oracle(double m0, const Vec3& p);

// Analytic fields used by the experiments and tests.
AnalyticField constant_field(const KForm& value);
AnalyticField coordinate_field(int axis);
AnalyticField newton_sigma_field(double m0);
AnalyticField newton_star_sigma_field(double m0);
AnalyticField newton_potential_field(double m0);

// Worst relative residuals of the pointwise identities over random SPD
// metrics and 2-forms.
struct LemmaSuiteReport {
  int trials = 0;
  double lemma1_identity = 0.0;        // alpha ^ *alpha vs g(X, X) vol
  double lemma1_reconstruction = 0.0;  // alpha vs iota_X vol
  double star_involution = 0.0;        // ** on 1- and 2-forms
  double kernel_orthogonality = 0.0;
  double kernel_reconstruction = 0.0;
  double j_square = 0.0;
  double j_isometry = 0.0;
  double j_min_positivity = 0.0;       // min omega(u, j u) / |u|^2, should be > 0
};

LemmaSuiteReport lemma_suite(int trials, std::uint64_t seed);

}  // namespace foliate
