#pragma once

#include "foliate/exterior.hpp"
#include "foliate/mesh.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <iosfwd>

namespace foliate {

using SparseMatrix = Eigen::SparseMatrix<double>;
using IntSparseMatrix = Eigen::SparseMatrix<int, Eigen::RowMajor>;

enum class Complex { primal, dual };

// Values on oriented simplices. A dual k-cochain is indexed by the primal
// (3 - k)-simplices its dual cells are attached to.
struct Cochain {
  int degree = 0;
  Complex complex = Complex::primal;
  Eigen::VectorXd values;

  static Cochain zeros(const TetMesh& mesh, int degree, Complex complex = Complex::primal);
  int simplex_degree() const { return complex == Complex::primal ? degree : 3 - degree; }
};

// Pairing of a cochain with a chain of matching degree and complex.
double pair(const Cochain& c, const Chain& chain);

struct IncidenceOperator {
  int degree = 0;  // maps k-cochains to (k + 1)-cochains
  IntSparseMatrix matrix;
  SparseMatrix real() const;
};

IncidenceOperator coboundary(const TetMesh& mesh, int k);
Cochain apply(const IncidenceOperator& d, const Cochain& c);

enum class DualMeasure { automatic, circumcentric, barycentric };
enum class WeightSource : std::uint8_t { circumcentric, floored, barycentric };

struct StarOptions {
  DualMeasure measure = DualMeasure::automatic;
  // Circumcentric measures within this fraction of the barycentric one are
  // treated as exactly degenerate (cospherical cells) ...
  double degenerate_tolerance = 1e-8;
  // ... and replaced by this fraction of the barycentric measure.
  double degenerate_floor = 1e-2;
};

struct DiagonalStar {
  int degree = 0;
  Eigen::VectorXd weights;  // dual measure / primal measure
  std::vector<WeightSource> source;
  int count(WeightSource s) const;
};

struct HodgeStars {
  std::array<DiagonalStar, 4> star;
  const DiagonalStar& operator[](int k) const { return star.at(k); }
  Cochain apply(const Cochain& c) const;
  Cochain apply_inverse(const Cochain& c) const;
};

HodgeStars build_stars(const TetMesh& mesh, const StarOptions& options = {});

// Coboundaries and stars of one mesh, assembled once.
struct DecOperators {
  std::array<IncidenceOperator, 3> d;
  HodgeStars stars;
};

DecOperators build_operators(const TetMesh& mesh, const StarOptions& options = {});

// delta_k = star^-1 d_{k-1}^T star, the adjoint of d_{k-1} under the star
// inner products. For k = 0 this is the zero map.
SparseMatrix codifferential(const HodgeStars& stars, const IncidenceOperator& d_prev, int k);

// Hodge Laplacian d delta + delta d on k-cochains, kept in the symmetric
// form stiffness = star_k * Laplacian, so that eigenproblems read
// stiffness v = lambda mass v.
struct Laplacian {
  int degree = 0;
  SparseMatrix stiffness;
  Eigen::VectorXd mass;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

Laplacian laplacian(const DecOperators& ops, int k);

double inner_product(const HodgeStars& stars, int k, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// De Rham map by per-simplex quadrature: vertex values, edge midpoint, the
// three face edge midpoints, and the tet centroid.
Cochain integrate_form(const AnalyticField& field, const TetMesh& mesh, int k);

void export_coo(const SparseMatrix& m, std::ostream& out);
void export_coo(const IntSparseMatrix& m, std::ostream& out);

// Circumcentre of a triangle or tet given by its corners.
Vec3 circumcenter(const Vec3& a, const Vec3& b, const Vec3& c);
Vec3 circumcenter(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

}  // namespace foliate
