#pragma once

#include "foliate/dec.hpp"
#include "foliate/solve.hpp"

#include <optional>
#include <string>

namespace foliate {

struct RankResult {
  int rank = 0;
  bool ill_conditioned = false;  // some singular value within 10x of the threshold
};

// Real rank with singular values below rel_threshold * largest discarded.
RankResult real_rank(const SparseMatrix& m, double rel_threshold = 1e-9);

// Ranks of d_0, d_1, d_2 by exact sparse elimination modulo 2^31 - 1,
// top degree first so pivots found in d_k clear rows of d_{k-1} that would
// reduce to zero. Equal to the real ranks for torsion-free complexes.
std::array<int, 3> incidence_ranks_mod_p(const TetMesh& mesh);

struct BettiResult {
  int value = 0;
  bool ill_conditioned = false;
  std::string warning;
};

BettiResult betti(const TetMesh& mesh, int k);

struct BettiNumbers {
  std::array<int, 4> b{};
  bool euler_consistent = false;  // alternating sum equals V - E + F - T
  std::vector<std::string> warnings;
};

BettiNumbers betti_numbers(const TetMesh& mesh);

struct HarmonicBasis {
  int degree = 0;
  std::vector<Cochain> basis;           // star-orthonormal
  // |d h| and |delta h| in star norms, divided by an estimate of the
  // operator norm of the Laplacian's square root so they are scale free.
  std::vector<double> d_residual;
  std::vector<double> delta_residual;
  Eigen::VectorXd eigenvalues;          // betti + 1 smallest
  double gap_ratio = 0.0;
  int dimension = 0;                    // eigenvalues at or below the tolerance
  bool converged = false;
};

HarmonicBasis harmonic_basis(const TetMesh& mesh, const DecOperators& ops, int k, double tol = 1e-8);

// Orthogonal projection (star inner product) onto the span of a harmonic basis.
Cochain project_harmonic(const HarmonicBasis& basis, const HodgeStars& stars, const Cochain& c);

struct HodgeDecomposition {
  Cochain exact;
  Cochain coexact;
  Cochain harmonic;
  Cochain exact_potential;    // degree k - 1 (empty for k = 0)
  Cochain coexact_potential;  // degree k + 1 (empty for k = 3)
  SolveReport exact_report;
  SolveReport coexact_report;
};

HodgeDecomposition hodge_decompose(const Cochain& c, const DecOperators& ops, double tol = 1e-12);

struct ExactnessResult {
  bool exact = false;
  std::optional<Cochain> potential;
  // Largest fundamental-cycle integral over a spanning tree, and the edge
  // closing that cycle.
  double worst_period = 0.0;
  int worst_edge = -1;
  // Periods over the axis loops when the mesh is a flat torus.
  std::vector<double> axis_periods;
};

ExactnessResult is_exact_1cochain(const TetMesh& mesh, const Cochain& c, double tol = 1e-8);

// Text export: "degree count" then each basis vector's values, one per line.
void export_harmonic_basis(const HarmonicBasis& basis, std::ostream& out);

}  // namespace foliate
