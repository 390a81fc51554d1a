#pragma once

#include "foliate/dec.hpp"

#include <Eigen/Dense>

namespace foliate {

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

struct Constraint {
  enum class Kind { none, grounded, mean_zero } kind = Kind::none;
  int index = 0;             // grounded entry
  Eigen::VectorXd weights;   // mean-zero weights (star weights); empty means uniform
};

struct SolveOptions {
  Constraint constraint;
  // Known kernel of A, one vector per column (need not be normalized). The
  // right-hand side must be orthogonal to it and iterates are kept so.
  Eigen::MatrixXd kernel;
  int max_iterations = 0;  // 0 selects ceil(50 sqrt(n))
};

struct SolveResult {
  Eigen::VectorXd x;
  SolveReport report;
};

// Jacobi-preconditioned conjugate gradients on a symmetric positive
// semidefinite system. Incompatible right-hand sides throw
// ErrorKind::compatibility; hitting the cap returns converged = false.
SolveResult solve_spsd(const SparseMatrix& A, const Eigen::VectorXd& b, double tol,
                       const SolveOptions& options = {});

struct EigenOptions {
  int guard = 4;            // extra block columns beyond the required pairs
  int max_iterations = 400; // subspace sweeps for the required pairs
  // Pairs that must meet the residual bound; the rest only feed gap
  // estimates. Negative means all of them.
  int required = -1;
  // Negative starts at 1e-3 times the mean diagonal and lowers it below the
  // first unrequired Ritz value as iteration proceeds.
  double shift = -1.0;
  double inner_tol = 1e-13;
  // The shifted operator is factored directly up to this size, else CG.
  int direct_limit = 40000;
  // Lanczos for the unrequired pairs stops once the residual estimate of
  // each is below settle_tol relative to its value.
  int lanczos_steps = 200;
  double settle_tol = 1e-6;
  unsigned seed = 20240607u;
};

struct EigenResult {
  Eigen::VectorXd values;                 // ascending
  std::vector<Eigen::VectorXd> vectors;   // orthonormal in the mass inner product
  std::vector<double> residuals;          // |K v - lambda M v| / |M v|
  bool converged = false;
  int iterations = 0;
};

// Smallest eigenpairs of K v = lambda M v with M diagonal and positive:
// block shift-and-invert subspace iteration with Rayleigh-Ritz and locking
// for the required pairs, then shift-invert Lanczos deflated against them
// for the rest.
EigenResult smallest_eigenpairs(const SparseMatrix& K, const Eigen::VectorXd& mass, int count, double tol,
                                const EigenOptions& options = {});

}  // namespace foliate
