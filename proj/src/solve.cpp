#include "foliate/solve.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace foliate {

namespace {

using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& m) {
  if (m.cols() == 0) return m;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

void project_out(const Eigen::MatrixXd& Q, Eigen::VectorXd& v) {
  if (Q.cols() > 0) v -= Q * (Q.transpose() * v);
}

struct PcgOutcome {
  int iterations = 0;
  bool converged = false;
};

// Core loop; returns once |b - A x| <= tol |b| by the recomputed residual or
// the cap is reached.
PcgOutcome pcg(const RowSparse& A, const Eigen::VectorXd& b, const Eigen::VectorXd& inv_diag,
               const Eigen::MatrixXd& Q, double tol, int cap, Eigen::VectorXd& x) {
  PcgOutcome out;
  const double bnorm = b.norm();
  const double target = tol * bnorm;
  Eigen::VectorXd r = b - A * x;
  project_out(Q, r);
  // A few restarts guard against drift between recursive and true residual.
  for (int restart = 0; restart < 4; ++restart) {
    if (r.norm() <= target) {
      out.converged = true;
      return out;
    }
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    project_out(Q, z);
    Eigen::VectorXd p = z, Ap(b.size());
    double rz = r.dot(z);
    while (out.iterations < cap) {
      Ap.noalias() = A * p;
      const double pAp = p.dot(Ap);
      if (!(pAp > 0.0)) break;
      const double alpha = rz / pAp;
      x += alpha * p;
      r -= alpha * Ap;
      ++out.iterations;
      if (r.norm() <= 0.5 * target) break;
      z = inv_diag.cwiseProduct(r);
      project_out(Q, z);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    project_out(Q, x);
    r = b - A * x;
    project_out(Q, r);
    if (r.norm() <= target) {
      out.converged = true;
      return out;
    }
    if (out.iterations >= cap) return out;
  }
  return out;
}

}  // namespace

SolveResult solve_spsd(const SparseMatrix& A, const Eigen::VectorXd& b, double tol, const SolveOptions& options) {
  if (!(tol > 0.0)) throw Error(ErrorKind::parameter, "solver tolerance must be positive");
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || b.size() != n) throw Error(ErrorKind::validation, "system dimensions do not match");
  SolveResult res;
  res.x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.report.converged = true;
    return res;
  }

  const Eigen::MatrixXd Q = orthonormal_columns(options.kernel);
  Eigen::VectorXd rhs = b;
  if (Q.cols() > 0) {
    const double component = (Q.transpose() * b).norm() / bnorm;
    if (component > tol) {
      std::ostringstream os;
      os << "right-hand side has relative kernel component " << component << " (tolerance " << tol << ")";
      throw Error(ErrorKind::compatibility, os.str());
    }
    project_out(Q, rhs);
  }

  const RowSparse Ar(A);
  Eigen::VectorXd inv_diag(n);
  for (int i = 0; i < n; ++i) {
    const double d = Ar.coeff(i, i);
    inv_diag[i] = d > 0.0 ? 1.0 / d : 1.0;
  }
  const int cap = options.max_iterations > 0 ? options.max_iterations
                                             : static_cast<int>(std::ceil(50.0 * std::sqrt(static_cast<double>(n))));
  const PcgOutcome out = pcg(Ar, rhs, inv_diag, Q, tol, cap, res.x);

  switch (options.constraint.kind) {
    case Constraint::Kind::none:
      break;
    case Constraint::Kind::grounded: {
      const int g = options.constraint.index;
      if (g < 0 || g >= n) throw Error(ErrorKind::parameter, "grounded index out of range");
      if (Q.cols() > 0) {
        // Move along the kernel so the grounded entry vanishes.
        const Eigen::VectorXd k = options.kernel.col(0);
        if (k[g] != 0.0) res.x -= (res.x[g] / k[g]) * k;
      }
      res.x[g] = 0.0;
      break;
    }
    case Constraint::Kind::mean_zero: {
      const Eigen::VectorXd w = options.constraint.weights.size() == n ? options.constraint.weights
                                                                        : Eigen::VectorXd::Ones(n);
      res.x.array() -= w.dot(res.x) / w.sum();
      break;
    }
  }

  res.report.iterations = out.iterations;
  res.report.relative_residual = (b - A * res.x).norm() / bnorm;
  res.report.converged = out.converged && res.report.relative_residual <= tol;
  if (out.converged && !res.report.converged && Q.cols() > 0) {
    // The kernel component of b (below tol) is not reachable by any x.
    const double floor = (b - rhs).norm() / bnorm;
    res.report.converged = res.report.relative_residual <= tol + floor;
  }
  return res;
}

EigenResult smallest_eigenpairs(const SparseMatrix& K, const Eigen::VectorXd& mass, int count, double tol,
                                const EigenOptions& options) {
  const int n = static_cast<int>(K.rows());
  if (count < 1) throw Error(ErrorKind::parameter, "eigenpair count must be at least 1");
  if (K.cols() != n || mass.size() != n) throw Error(ErrorKind::validation, "eigenproblem dimensions do not match");
  if (!(mass.minCoeff() > 0.0)) throw Error(ErrorKind::validation, "mass weights must be positive");
  count = std::min(count, n);
  const int required = options.required < 0 ? count : std::min(options.required, count);

  // Symmetric form A = M^-1/2 K M^-1/2.
  const Eigen::VectorXd s = mass.cwiseSqrt().cwiseInverse();
  const SparseMatrix A = s.asDiagonal() * K * s.asDiagonal();
  double shift = options.shift > 0.0 ? options.shift : 1e-3 * A.diagonal().sum() / n;

  // (A + shift)^-1, factored when small enough, else by CG.
  SparseMatrix shifted;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  bool direct = false;
  auto set_shift = [&](double value) {
    shift = value;
    shifted = A;
    for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift;
    direct = n <= options.direct_limit;
    if (direct) {
      ldlt.compute(shifted);
      direct = ldlt.info() == Eigen::Success;
    }
  };
  set_shift(shift);
  SolveOptions inner;
  inner.max_iterations = 20 * n + 100;
  auto inverse = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    if (direct) return ldlt.solve(v);
    return solve_spsd(shifted, v, options.inner_tol, inner).x;
  };

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  auto random_vector = [&] {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
  };
  auto residual_of = [&](const Eigen::VectorXd& y, double theta) {
    const Eigen::VectorXd r = A * y - theta * y;
    // Back in the original variables: |M^1/2 r| / |M^1/2 y|.
    return mass.cwiseSqrt().cwiseProduct(r).norm() / mass.cwiseSqrt().cwiseProduct(y).norm();
  };

  EigenResult res;
  std::vector<double> theta_all;
  Eigen::MatrixXd Y(n, 0);
  std::vector<double> resid_all;

  // Stage 1: subspace iteration with locking until the required pairs meet
  // the residual bound.
  bool stage1 = true;
  if (required > 0) {
    stage1 = false;
    const int block = std::min(n, required + std::max(options.guard, 1));
    Eigen::MatrixXd B(n, block);
    for (int j = 0; j < block; ++j) B.col(j) = random_vector();
    B = orthonormal_columns(B);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(block);
    std::vector<double> resid(block, 0.0);
    int locked = 0;
    for (int it = 1; it <= options.max_iterations; ++it) {
      res.iterations = it;
      const int active = block - locked;
      Eigen::MatrixXd Z(n, active);
      for (int j = 0; j < active; ++j) Z.col(j) = inverse(B.col(locked + j));
      // Orthogonalize against the locked vectors, twice for safety.
      for (int pass = 0; pass < 2; ++pass) {
        if (locked > 0) Z -= B.leftCols(locked) * (B.leftCols(locked).transpose() * Z);
        Z = orthonormal_columns(Z);
      }
      Eigen::MatrixXd H = Z.transpose() * (A * Z);
      H = 0.5 * (H + H.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(H);
      B.rightCols(active) = Z * ritz.eigenvectors();
      theta.tail(active) = ritz.eigenvalues();
      for (int j = 0; j < block; ++j) resid[j] = residual_of(B.col(j), theta[j]);
      // The convergence factor is (lambda_j + shift) / (lambda_next + shift),
      // so a default shift above the first nonzero eigenvalue crawls. Once
      // the Ritz values settle roughly, pull it under the unrequired ones.
      if (options.shift <= 0.0 && it % 5 == 0 && required < block) {
        const double target = 1e-2 * theta[required];
        if (target > 0.0 && target < 0.1 * shift) set_shift(target);
      }
      int lead = 0;
      while (lead < required && resid[lead] <= tol) ++lead;
      locked = std::max(locked, std::min(lead, block - 1));
      if (lead >= required) {
        stage1 = true;
        break;
      }
    }
    // Ritz values in the locked part may be slightly out of order.
    std::vector<int> order(block);
    for (int j = 0; j < block; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return theta[a] < theta[b]; });
    Y.resize(n, required);
    for (int j = 0; j < required; ++j) {
      Y.col(j) = B.col(order[j]);
      theta_all.push_back(theta[order[j]]);
      resid_all.push_back(resid[order[j]]);
    }
  }

  // Stage 2: the remaining pairs only feed gap estimates. Shift-invert
  // Lanczos with full reorthogonalization, deflated against stage 1, finds
  // the bottom of the rest of the spectrum even inside degenerate clusters.
  bool stage2 = true;
  const int extra = count - required;
  if (extra > 0) {
    const Eigen::MatrixXd Yo = orthonormal_columns(Y);
    const int max_steps = std::min(n - static_cast<int>(Y.cols()), options.lanczos_steps);
    Eigen::MatrixXd Q(n, max_steps);
    std::vector<double> alpha, beta;
    Eigen::VectorXd q = random_vector();
    project_out(Yo, q);
    q.normalize();
    Eigen::VectorXd mu_best;
    Eigen::MatrixXd S_best;
    int steps = 0;
    stage2 = false;
    for (int m = 0; m < max_steps; ++m) {
      Q.col(m) = q;
      Eigen::VectorXd w = inverse(q);
      for (int pass = 0; pass < 2; ++pass) {
        project_out(Yo, w);
        if (pass == 0) alpha.push_back(q.dot(w));
        w -= Q.leftCols(m + 1) * (Q.leftCols(m + 1).transpose() * w);
      }
      steps = m + 1;
      const double b = w.norm();
      const bool exhausted = b <= 1e-14 * std::abs(alpha.back());
      if (steps >= extra && (steps % 5 == 0 || exhausted || steps == max_steps)) {
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
        for (int i = 0; i < steps; ++i) {
          T(i, i) = alpha[i];
          if (i + 1 < steps) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri(T);
        mu_best = tri.eigenvalues();
        S_best = tri.eigenvectors();
        // Largest mu of the inverse are the smallest lambda.
        bool done = true;
        for (int i = 0; i < extra; ++i) {
          const int c = steps - 1 - i;
          if (std::abs(b * S_best(steps - 1, c)) > options.settle_tol * std::abs(mu_best[c])) done = false;
        }
        if (done || exhausted) {
          stage2 = true;
          break;
        }
      }
      if (exhausted) break;
      beta.push_back(b);
      q = w / b;
    }
    res.iterations += steps;
    for (int i = 0; i < extra && i < mu_best.size(); ++i) {
      const int c = static_cast<int>(mu_best.size()) - 1 - i;
      Eigen::VectorXd y = Q.leftCols(steps) * S_best.col(c);
      y.normalize();
      const double theta = y.dot(A * y);
      Y.conservativeResize(n, Y.cols() + 1);
      Y.col(Y.cols() - 1) = y;
      theta_all.push_back(theta);
      resid_all.push_back(residual_of(y, theta));
    }
  }

  const int got = static_cast<int>(theta_all.size());
  res.values.resize(got);
  for (int j = 0; j < got; ++j) {
    res.values[j] = theta_all[j];
    res.vectors.push_back(s.cwiseProduct(Y.col(j)));
    res.residuals.push_back(resid_all[j]);
  }
  res.converged = stage1 && stage2 && got == count;
  for (int j = 0; j < required && j < got; ++j)
    if (res.residuals[j] > tol) res.converged = false;
  return res;
}

}  // namespace foliate
