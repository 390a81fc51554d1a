#pragma once

// Test-side reference computations that share no code with the library.

#include <Eigen/Dense>

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using IntMatrix = std::vector<std::vector<long long>>;

// Diagonal of the Smith normal form by unimodular row and column moves.
inline std::vector<long long> smith_diagonal(IntMatrix a) {
  const int rows = static_cast<int>(a.size());
  const int cols = rows ? static_cast<int>(a[0].size()) : 0;
  std::vector<long long> diag;
  int r = 0;
  for (int c0 = 0; r < rows && c0 < cols; ++r, ++c0) {
    // Bring the smallest nonzero entry of the trailing block to (r, c0).
    for (;;) {
      int pr = -1, pc = -1;
      for (int i = r; i < rows; ++i)
        for (int j = c0; j < cols; ++j)
          if (a[i][j] != 0 && (pr < 0 || std::llabs(a[i][j]) < std::llabs(a[pr][pc]))) pr = i, pc = j;
      if (pr < 0) return diag;
      std::swap(a[r], a[pr]);
      for (auto& row : a) std::swap(row[c0], row[pc]);
      bool clean = true;
      for (int i = r + 1; i < rows; ++i) {
        const long long q = a[i][c0] / a[r][c0];
        if (q)
          for (int j = c0; j < cols; ++j) a[i][j] -= q * a[r][j];
        if (a[i][c0]) clean = false;
      }
      for (int j = c0 + 1; j < cols; ++j) {
        const long long q = a[r][j] / a[r][c0];
        if (q)
          for (int i = r; i < rows; ++i) a[i][j] -= q * a[i][c0];
        if (a[r][j]) clean = false;
      }
      if (!clean) continue;
      // Divisibility of the remaining block.
      int bad = -1;
      for (int i = r + 1; i < rows && bad < 0; ++i)
        for (int j = c0 + 1; j < cols; ++j)
          if (a[i][j] % a[r][c0]) {
            bad = i;
            break;
          }
      if (bad < 0) break;
      for (int j = c0; j < cols; ++j) a[r][j] += a[bad][j];
    }
    diag.push_back(std::llabs(a[r][c0]));
  }
  return diag;
}

inline int rank_mod_p(IntMatrix a, long long p = 1000003) {
  const int rows = static_cast<int>(a.size());
  const int cols = rows ? static_cast<int>(a[0].size()) : 0;
  auto mod = [p](long long x) { return ((x % p) + p) % p; };
  auto inv = [&](long long x) {
    long long result = 1, base = mod(x), e = p - 2;
    while (e) {
      if (e & 1) result = result * base % p;
      base = base * base % p;
      e >>= 1;
    }
    return result;
  };
  for (auto& row : a)
    for (auto& x : row) x = mod(x);
  int rank = 0;
  for (int c = 0; c < cols && rank < rows; ++c) {
    int piv = -1;
    for (int i = rank; i < rows; ++i)
      if (a[i][c]) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(a[rank], a[piv]);
    const long long s = inv(a[rank][c]);
    for (int j = c; j < cols; ++j) a[rank][j] = a[rank][j] * s % p;
    for (int i = 0; i < rows; ++i)
      if (i != rank && a[i][c]) {
        const long long f = a[i][c];
        for (int j = c; j < cols; ++j) a[i][j] = mod(a[i][j] - f * a[rank][j]);
      }
    ++rank;
  }
  return rank;
}

template <class Sparse>
IntMatrix to_int(const Sparse& m) {
  IntMatrix out(m.rows(), std::vector<long long>(m.cols(), 0));
  for (int k = 0; k < m.outerSize(); ++k)
    for (typename Sparse::InnerIterator it(m, k); it; ++it) out[it.row()][it.col()] = static_cast<long long>(it.value());
  return out;
}

// Generalized symmetric eigenvalues of (K, diag(m)), ascending.
inline Eigen::VectorXd dense_generalized_eigenvalues(const Eigen::MatrixXd& K, const Eigen::VectorXd& m) {
  const Eigen::VectorXd s = m.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd A = s.asDiagonal() * K * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// Small deterministic generator wrapper for hand-rolled property tests.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  double normal() { return std::normal_distribution<double>()(rng); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  Eigen::Vector3d vec() { return {normal(), normal(), normal()}; }
  Eigen::VectorXd vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }
  // SPD with condition number bounded by roughly 1e3.
  Eigen::Matrix3d spd() {
    Eigen::Matrix3d a;
    for (int i = 0; i < 3; ++i) a.col(i) = vec();
    Eigen::Matrix3d g = a * a.transpose() + 0.05 * Eigen::Matrix3d::Identity();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < i; ++j) g(i, j) = g(j, i);
    return g;
  }
};

}  // namespace oracle
