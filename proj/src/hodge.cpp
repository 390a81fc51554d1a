#include "foliate/hodge.hpp"

#include "foliate/generators.hpp"

#include <Eigen/SparseQR>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <queue>

namespace foliate {

RankResult real_rank(const SparseMatrix& m, double rel_threshold) {
  RankResult r;
  if (m.rows() == 0 || m.cols() == 0 || m.nonZeros() == 0) return r;
  if (std::min(m.rows(), m.cols()) <= 800) {
    const Eigen::MatrixXd dense(m);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double thr = rel_threshold * sv[0];
    for (int i = 0; i < sv.size(); ++i) {
      if (sv[i] > thr) ++r.rank;
      if (sv[i] > 0.1 * thr && sv[i] < 10.0 * thr) r.ill_conditioned = true;
    }
    return r;
  }
  double max_col = 0.0;
  for (int j = 0; j < m.outerSize(); ++j) max_col = std::max(max_col, m.col(j).norm());
  SparseMatrix a = m;
  a.makeCompressed();
  Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr;
  const double thr = rel_threshold * max_col;
  qr.setPivotThreshold(thr);
  qr.compute(a);
  if (qr.info() != Eigen::Success) throw Error(ErrorKind::convergence, "sparse QR failed");
  r.rank = static_cast<int>(qr.rank());
  const SparseMatrix R = qr.matrixR();
  for (int i = 0; i < r.rank; ++i)
    if (std::abs(R.coeff(i, i)) < 10.0 * thr) r.ill_conditioned = true;
  return r;
}

namespace {

constexpr std::int64_t kPrime = 2147483647;  // 2^31 - 1

std::int64_t mod_inverse(std::int64_t a) {
  std::int64_t result = 1, e = kPrime - 2;
  a %= kPrime;
  while (e) {
    if (e & 1) result = result * a % kPrime;
    a = a * a % kPrime;
    e >>= 1;
  }
  return result;
}

using SparseRow = std::vector<std::pair<int, std::int64_t>>;  // sorted by column

// Column reduction of the rows of d in index order; the pivot of a reduced
// row is its largest column. Rows flagged in `skip` are known to reduce to
// zero. Returns the rank and marks pivot columns in `lows`.
int reduce_rows(const IntSparseMatrix& d, const std::vector<char>& skip, std::vector<char>& lows) {
  std::vector<SparseRow> pivots;
  std::vector<int> pivot_of(d.cols(), -1);
  lows.assign(d.cols(), 0);
  SparseRow v, w;
  for (int r = 0; r < d.rows(); ++r) {
    if (!skip.empty() && skip[r]) continue;
    v.clear();
    for (IntSparseMatrix::InnerIterator it(d, r); it; ++it)
      if (it.value() != 0) v.emplace_back(static_cast<int>(it.col()), (it.value() % kPrime + kPrime) % kPrime);
    std::sort(v.begin(), v.end());
    while (!v.empty()) {
      const int low = v.back().first;
      const int p = pivot_of[low];
      if (p < 0) {
        const std::int64_t s = mod_inverse(v.back().second);
        for (auto& e : v) e.second = e.second * s % kPrime;
        pivot_of[low] = static_cast<int>(pivots.size());
        lows[low] = 1;
        pivots.push_back(v);
        break;
      }
      // v -= v[low] * pivot (pivot normalised to 1 at low).
      const std::int64_t f = v.back().second;
      const SparseRow& q = pivots[p];
      w.clear();
      std::size_t i = 0, j = 0;
      while (i < v.size() || j < q.size()) {
        if (j == q.size() || (i < v.size() && v[i].first < q[j].first)) {
          w.push_back(v[i++]);
        } else if (i == v.size() || q[j].first < v[i].first) {
          w.emplace_back(q[j].first, (kPrime - f * q[j].second % kPrime) % kPrime);
          ++j;
        } else {
          const std::int64_t x = ((v[i].second - f * q[j].second) % kPrime + kPrime) % kPrime;
          if (x) w.emplace_back(v[i].first, x);
          ++i, ++j;
        }
      }
      v.swap(w);
    }
  }
  return static_cast<int>(pivots.size());
}

std::array<RankResult, 3> incidence_ranks(const TetMesh& mesh) {
  const std::array<int, 3> exact = incidence_ranks_mod_p(mesh);
  std::array<RankResult, 3> ranks;
  for (int k = 0; k < 3; ++k) {
    ranks[k].rank = exact[k];
    // Small matrices also go through the thresholded SVD; a disagreement
    // is reported as an ambiguous rank.
    const IncidenceOperator d = coboundary(mesh, k);
    if (std::min(d.matrix.rows(), d.matrix.cols()) <= 800) {
      ranks[k] = real_rank(d.real());
      if (ranks[k].rank != exact[k]) ranks[k].ill_conditioned = true;
    }
  }
  return ranks;
}

BettiResult betti_from(const TetMesh& mesh, const std::array<RankResult, 3>& ranks, int k) {
  BettiResult b;
  const int upper = k < 3 ? ranks[k].rank : 0;
  const int lower = k > 0 ? ranks[k - 1].rank : 0;
  b.value = mesh.count(k) - upper - lower;
  b.ill_conditioned = (k < 3 && ranks[k].ill_conditioned) || (k > 0 && ranks[k - 1].ill_conditioned);
  if (b.ill_conditioned)
    b.warning = "rank of an incidence matrix is ill-conditioned near degree " + std::to_string(k);
  return b;
}

}  // namespace

std::array<int, 3> incidence_ranks_mod_p(const TetMesh& mesh) {
  std::array<int, 3> ranks{};
  std::vector<char> skip, lows;
  for (int k = 2; k >= 0; --k) {
    ranks[k] = reduce_rows(coboundary(mesh, k).matrix, skip, lows);
    skip = lows;
  }
  return ranks;
}

BettiResult betti(const TetMesh& mesh, int k) {
  if (k < 0 || k > 3) throw Error(ErrorKind::degree, "Betti degree outside 0..3");
  return betti_from(mesh, incidence_ranks(mesh), k);
}

BettiNumbers betti_numbers(const TetMesh& mesh) {
  const auto ranks = incidence_ranks(mesh);
  BettiNumbers out;
  for (int k = 0; k < 4; ++k) {
    const BettiResult b = betti_from(mesh, ranks, k);
    out.b[k] = b.value;
    if (!b.warning.empty()) out.warnings.push_back(b.warning);
  }
  out.euler_consistent = out.b[0] - out.b[1] + out.b[2] - out.b[3] == mesh.euler_characteristic();
  if (!out.euler_consistent) out.warnings.push_back("Betti numbers disagree with the Euler characteristic");
  return out;
}

HarmonicBasis harmonic_basis(const TetMesh& mesh, const DecOperators& ops, int k, double tol) {
  HarmonicBasis hb;
  hb.degree = k;
  const int b = betti(mesh, k).value;
  const Laplacian L = laplacian(ops, k);
  EigenOptions eo;
  eo.required = b;
  const EigenResult eig = smallest_eigenpairs(L.stiffness, L.mass, b + 1, tol, eo);
  hb.eigenvalues = eig.values;
  hb.converged = eig.converged;
  for (int j = 0; j < eig.values.size(); ++j)
    if (eig.values[j] <= tol) ++hb.dimension;
  const double floor = b > 0 ? std::max(std::abs(eig.values[b - 1]), tol) : tol;
  hb.gap_ratio = b < eig.values.size() ? eig.values[b] / floor : 0.0;

  const double op_scale = std::sqrt(L.stiffness.diagonal().cwiseQuotient(L.mass).maxCoeff());
  for (int j = 0; j < b; ++j) {
    Cochain h;
    h.degree = k;
    h.values = eig.vectors[j];
    const double hn = std::sqrt(inner_product(ops.stars, k, h.values, h.values));
    double dn = 0.0, deltan = 0.0;
    if (k < 3) {
      const Eigen::VectorXd dh = ops.d[k].real() * h.values;
      dn = std::sqrt(inner_product(ops.stars, k + 1, dh, dh));
    }
    if (k > 0) {
      const Eigen::VectorXd delta = codifferential(ops.stars, ops.d[k - 1], k) * h.values;
      deltan = std::sqrt(inner_product(ops.stars, k - 1, delta, delta));
    }
    hb.d_residual.push_back(dn / (op_scale * hn));
    hb.delta_residual.push_back(deltan / (op_scale * hn));
    hb.basis.push_back(std::move(h));
  }
  return hb;
}

Cochain project_harmonic(const HarmonicBasis& basis, const HodgeStars& stars, const Cochain& c) {
  Cochain out;
  out.degree = c.degree;
  out.values = Eigen::VectorXd::Zero(c.values.size());
  for (const Cochain& h : basis.basis)
    out.values += inner_product(stars, c.degree, h.values, c.values) * h.values;
  return out;
}

HodgeDecomposition hodge_decompose(const Cochain& c, const DecOperators& ops, double tol) {
  if (c.complex != Complex::primal) throw Error(ErrorKind::degree, "decomposition expects a primal cochain");
  const int k = c.degree;
  const HodgeStars& s = ops.stars;
  HodgeDecomposition out;
  out.exact.degree = out.coexact.degree = out.harmonic.degree = k;
  out.exact.values = out.coexact.values = Eigen::VectorXd::Zero(c.values.size());
  out.exact_report.converged = out.coexact_report.converged = true;

  SolveOptions so;
  so.max_iterations = 20 * static_cast<int>(c.values.size()) + 100;
  if (k > 0) {
    // min |c - d a|: d^T *_k d a = d^T *_k c.
    const SparseMatrix d = ops.d[k - 1].real();
    const SparseMatrix A = d.transpose() * s[k].weights.asDiagonal() * d;
    const Eigen::VectorXd rhs = d.transpose() * s[k].weights.cwiseProduct(c.values);
    const SolveResult r = solve_spsd(A, rhs, tol, so);
    out.exact_report = r.report;
    out.exact_potential.degree = k - 1;
    out.exact_potential.values = r.x;
    out.exact.values = d * r.x;
  }
  if (k < 3) {
    // min |c - delta b| with beta = *_{k+1} b: d *_k^-1 d^T beta = d c.
    const SparseMatrix d = ops.d[k].real();
    const Eigen::VectorXd inv = s[k].weights.cwiseInverse();
    const SparseMatrix A = d * inv.asDiagonal() * d.transpose();
    const Eigen::VectorXd rhs = d * c.values;
    const SolveResult r = solve_spsd(A, rhs, tol, so);
    out.coexact_report = r.report;
    out.coexact_potential.degree = k + 1;
    out.coexact_potential.values = r.x.cwiseQuotient(s[k + 1].weights);
    out.coexact.values = inv.cwiseProduct(d.transpose() * r.x);
  }
  out.harmonic.values = c.values - out.exact.values - out.coexact.values;
  if (!out.exact_report.converged || !out.coexact_report.converged)
    throw Error(ErrorKind::convergence, "Hodge decomposition solve did not converge");
  return out;
}

ExactnessResult is_exact_1cochain(const TetMesh& mesh, const Cochain& c, double tol) {
  if (c.degree != 1 || c.complex != Complex::primal)
    throw Error(ErrorKind::degree, "exactness test expects a primal 1-cochain");
  if (c.values.size() != mesh.num_edges()) throw Error(ErrorKind::validation, "cochain size mismatch");
  ExactnessResult res;
  const int nv = mesh.num_vertices();
  std::vector<std::vector<std::pair<int, int>>> adj(nv);  // (neighbour, edge)
  for (int e = 0; e < mesh.num_edges(); ++e) {
    adj[mesh.edges()[e][0]].push_back({mesh.edges()[e][1], e});
    adj[mesh.edges()[e][1]].push_back({mesh.edges()[e][0], e});
  }
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(nv);
  std::vector<char> seen(nv, 0), tree(mesh.num_edges(), 0);
  for (int root = 0; root < nv; ++root) {
    if (seen[root]) continue;
    seen[root] = 1;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      const int a = q.front();
      q.pop();
      for (auto [b, e] : adj[a]) {
        if (seen[b]) continue;
        seen[b] = 1;
        tree[e] = 1;
        const double step = mesh.edges()[e][1] == b ? c.values[e] : -c.values[e];
        phi[b] = phi[a] + step;
        q.push(b);
      }
    }
  }
  const double scale = std::max(1.0, c.values.cwiseAbs().maxCoeff());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (tree[e]) continue;
    const double period = c.values[e] - (phi[mesh.edges()[e][1]] - phi[mesh.edges()[e][0]]);
    if (std::abs(period) > std::abs(res.worst_period)) {
      res.worst_period = period;
      res.worst_edge = e;
    }
  }
  res.exact = std::abs(res.worst_period) <= tol * scale;
  if (res.exact) {
    Cochain p;
    p.degree = 0;
    p.values = phi;
    res.potential = std::move(p);
  }
  if (torus_size(mesh) > 0)
    for (int axis = 0; axis < 3; ++axis) res.axis_periods.push_back(pair(c, torus_axis_cycle(mesh, axis)));
  return res;
}

void export_harmonic_basis(const HarmonicBasis& basis, std::ostream& out) {
  out.precision(17);
  out << basis.degree << ' ' << basis.basis.size() << '\n';
  for (const Cochain& h : basis.basis)
    for (int i = 0; i < h.values.size(); ++i) out << h.values[i] << '\n';
}

}  // namespace foliate
