#include "foliate/mesh.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace foliate {

namespace {

constexpr int kLocalEdges[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

// Relative shift components are packed base 5, so each must lie in [-2, 2].
int pack_shift(const Vec3i& s) {
  for (int i = 0; i < 3; ++i)
    if (s[i] < -2 || s[i] > 2)
      throw Error(ErrorKind::validation, "periodic shift outside the supported range [-2, 2]");
  return (s[0] + 2) + 5 * ((s[1] + 2) + 5 * (s[2] + 2));
}

// Parity of the permutation that sorts ids (true when odd).
template <std::size_t N>
bool sort_with_parity(std::array<int, N>& order, const std::array<int, N>& ids) {
  bool odd = false;
  for (std::size_t i = 1; i < N; ++i)
    for (std::size_t j = i; j > 0 && ids[order[j - 1]] > ids[order[j]]; --j) {
      std::swap(order[j - 1], order[j]);
      odd = !odd;
    }
  return odd;
}

struct FaceKey {
  std::array<int, 3> ids;
  int shift;
  auto operator<=>(const FaceKey&) const = default;
};

struct EdgeKey {
  std::array<int, 2> ids;
  int shift;
  auto operator<=>(const EdgeKey&) const = default;
};

double tet_signed_volume(const std::array<Vec3, 4>& p) {
  return (p[1] - p[0]).cross(p[2] - p[0]).dot(p[3] - p[0]) / 6.0;
}

}  // namespace

TetMesh::TetMesh(std::vector<Vec3> vertices, std::vector<Tet> tets,
                 std::optional<Periodicity> periodic)
    : vertices_(std::move(vertices)), tets_(std::move(tets)), periodic_(std::move(periodic)) {
  build();
}

int TetMesh::count(int k) const {
  switch (k) {
    case 0: return num_vertices();
    case 1: return num_edges();
    case 2: return num_faces();
    case 3: return num_tets();
  }
  throw Error(ErrorKind::degree, "simplex degree outside 0..3");
}

std::array<Vec3, 4> TetMesh::tet_corners(int t) const {
  std::array<Vec3, 4> p;
  for (int i = 0; i < 4; ++i) {
    p[i] = vertices_[tets_[t][i]];
    if (periodic_)
      p[i] += periodic_->corner_shifts[t][i].cast<double>().cwiseProduct(periodic_->period);
  }
  return p;
}

std::array<Vec3, 3> TetMesh::face_corners(int f) const {
  std::array<Vec3, 3> p;
  for (int i = 0; i < 3; ++i) p[i] = vertices_[faces_[f][i]];
  if (periodic_)
    for (int i = 1; i < 3; ++i)
      p[i] += face_shift_[f][i - 1].cast<double>().cwiseProduct(periodic_->period);
  return p;
}

std::array<Vec3, 2> TetMesh::edge_corners(int e) const {
  std::array<Vec3, 2> p{vertices_[edges_[e][0]], vertices_[edges_[e][1]]};
  if (periodic_) p[1] += edge_shift_[e].cast<double>().cwiseProduct(periodic_->period);
  return p;
}

Vec3 TetMesh::face_vector_area(int f) const {
  const auto p = face_corners(f);
  return 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
}

Vec3 TetMesh::tet_centroid(int t) const {
  const auto p = tet_corners(t);
  return 0.25 * (p[0] + p[1] + p[2] + p[3]);
}

double TetMesh::total_volume() const {
  return std::accumulate(volumes_.begin(), volumes_.end(), 0.0);
}

int TetMesh::euler_characteristic() const {
  return num_vertices() - num_edges() + num_faces() - num_tets();
}

void TetMesh::build() {
  const int nv = num_vertices();
  const int nt = num_tets();
  if (periodic_ && static_cast<int>(periodic_->corner_shifts.size()) != nt)
    throw Error(ErrorKind::validation, "periodic shift table does not match the tet count");

  std::vector<int> inverted;
  volumes_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    for (int i = 0; i < 4; ++i)
      if (tets_[t][i] < 0 || tets_[t][i] >= nv)
        throw Error(ErrorKind::validation, "tet " + std::to_string(t) + " references a missing vertex");
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (tets_[t][i] == tets_[t][j])
          throw Error(ErrorKind::validation, "tet " + std::to_string(t) + " repeats a vertex");
    volumes_[t] = tet_signed_volume(tet_corners(t));
    if (!(volumes_[t] > 0.0)) inverted.push_back(t);
  }
  if (!inverted.empty()) {
    std::ostringstream os;
    os << inverted.size() << " tet(s) with non-positive volume:";
    for (std::size_t i = 0; i < std::min<std::size_t>(inverted.size(), 20); ++i) os << ' ' << inverted[i];
    throw Error(ErrorKind::validation, os.str());
  }

  auto shift_of = [&](int t, int i) -> Vec3i {
    return periodic_ ? periodic_->corner_shifts[t][i] : Vec3i::Zero();
  };

  // Faces: key each (tet, local face) by sorted ids plus relative shifts.
  struct FaceRec {
    FaceKey key;
    int slot;  // 4 * tet + local corner opposite
  };
  std::vector<FaceRec> frecs;
  frecs.reserve(4 * static_cast<std::size_t>(nt));
  std::vector<signed char> local_sign(4 * static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    for (int i = 0; i < 4; ++i) {
      std::array<int, 3> corner;
      for (int j = 0, c = 0; j < 4; ++j)
        if (j != i) corner[c++] = j;
      const std::array<int, 3> ids{tets_[t][corner[0]], tets_[t][corner[1]], tets_[t][corner[2]]};
      std::array<int, 3> order{0, 1, 2};
      const bool odd = sort_with_parity(order, ids);
      FaceKey key;
      for (int c = 0; c < 3; ++c) key.ids[c] = ids[order[c]];
      const Vec3i s0 = shift_of(t, corner[order[0]]);
      key.shift = pack_shift(shift_of(t, corner[order[1]]) - s0) +
                  125 * pack_shift(shift_of(t, corner[order[2]]) - s0);
      frecs.push_back({key, 4 * t + i});
      const bool negative = (i % 2 == 1) != odd;
      local_sign[4 * t + i] = negative ? -1 : 1;
    }
  }
  std::sort(frecs.begin(), frecs.end(), [](const FaceRec& a, const FaceRec& b) {
    return a.key < b.key || (a.key == b.key && a.slot < b.slot);
  });

  tet_faces_.assign(nt, {});
  tet_face_signs_.assign(nt, {});
  faces_.clear();
  face_shift_.clear();
  face_tets_.clear();
  std::vector<int> bad_faces;
  for (std::size_t i = 0; i < frecs.size();) {
    std::size_t j = i;
    while (j < frecs.size() && frecs[j].key == frecs[i].key) ++j;
    const int f = static_cast<int>(faces_.size());
    faces_.push_back(frecs[i].key.ids);
    const int code = frecs[i].key.shift;
    auto unpack = [](int c) {
      return Vec3i(c % 5 - 2, (c / 5) % 5 - 2, (c / 25) % 5 - 2);
    };
    face_shift_.push_back({unpack(code % 125), unpack(code / 125)});
    std::array<int, 2> ft{-1, -1};
    bool ok = (j - i) <= 2;
    for (std::size_t k = i; k < j && ok; ++k) {
      const int slot = frecs[k].slot;
      const int t = slot / 4, li = slot % 4;
      tet_faces_[t][li] = f;
      tet_face_signs_[t][li] = local_sign[slot];
      const int side = local_sign[slot] > 0 ? 0 : 1;
      if (ft[side] >= 0) ok = false;
      ft[side] = t;
    }
    if (!ok) bad_faces.push_back(f);
    face_tets_.push_back(ft);
    i = j;
  }
  if (!bad_faces.empty()) {
    std::ostringstream os;
    os << bad_faces.size()
       << " face(s) shared by more than two tets or with inconsistent orientation, first face "
       << bad_faces.front();
    throw Error(ErrorKind::validation, os.str());
  }
  frecs.clear();
  frecs.shrink_to_fit();

  boundary_faces_.clear();
  for (int f = 0; f < num_faces(); ++f)
    if (is_boundary_face(f)) boundary_faces_.push_back(f);

  // Edges from faces; every tet edge lies on some face, so this is closed.
  const int nf = num_faces();
  struct EdgeRec {
    EdgeKey key;
    int slot;  // 3 * face + local corner opposite
  };
  std::vector<EdgeRec> erecs;
  erecs.reserve(3 * static_cast<std::size_t>(nf));
  for (int f = 0; f < nf; ++f) {
    const std::array<Vec3i, 3> s{Vec3i::Zero(), face_shift_[f][0], face_shift_[f][1]};
    for (int i = 0; i < 3; ++i) {
      const int a = i == 0 ? 1 : 0, b = i == 2 ? 1 : 2;
      erecs.push_back({EdgeKey{{faces_[f][a], faces_[f][b]}, pack_shift(s[b] - s[a])}, 3 * f + i});
    }
  }
  std::sort(erecs.begin(), erecs.end(), [](const EdgeRec& a, const EdgeRec& b) {
    return a.key < b.key || (a.key == b.key && a.slot < b.slot);
  });
  face_edges_.assign(nf, {});
  face_edge_signs_.assign(nf, {});
  edges_.clear();
  edge_shift_.clear();
  for (std::size_t i = 0; i < erecs.size();) {
    std::size_t j = i;
    while (j < erecs.size() && erecs[j].key == erecs[i].key) ++j;
    const int e = static_cast<int>(edges_.size());
    edges_.push_back(erecs[i].key.ids);
    const int c = erecs[i].key.shift;
    edge_shift_.push_back(Vec3i(c % 5 - 2, (c / 5) % 5 - 2, (c / 25) % 5 - 2));
    for (std::size_t k = i; k < j; ++k) {
      const int f = erecs[k].slot / 3, li = erecs[k].slot % 3;
      face_edges_[f][li] = e;
      face_edge_signs_[f][li] = (li % 2) ? -1 : 1;
    }
    i = j;
  }
  erecs.clear();
  erecs.shrink_to_fit();

  // Each tet edge is read off a face of the tet that contains it.
  tet_edges_.assign(nt, {});
  for (int t = 0; t < nt; ++t) {
    for (int le = 0; le < 6; ++le) {
      const int a = kLocalEdges[le][0], b = kLocalEdges[le][1];
      int opp = 0;
      while (opp == a || opp == b) ++opp;
      const int f = tet_faces_[t][opp];
      const int va = tets_[t][a], vb = tets_[t][b];
      int found = -1;
      for (int k = 0; k < 3; ++k) {
        const auto& ed = edges_[face_edges_[f][k]];
        if ((ed[0] == va && ed[1] == vb) || (ed[0] == vb && ed[1] == va)) found = face_edges_[f][k];
      }
      tet_edges_[t][le] = found;
    }
  }

  areas_.resize(nf);
  for (int f = 0; f < nf; ++f) areas_[f] = face_vector_area(f).norm();
  lengths_.resize(num_edges());
  for (int e = 0; e < num_edges(); ++e) {
    const auto p = edge_corners(e);
    lengths_[e] = (p[1] - p[0]).norm();
  }
}

std::optional<int> TetMesh::find_edge(int a, int b, const Vec3i& shift) const {
  Vec3i s = shift;
  if (a > b) {
    std::swap(a, b);
    s = -s;
  }
  if (!periodic_ && s != Vec3i::Zero()) return std::nullopt;
  auto lo = std::lower_bound(edges_.begin(), edges_.end(), std::array<int, 2>{a, b});
  for (auto it = lo; it != edges_.end() && (*it)[0] == a && (*it)[1] == b; ++it) {
    const int e = static_cast<int>(it - edges_.begin());
    if (edge_shift_[e] == s) return e;
  }
  return std::nullopt;
}

std::vector<std::vector<int>> TetMesh::boundary_components() const {
  // Union-find over boundary faces through their edges.
  const int nb = static_cast<int>(boundary_faces_.size());
  std::vector<int> parent(nb);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<int> edge_owner(num_edges(), -1);
  for (int i = 0; i < nb; ++i)
    for (int e : face_edges_[boundary_faces_[i]]) {
      if (edge_owner[e] < 0)
        edge_owner[e] = i;
      else
        parent[find(i)] = find(edge_owner[e]);
    }
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < nb; ++i) groups[find(i)].push_back(boundary_faces_[i]);
  std::vector<std::vector<int>> out;
  for (auto& [root, faces] : groups) out.push_back(std::move(faces));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

Chain boundary(const TetMesh& mesh, const Chain& chain) {
  Chain out;
  out.degree = chain.degree - 1;
  for (const auto& [id, w] : chain.coefficients) {
    switch (chain.degree) {
      case 3:
        for (int i = 0; i < 4; ++i)
          out.coefficients[mesh.tet_faces(id)[i]] += w * mesh.tet_face_signs(id)[i];
        break;
      case 2:
        for (int i = 0; i < 3; ++i)
          out.coefficients[mesh.face_edges(id)[i]] += w * mesh.face_edge_signs(id)[i];
        break;
      case 1:
        out.coefficients[mesh.edges()[id][0]] -= w;
        out.coefficients[mesh.edges()[id][1]] += w;
        break;
      default:
        throw Error(ErrorKind::degree, "boundary of a 0-chain");
    }
  }
  std::erase_if(out.coefficients, [](const auto& kv) { return kv.second == 0; });
  return out;
}

SurfaceCycle::SurfaceCycle(const TetMesh& mesh, Chain chain) : chain_(std::move(chain)) {
  if (chain_.degree != 2) throw Error(ErrorKind::degree, "surface cycle must be a 2-chain");
  for (const auto& [f, w] : chain_.coefficients)
    if (f < 0 || f >= mesh.num_faces()) throw Error(ErrorKind::validation, "face id out of range");
  const Chain b = boundary(mesh, chain_);
  if (!b.coefficients.empty())
    throw Error(ErrorKind::cycle, "chain has " + std::to_string(b.coefficients.size()) +
                                      " edge(s) in its boundary");
}

int SurfaceCycle::orientation(int face) const {
  auto it = chain_.coefficients.find(face);
  return it == chain_.coefficients.end() ? 0 : static_cast<int>(it->second);
}

SurfaceCycle SurfaceCycle::reversed(const TetMesh& mesh) const {
  Chain c = chain_;
  for (auto& [f, w] : c.coefficients) w = -w;
  return SurfaceCycle(mesh, std::move(c));
}

}  // namespace foliate
