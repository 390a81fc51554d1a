#pragma once

#include "foliate/common.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace foliate {

// Lattice shifts of every tet corner for meshes of a periodic box. A corner
// sits at vertices[id] + shift * period (componentwise).
struct Periodicity {
  Vec3 period = Vec3::Ones();
  std::vector<std::array<Vec3i, 4>> corner_shifts;
};

// Oriented simplicial 3-complex. Edges and faces are stored with their
// vertex ids sorted ascending, which fixes their canonical orientation.
// On periodic meshes two simplices may share vertex ids yet differ by a
// lattice shift, so simplex identity also records relative shifts.
class TetMesh {
 public:
  using Tet = std::array<int, 4>;

  TetMesh() = default;
  TetMesh(std::vector<Vec3> vertices, std::vector<Tet> tets,
          std::optional<Periodicity> periodic = std::nullopt);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_tets() const { return static_cast<int>(tets_.size()); }
  int count(int k) const;

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Tet>& tets() const { return tets_; }
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  const std::vector<std::array<int, 3>>& faces() const { return faces_; }

  bool is_periodic() const { return periodic_.has_value(); }
  const std::optional<Periodicity>& periodicity() const { return periodic_; }

  // Corner positions in a frame where the simplex is embedded without wrap.
  std::array<Vec3, 4> tet_corners(int t) const;
  std::array<Vec3, 3> face_corners(int f) const;
  std::array<Vec3, 2> edge_corners(int e) const;

  // Face opposite stored corner i, and the sign of its canonical orientation
  // relative to the orientation induced as the boundary of the tet.
  const std::array<int, 4>& tet_faces(int t) const { return tet_faces_[t]; }
  const std::array<signed char, 4>& tet_face_signs(int t) const { return tet_face_signs_[t]; }
  // Edges of a tet in local order (01, 02, 03, 12, 13, 23).
  const std::array<int, 6>& tet_edges(int t) const { return tet_edges_[t]; }
  // Edge opposite sorted corner i of the face, with its incidence sign.
  const std::array<int, 3>& face_edges(int f) const { return face_edges_[f]; }
  const std::array<signed char, 3>& face_edge_signs(int f) const { return face_edge_signs_[f]; }
  // Tet on the negative side of the canonical normal first (the tet whose
  // boundary orientation agrees with the face), then the other; -1 if absent.
  const std::array<int, 2>& face_tets(int f) const { return face_tets_[f]; }
  bool is_boundary_face(int f) const { return face_tets_[f][0] < 0 || face_tets_[f][1] < 0; }
  const std::vector<int>& boundary_faces() const { return boundary_faces_; }

  double tet_volume(int t) const { return volumes_[t]; }
  double face_area(int f) const { return areas_[f]; }
  double edge_length(int e) const { return lengths_[e]; }
  // Canonically oriented vector area of a face.
  Vec3 face_vector_area(int f) const;
  Vec3 tet_centroid(int t) const;
  double total_volume() const;

  int euler_characteristic() const;

  // Edge joining a and b where b sits at `shift` lattice cells from a.
  std::optional<int> find_edge(int a, int b, const Vec3i& shift = Vec3i::Zero()) const;

  // Boundary faces grouped into connected components (sharing edges).
  std::vector<std::vector<int>> boundary_components() const;

 private:
  void build();

  std::vector<Vec3> vertices_;
  std::vector<Tet> tets_;
  std::optional<Periodicity> periodic_;

  std::vector<std::array<int, 2>> edges_;
  std::vector<Vec3i> edge_shift_;  // shift of the second vertex relative to the first
  std::vector<std::array<int, 3>> faces_;
  std::vector<std::array<Vec3i, 2>> face_shift_;  // shifts of corners 1, 2 relative to 0

  std::vector<std::array<int, 4>> tet_faces_;
  std::vector<std::array<signed char, 4>> tet_face_signs_;
  std::vector<std::array<int, 6>> tet_edges_;
  std::vector<std::array<int, 3>> face_edges_;
  std::vector<std::array<signed char, 3>> face_edge_signs_;
  std::vector<std::array<int, 2>> face_tets_;
  std::vector<int> boundary_faces_;

  std::vector<double> volumes_, areas_, lengths_;
};

// Integer chain: oriented simplex id -> weight. A dual chain lives on the
// dual complex: a dual 1-chain is indexed by the faces its dual edges cross,
// positive along the canonical face normal.
struct Chain {
  int degree = 0;
  std::map<int, long> coefficients;
  bool dual = false;
};

Chain boundary(const TetMesh& mesh, const Chain& chain);

// A closed, oriented 2-chain. Construction verifies the cycle condition.
class SurfaceCycle {
 public:
  SurfaceCycle(const TetMesh& mesh, Chain chain);
  const Chain& chain() const { return chain_; }
  int orientation(int face) const;
  SurfaceCycle reversed(const TetMesh& mesh) const;

 private:
  Chain chain_;
};

// Text I/O in the node/ele layout.
void save_mesh(const TetMesh& mesh, const std::string& path);
TetMesh load_mesh(const std::string& path);
TetMesh parse_mesh(const std::string& text);
std::string format_mesh(const TetMesh& mesh);

}  // namespace foliate
