#include "foliate/mesh.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace foliate {

// Layout:
//   <nv>            then nv lines "id x y z"
//   <nt>            then nt lines "id v0 v1 v2 v3"
//   periodic px py pz   (optional) then nt lines of 12 integer corner shifts
// '#' starts a comment; blank lines are ignored.

std::string format_mesh(const TetMesh& mesh) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# vertices\n" << mesh.num_vertices() << '\n';
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec3& p = mesh.vertices()[v];
    os << v << ' ' << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  }
  os << "# tets\n" << mesh.num_tets() << '\n';
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto& tet = mesh.tets()[t];
    os << t << ' ' << tet[0] << ' ' << tet[1] << ' ' << tet[2] << ' ' << tet[3] << '\n';
  }
  if (mesh.is_periodic()) {
    const auto& per = *mesh.periodicity();
    os << "periodic " << per.period.x() << ' ' << per.period.y() << ' ' << per.period.z() << '\n';
    for (int t = 0; t < mesh.num_tets(); ++t) {
      os << t;
      for (const Vec3i& s : per.corner_shifts[t]) os << ' ' << s.x() << ' ' << s.y() << ' ' << s.z();
      os << '\n';
    }
  }
  return os.str();
}

void save_mesh(const TetMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path + " for writing");
  out << format_mesh(mesh);
  if (!out) throw Error(ErrorKind::io, "failed writing " + path);
}

namespace {

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  // Next non-empty line with comments stripped; false at end of input.
  bool next(std::istringstream& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++number_;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      fields.clear();
      fields.str(line);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::parse, "line " + std::to_string(number_) + ": " + what);
  }

  int line() const { return number_; }

 private:
  std::istringstream in_;
  int number_ = 0;
};

template <typename... T>
void read_fields(LineReader& reader, std::istringstream& fields, T&... out) {
  ((fields >> out), ...);
  if (fields.fail()) reader.fail("malformed record");
  std::string extra;
  if (fields >> extra) reader.fail("unexpected trailing token '" + extra + "'");
}

int read_count(LineReader& reader, const char* what) {
  std::istringstream fields;
  if (!reader.next(fields)) reader.fail(std::string("missing ") + what + " count");
  long n = -1;
  read_fields(reader, fields, n);
  if (n < 0 || n > 100000000) reader.fail(std::string("bad ") + what + " count");
  return static_cast<int>(n);
}

}  // namespace

TetMesh parse_mesh(const std::string& text) {
  LineReader reader(text);
  std::istringstream fields;

  const int nv = read_count(reader, "vertex");
  std::vector<Vec3> vertices(nv);
  for (int i = 0; i < nv; ++i) {
    if (!reader.next(fields)) reader.fail("missing vertex record");
    long id;
    double x, y, z;
    read_fields(reader, fields, id, x, y, z);
    if (id != i) reader.fail("vertex ids must be consecutive from 0");
    vertices[i] = Vec3(x, y, z);
  }

  const int nt = read_count(reader, "tet");
  std::vector<TetMesh::Tet> tets(nt);
  for (int i = 0; i < nt; ++i) {
    if (!reader.next(fields)) reader.fail("missing tet record");
    long id;
    std::array<long, 4> v;
    read_fields(reader, fields, id, v[0], v[1], v[2], v[3]);
    if (id != i) reader.fail("tet ids must be consecutive from 0");
    for (int k = 0; k < 4; ++k) {
      if (v[k] < 0 || v[k] >= nv) reader.fail("tet references a missing vertex");
      tets[i][k] = static_cast<int>(v[k]);
    }
  }

  std::optional<Periodicity> periodic;
  if (reader.next(fields)) {
    std::string tag;
    Periodicity per;
    fields >> tag;
    if (tag != "periodic") reader.fail("unexpected content after the tet section");
    read_fields(reader, fields, per.period.x(), per.period.y(), per.period.z());
    per.corner_shifts.resize(nt);
    for (int i = 0; i < nt; ++i) {
      if (!reader.next(fields)) reader.fail("missing periodic record");
      long id;
      std::array<int, 12> s;
      read_fields(reader, fields, id, s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7], s[8], s[9],
                  s[10], s[11]);
      if (id != i) reader.fail("periodic ids must be consecutive from 0");
      for (int k = 0; k < 4; ++k) per.corner_shifts[i][k] = Vec3i(s[3 * k], s[3 * k + 1], s[3 * k + 2]);
    }
    if (reader.next(fields)) reader.fail("unexpected content after the periodic section");
    periodic = std::move(per);
  }
  return TetMesh(std::move(vertices), std::move(tets), std::move(periodic));
}

TetMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_mesh(buffer.str());
}

}  // namespace foliate
