#include "mcflab/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace mcflab {

namespace {

bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TriMesh read_off(std::istream& in) {
  std::string line;
  if (!next_content_line(in, line)) throw Error(ErrorCode::ParseError, "empty OFF input");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  if (magic != "OFF") throw Error(ErrorCode::ParseError, "missing OFF header");
  long nv = -1, nf = -1, ne = 0;
  if (!(header >> nv)) {
    if (!next_content_line(in, line)) throw Error(ErrorCode::ParseError, "missing OFF counts");
    std::istringstream counts(line);
    counts >> nv >> nf >> ne;
  } else {
    header >> nf >> ne;
  }
  if (nv < 0 || nf < 0) throw Error(ErrorCode::ParseError, "bad OFF counts");

  TriMesh mesh;
  mesh.vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    if (!next_content_line(in, line)) throw Error(ErrorCode::ParseError, "truncated vertex list");
    std::istringstream ls(line);
    Vec3 p;
    if (!(ls >> p.x() >> p.y() >> p.z())) throw Error(ErrorCode::ParseError, "bad vertex line: " + line);
    mesh.vertices.push_back(p);
  }
  mesh.faces.reserve(nf);
  for (long i = 0; i < nf; ++i) {
    if (!next_content_line(in, line)) throw Error(ErrorCode::ParseError, "truncated face list");
    std::istringstream ls(line);
    int k = 0;
    ls >> k;
    if (k != 3) throw Error(ErrorCode::ParseError, "only triangles are supported (face with " + std::to_string(k) + " corners)");
    Face f;
    if (!(ls >> f[0] >> f[1] >> f[2])) throw Error(ErrorCode::ParseError, "bad face line: " + line);
    for (int c : f)
      if (c < 0 || c >= nv) throw Error(ErrorCode::ParseError, "face index out of range");
    mesh.faces.push_back(f);
  }
  orient_outward(mesh);
  return mesh;
}

TriMesh read_obj(std::istream& in) {
  TriMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) throw Error(ErrorCode::ParseError, "bad vertex line: " + line);
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        const int raw = std::stoi(tok.substr(0, tok.find('/')));
        const int n = static_cast<int>(mesh.vertices.size());
        const int i = raw > 0 ? raw - 1 : n + raw;
        if (i < 0 || i >= n) throw Error(ErrorCode::ParseError, "face index out of range: " + line);
        idx.push_back(i);
      }
      if (idx.size() != 3)
        throw Error(ErrorCode::ParseError, "only triangles are supported (face with " + std::to_string(idx.size()) + " corners)");
      mesh.faces.push_back({idx[0], idx[1], idx[2]});
    }
  }
  if (mesh.vertices.empty()) throw Error(ErrorCode::ParseError, "no vertices in OBJ input");
  orient_outward(mesh);
  return mesh;
}

TriMesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  const auto ext = path.extension().string();
  if (ext == ".off" || ext == ".OFF") return read_off(in);
  if (ext == ".obj" || ext == ".OBJ") return read_obj(in);
  throw Error(ErrorCode::ParseError, "unknown mesh extension '" + ext + "'");
}

void write_off(std::ostream& out, const TriMesh& mesh) {
  char buf[128];
  out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_faces() << " 0\n";
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void write_off(const std::filesystem::path& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_off(out, mesh);
}

}  // namespace mcflab
