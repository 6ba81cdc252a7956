#include "mcflab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mcflab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonManifoldMesh: return "NonManifoldMesh";
    case ErrorCode::DegenerateFace: return "DegenerateFace";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DisconnectedMesh: return "DisconnectedMesh";
    case ErrorCode::QualityCollapse: return "QualityCollapse";
    case ErrorCode::TimeOutOfRange: return "TimeOutOfRange";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::InsufficientSupport: return "InsufficientSupport";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::TrackLost: return "TrackLost";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::HypothesesFail: return "HypothesesFail";
    case ErrorCode::GeneratorInvalid: return "GeneratorInvalid";
    case ErrorCode::GateFailed: return "GateFailed";
    case ErrorCode::SelfIntersecting: return "SelfIntersecting";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

double face_area(const TriMesh& mesh, int f) {
  const auto& [a, b, c] = mesh.faces[f];
  return 0.5 * (mesh.vertices[b] - mesh.vertices[a]).cross(mesh.vertices[c] - mesh.vertices[a]).norm();
}

Vec3 face_normal(const TriMesh& mesh, int f) {
  const auto& [a, b, c] = mesh.faces[f];
  return (mesh.vertices[b] - mesh.vertices[a]).cross(mesh.vertices[c] - mesh.vertices[a]).normalized();
}

double total_area(const TriMesh& mesh) {
  double sum = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) sum += face_area(mesh, f);
  return sum;
}

double signed_volume(const TriMesh& mesh) {
  double vol = 0.0;
  for (const auto& [a, b, c] : mesh.faces)
    vol += mesh.vertices[a].dot(mesh.vertices[b].cross(mesh.vertices[c]));
  return vol / 6.0;
}

double mean_edge_length(const TriMesh& mesh) {
  if (mesh.faces.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [a, b, c] : mesh.faces) {
    sum += (mesh.vertices[a] - mesh.vertices[b]).norm();
    sum += (mesh.vertices[b] - mesh.vertices[c]).norm();
    sum += (mesh.vertices[c] - mesh.vertices[a]).norm();
  }
  return sum / (3.0 * mesh.num_faces());
}

double triangle_quality(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double l2 = (b - a).squaredNorm() + (c - b).squaredNorm() + (a - c).squaredNorm();
  if (l2 <= 0.0) return 0.0;
  const double area = 0.5 * (b - a).cross(c - a).norm();
  return 4.0 * std::sqrt(3.0) * area / l2;
}

double min_triangle_quality(const TriMesh& mesh) {
  double q = 1.0;
  for (const auto& [a, b, c] : mesh.faces)
    q = std::min(q, triangle_quality(mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]));
  return q;
}

TriMesh scaled(const TriMesh& mesh, double s) {
  TriMesh out = mesh;
  for (auto& v : out.vertices) v *= s;
  return out;
}

TriMesh transformed(const TriMesh& mesh, const Eigen::Matrix3d& rotation, const Vec3& shift) {
  TriMesh out = mesh;
  for (auto& v : out.vertices) v = rotation * v + shift;
  return out;
}

void orient_outward(TriMesh& mesh) {
  if (signed_volume(mesh) < 0.0)
    for (auto& f : mesh.faces) std::swap(f[1], f[2]);
}

namespace {

struct DirectedEdge {
  int lo, hi;
  int face;
  bool forward;  // lo -> hi in face winding
};

void build_csr(int n, const std::vector<std::vector<int>>& lists, std::vector<int>& offsets,
               std::vector<int>& data) {
  offsets.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + static_cast<int>(lists[i].size());
  data.clear();
  data.reserve(offsets[n]);
  for (const auto& l : lists) data.insert(data.end(), l.begin(), l.end());
}

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

MeshTopology::MeshTopology(const TriMesh& mesh) : num_vertices_(mesh.num_vertices()) {
  const int nv = num_vertices_;
  double max_edge2 = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto& face = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      if (face[k] < 0 || face[k] >= nv)
        throw Error(ErrorCode::NonManifoldMesh, "face " + std::to_string(f) + " references missing vertex");
      max_edge2 = std::max(max_edge2, (mesh.vertices[face[k]] - mesh.vertices[face[(k + 1) % 3]]).squaredNorm());
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2])
      throw Error(ErrorCode::DegenerateFace, "face " + std::to_string(f) + " repeats a vertex");
  }
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const double a = face_area(mesh, f);
    if (!(a > 1e-14 * max_edge2))
      throw Error(ErrorCode::DegenerateFace, "face " + std::to_string(f) + " has zero area");
  }

  std::vector<DirectedEdge> half;
  half.reserve(3 * mesh.faces.size());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto& face = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      const int a = face[k], b = face[(k + 1) % 3];
      half.push_back({std::min(a, b), std::max(a, b), f, a < b});
    }
  }
  std::sort(half.begin(), half.end(), [](const DirectedEdge& x, const DirectedEdge& y) {
    return std::tie(x.lo, x.hi, x.face) < std::tie(y.lo, y.hi, y.face);
  });
  edges_.clear();
  for (std::size_t i = 0; i < half.size();) {
    std::size_t j = i;
    while (j < half.size() && half[j].lo == half[i].lo && half[j].hi == half[i].hi) ++j;
    if (j - i != 2)
      throw Error(ErrorCode::NonManifoldMesh, "edge (" + std::to_string(half[i].lo) + "," +
                                                  std::to_string(half[i].hi) + ") has " +
                                                  std::to_string(j - i) + " incident faces");
    if (half[i].forward == half[i + 1].forward)
      throw Error(ErrorCode::NonManifoldMesh, "inconsistent face orientation at edge (" +
                                                  std::to_string(half[i].lo) + "," +
                                                  std::to_string(half[i].hi) + ")");
    edges_.push_back({half[i].lo, half[i].hi});
    i = j;
  }

  std::vector<std::vector<int>> ring1(nv), vfaces(nv);
  for (const auto& [a, b] : edges_) {
    ring1[a].push_back(b);
    ring1[b].push_back(a);
  }
  for (int f = 0; f < mesh.num_faces(); ++f)
    for (int v : mesh.faces[f]) vfaces[v].push_back(f);
  for (auto& r : ring1) std::sort(r.begin(), r.end());

  std::vector<std::vector<int>> ring2(nv);
  std::vector<int> mark(nv, -1);
  for (int v = 0; v < nv; ++v) {
    mark[v] = v;
    for (int u : ring1[v]) {
      if (mark[u] != v) { mark[u] = v; ring2[v].push_back(u); }
      for (int w : ring1[u])
        if (mark[w] != v) { mark[w] = v; ring2[v].push_back(w); }
    }
  }
  build_csr(nv, ring1, ring1_offsets_, ring1_);
  build_csr(nv, ring2, ring2_offsets_, ring2_);
  build_csr(nv, vfaces, vface_offsets_, vface_);

  std::vector<int> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& [a, b] : edges_) {
    const int ra = find_root(parent, a), rb = find_root(parent, b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  component_.assign(nv, -1);
  std::vector<int> label(nv, -1);
  num_components_ = 0;
  for (int v = 0; v < nv; ++v) {
    const int r = find_root(parent, v);
    if (label[r] < 0) label[r] = num_components_++;
    component_[v] = label[r];
  }
}

std::span<const int> MeshTopology::one_ring(int v) const {
  return {ring1_.data() + ring1_offsets_[v], ring1_.data() + ring1_offsets_[v + 1]};
}
std::span<const int> MeshTopology::two_ring(int v) const {
  return {ring2_.data() + ring2_offsets_[v], ring2_.data() + ring2_offsets_[v + 1]};
}
std::span<const int> MeshTopology::vertex_faces(int v) const {
  return {vface_.data() + vface_offsets_[v], vface_.data() + vface_offsets_[v + 1]};
}

void validate(const TriMesh& mesh) {
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (!mesh.vertices[v].allFinite())
      throw Error(ErrorCode::InvalidParams, "vertex " + std::to_string(v) + " is not finite");
  MeshTopology topo(mesh);
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (topo.vertex_faces(v).empty())
      throw Error(ErrorCode::NonManifoldMesh, "vertex " + std::to_string(v) + " has no faces");
}

std::vector<TriMesh> split_components(const TriMesh& mesh) {
  MeshTopology topo(mesh);
  std::vector<TriMesh> parts(topo.num_components());
  std::vector<int> local(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    auto& part = parts[topo.component_of()[v]];
    local[v] = part.num_vertices();
    part.vertices.push_back(mesh.vertices[v]);
  }
  for (const auto& f : mesh.faces) {
    auto& part = parts[topo.component_of()[f[0]]];
    part.faces.push_back({local[f[0]], local[f[1]], local[f[2]]});
  }
  return parts;
}

}  // namespace mcflab
