#pragma once

#include <filesystem>
#include <iosfwd>

#include "mcflab/mesh.hpp"

namespace mcflab {

// Triangles only: polygons with more than three corners are rejected with
// ParseError. Loaded meshes are re-oriented so that normals point outward.
TriMesh read_off(std::istream& in);
TriMesh read_obj(std::istream& in);
TriMesh read_mesh(const std::filesystem::path& path);

/// Full round-trip precision (%.17g).
void write_off(std::ostream& out, const TriMesh& mesh);
void write_off(const std::filesystem::path& path, const TriMesh& mesh);

}  // namespace mcflab
