#pragma once

// Plain-text mesh files:
//
//   mesh <T3|Q4|Q9> <n_vertices> <n_elements> <n_boundary_edges>
//   v <id> <x> <y>
//   e <id> <v1> ... <vk>
//   b <v1> <v2> <D|N>
//
// Ids are 0-based and consecutive. Blank lines and lines starting with '#'
// are ignored.

#include "smoothfem/mesh.hpp"

#include <iosfwd>
#include <string>

namespace smoothfem {

void write_mesh(std::ostream& out, const Mesh& mesh);
void write_mesh_file(const std::string& path, const Mesh& mesh);

// Throws ParseError with the offending line number.
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);

}  // namespace smoothfem
