#include "smoothfem/mesh_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace smoothfem {

namespace {

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw ParseError("line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string_view> split(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < text.size() && text[i] != ' ' && text[i] != '\t' && text[i] != '\r') ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  return tokens;
}

template <class T>
T parse_number(std::string_view token, std::size_t line, const char* what) {
  T value{};
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    fail(line, std::string("bad ") + what + " '" + std::string(token) + "'");
  return value;
}

}  // namespace

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "mesh " << to_string(mesh.kind()) << ' ' << mesh.n_vertices() << ' ' << mesh.n_elements() << ' '
      << mesh.boundary_edges().size() << '\n';
  for (Index v = 0; v < mesh.n_vertices(); ++v)
    out << "v " << v << ' ' << format_double(mesh.vertex(v).x()) << ' ' << format_double(mesh.vertex(v).y()) << '\n';
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    out << "e " << e;
    for (int k = 0; k < mesh.nodes_per_element(); ++k) out << ' ' << mesh.node(e, k);
    out << '\n';
  }
  for (const BoundaryEdge& b : mesh.boundary_edges())
    out << "b " << b.a << ' ' << b.b << ' ' << (b.tag == BoundaryTag::Dirichlet ? 'D' : 'N') << '\n';
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_mesh(out, mesh);
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

Mesh read_mesh(std::istream& in) {
  std::string text;
  std::size_t line_no = 0;
  bool have_header = false;
  ElementKind kind = ElementKind::T3;
  Index nv = 0, ne = 0, nb = 0;
  Points vertices;
  Mesh::Connectivity elements;
  std::vector<BoundaryEdge> boundary;
  Index next_v = 0, next_e = 0;

  while (std::getline(in, text)) {
    ++line_no;
    const auto tokens = split(text);
    if (tokens.empty() || tokens[0].front() == '#') continue;
    const std::string_view tag = tokens[0];
    if (!have_header) {
      if (tag != "mesh" || tokens.size() != 5) fail(line_no, "expected 'mesh <kind> <nv> <ne> <nb>' header");
      try {
        kind = parse_element_kind(tokens[1]);
      } catch (const ParseError& err) {
        fail(line_no, err.what());
      }
      nv = parse_number<Index>(tokens[2], line_no, "vertex count");
      ne = parse_number<Index>(tokens[3], line_no, "element count");
      nb = parse_number<Index>(tokens[4], line_no, "boundary edge count");
      if (nv < 0 || ne < 0 || nb < 0) fail(line_no, "negative count");
      vertices.resize(2, nv);
      elements.resize(nodes_per_element(kind), ne);
      have_header = true;
      continue;
    }
    if (tag == "v") {
      if (tokens.size() != 4) fail(line_no, "vertex line needs 'v <id> <x> <y>'");
      const auto id = parse_number<Index>(tokens[1], line_no, "vertex id");
      if (id != next_v || id >= nv) fail(line_no, "vertex id " + std::to_string(id) + " out of sequence");
      vertices(0, id) = parse_number<double>(tokens[2], line_no, "coordinate");
      vertices(1, id) = parse_number<double>(tokens[3], line_no, "coordinate");
      ++next_v;
    } else if (tag == "e") {
      const auto expected = static_cast<std::size_t>(2 + nodes_per_element(kind));
      if (tokens.size() != expected)
        fail(line_no, "element line needs " + std::to_string(nodes_per_element(kind)) + " vertex ids");
      const auto id = parse_number<Index>(tokens[1], line_no, "element id");
      if (id != next_e || id >= ne) fail(line_no, "element id " + std::to_string(id) + " out of sequence");
      for (int k = 0; k < nodes_per_element(kind); ++k) {
        const auto v = parse_number<Index>(tokens[2 + k], line_no, "vertex reference");
        if (v < 0 || v >= nv) fail(line_no, "vertex reference " + std::to_string(v) + " out of range");
        elements(k, id) = v;
      }
      ++next_e;
    } else if (tag == "b") {
      if (tokens.size() != 4) fail(line_no, "boundary line needs 'b <v1> <v2> <D|N>'");
      if (static_cast<Index>(boundary.size()) >= nb) fail(line_no, "more boundary edges than declared");
      BoundaryEdge b;
      b.a = parse_number<Index>(tokens[1], line_no, "vertex reference");
      b.b = parse_number<Index>(tokens[2], line_no, "vertex reference");
      if (b.a < 0 || b.a >= nv || b.b < 0 || b.b >= nv) fail(line_no, "boundary vertex out of range");
      if (tokens[3] == "D") b.tag = BoundaryTag::Dirichlet;
      else if (tokens[3] == "N") b.tag = BoundaryTag::Neumann;
      else fail(line_no, "boundary tag must be D or N");
      boundary.push_back(b);
    } else {
      fail(line_no, "unknown record '" + std::string(tag) + "'");
    }
  }
  if (!have_header) fail(line_no, "missing mesh header");
  if (next_v != nv || next_e != ne || static_cast<Index>(boundary.size()) != nb)
    fail(line_no, "file ended before all declared vertices, elements and boundary edges");
  return Mesh(kind, std::move(vertices), std::move(elements), std::move(boundary));
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

}  // namespace smoothfem
