#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ellfem/mesh.hpp"

namespace ellfem {

namespace {

// Non-empty, comment-stripped lines with their 1-based source line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      tokens.clear();
      std::istringstream ss(line);
      for (std::string t; ss >> t;) tokens.push_back(std::move(t));
      if (!tokens.empty()) return true;
    }
    return false;
  }

  std::vector<std::string> expect(const char* what) {
    std::vector<std::string> tokens;
    if (!next(tokens)) throw ParseError(line_no_ + 1, std::string("unexpected end of file, expected ") + what);
    return tokens;
  }

  std::size_t line() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

template <typename T>
T parse_number(const std::string& token, std::size_t line) {
  T value{};
  const char* first = token.data();
  const char* last = first + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ParseError(line, "invalid number '" + token + "'");
  return value;
}

std::size_t parse_count(const std::vector<std::string>& tokens, const char* keyword,
                        std::size_t line) {
  if (tokens.size() != 2 || tokens[0] != keyword)
    throw ParseError(line, std::string("expected '") + keyword + " <count>'");
  const auto count = parse_number<long long>(tokens[1], line);
  if (count < 0) throw ParseError(line, "negative count");
  return static_cast<std::size_t>(count);
}

}  // namespace

Mesh read_mesh(std::istream& in) {
  LineReader reader(in);
  auto tokens = reader.expect("header");
  if (tokens.size() != 2 || tokens[0] != "ellmesh")
    throw ParseError(reader.line(), "missing 'ellmesh <version>' header");
  if (tokens[1] != "1") throw ParseError(reader.line(), "unsupported ellmesh version " + tokens[1]);

  tokens = reader.expect("kind");
  if (tokens.size() != 2 || tokens[0] != "kind" || (tokens[1] != "bulk" && tokens[1] != "surface"))
    throw ParseError(reader.line(), "expected 'kind bulk|surface'");
  const MeshKind kind = parse_mesh_kind(tokens[1]);

  tokens = reader.expect("dimensions");
  if (tokens.size() != 6 || tokens[0] != "dim" || tokens[2] != "order" || tokens[4] != "ambient")
    throw ParseError(reader.line(), "expected 'dim <d> order <p> ambient <m>'");
  const int dim = parse_number<int>(tokens[1], reader.line());
  const int order = parse_number<int>(tokens[3], reader.line());
  const int ambient = parse_number<int>(tokens[5], reader.line());
  if (!is_supported_mesh_type(kind, dim, order))
    throw ParseError(reader.line(), "unsupported element type");
  if (ambient != (kind == MeshKind::Bulk ? dim : dim + 1))
    throw ParseError(reader.line(), "ambient dimension inconsistent with kind and dim");

  tokens = reader.expect("nodes");
  const std::size_t num_nodes = parse_count(tokens, "nodes", reader.line());
  NodeArray nodes(static_cast<Eigen::Index>(num_nodes), ambient);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    tokens = reader.expect("node coordinates");
    if (tokens.size() != static_cast<std::size_t>(ambient))
      throw ParseError(reader.line(), "expected " + std::to_string(ambient) + " coordinates");
    for (int k = 0; k < ambient; ++k) nodes(i, k) = parse_number<double>(tokens[k], reader.line());
  }

  const int nref = dof_count(dim, order);
  tokens = reader.expect("elements");
  const std::size_t num_elements = parse_count(tokens, "elements", reader.line());
  ElementArray elements(static_cast<Eigen::Index>(num_elements), nref);
  for (std::size_t e = 0; e < num_elements; ++e) {
    tokens = reader.expect("element connectivity");
    if (tokens.size() != static_cast<std::size_t>(nref))
      throw ParseError(reader.line(), "expected " + std::to_string(nref) + " node indices");
    for (int j = 0; j < nref; ++j) {
      const auto idx = parse_number<long long>(tokens[j], reader.line());
      if (idx < 1 || idx > static_cast<long long>(num_nodes))
        throw ParseError(reader.line(), "node index " + tokens[j] + " out of bounds");
      elements(e, j) = static_cast<Index>(idx - 1);
    }
  }

  std::vector<Index> boundary;
  if (reader.next(tokens)) {
    const std::size_t count = parse_count(tokens, "boundary", reader.line());
    if (kind != MeshKind::Bulk) throw ParseError(reader.line(), "boundary section on a surface mesh");
    boundary.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      tokens = reader.expect("boundary node index");
      if (tokens.size() != 1) throw ParseError(reader.line(), "expected one node index");
      const auto idx = parse_number<long long>(tokens[0], reader.line());
      if (idx < 1 || idx > static_cast<long long>(num_nodes))
        throw ParseError(reader.line(), "boundary index out of bounds");
      boundary.push_back(static_cast<Index>(idx - 1));
    }
    if (reader.next(tokens)) throw ParseError(reader.line(), "trailing content");
  }

  if (num_elements == 0) throw ValidationError("mesh has no elements");
  return make_mesh(kind, dim, order, std::move(nodes), std::move(elements), std::move(boundary));
}

Mesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << "ellmesh 1\n";
  out << "kind " << to_string(mesh.kind) << '\n';
  out << "dim " << mesh.dim << " order " << mesh.order << " ambient " << mesh.ambient << '\n';
  out << "nodes " << mesh.num_nodes() << '\n';
  out << std::setprecision(17);
  for (Index i = 0; i < mesh.num_nodes(); ++i) {
    for (int k = 0; k < mesh.ambient; ++k) out << (k ? " " : "") << mesh.nodes(i, k);
    out << '\n';
  }
  out << "elements " << mesh.num_elements() << '\n';
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    for (Eigen::Index j = 0; j < mesh.elements.cols(); ++j)
      out << (j ? " " : "") << mesh.elements(e, j) + 1;
    out << '\n';
  }
  if (!mesh.boundary.empty()) {
    out << "boundary " << mesh.boundary.size() << '\n';
    for (Index b : mesh.boundary) out << b + 1 << '\n';
  }
}

void write_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_mesh(mesh, out);
}

}  // namespace ellfem
