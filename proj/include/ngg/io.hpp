#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace ngg::io {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',')) ++i;
    const std::size_t j = s.find_first_of(" \t,", i);
    const std::size_t end = j == std::string_view::npos ? s.size() : j;
    if (end > i) out.push_back(s.substr(i, end - i));
    i = end;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view token, T& value) {
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc{} && ptr == last;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return in;
}

inline std::string line_error(const std::string& source, std::size_t line, const std::string& msg) {
  return source + ":" + std::to_string(line) + ": " + msg;
}

}  // namespace detail

// Undirected simple graph read from an edge list.
struct EdgeListGraph {
  SymmetricBitMatrix adjacency;
  int index_base = 1;            // 0 or 1, auto-detected
  std::int64_t lines_read = 0;   // edge lines, before collapsing
  std::int64_t duplicates = 0;   // repeated or reversed pairs
  std::int64_t self_loops = 0;   // dropped
  std::vector<std::string> warnings;
};

// Whitespace-separated integer pairs, one edge per line. Lines starting with
// '%' and blank lines are skipped; extra columns (weights, timestamps) are
// ignored. Indexing is 0-based if any id is 0, otherwise 1-based.
inline EdgeListGraph parse_edge_list(std::istream& in, const std::string& source = "<input>") {
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  std::string line;
  std::size_t line_no = 0;
  std::int64_t min_id = INT64_MAX, max_id = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '%') continue;
    const auto tokens = detail::split_ws(body);
    std::int64_t u = 0, v = 0;
    if (tokens.size() < 2 || !detail::parse_number(tokens[0], u) || !detail::parse_number(tokens[1], v))
      throw ParseError(detail::line_error(source, line_no, "expected two integer node ids"));
    if (u < 0 || v < 0) throw ParseError(detail::line_error(source, line_no, "negative node id"));
    pairs.emplace_back(u, v);
    min_id = std::min({min_id, u, v});
    max_id = std::max({max_id, u, v});
  }
  if (pairs.empty()) throw ParseError(source + ": no edges found");

  EdgeListGraph g;
  g.index_base = min_id == 0 ? 0 : 1;
  const std::int64_t n = max_id - g.index_base + 1;
  if (n > 200000) throw ParseError(source + ": node id " + std::to_string(max_id) + " is too large");
  g.adjacency = SymmetricBitMatrix(n);
  g.lines_read = static_cast<std::int64_t>(pairs.size());
  for (auto [u, v] : pairs) {
    u -= g.index_base;
    v -= g.index_base;
    if (u == v) {
      ++g.self_loops;
      continue;
    }
    if (g.adjacency(u, v)) {
      ++g.duplicates;
      continue;
    }
    g.adjacency.set_edge(u, v);
  }
  if (g.self_loops > 0)
    g.warnings.push_back("dropped " + std::to_string(g.self_loops) + " self-loop(s)");
  return g;
}

inline EdgeListGraph read_edge_list(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_edge_list(in, path);
}

enum class AdjacencyFormat { Rle, Dense };

inline constexpr std::string_view kRleHeader = "% ngg-adjacency rle v1";
inline constexpr std::string_view kDenseHeader = "% ngg-adjacency dense v1";

// Rle: run lengths over the strict upper triangle in row-major order,
// alternating zeros and ones and starting with a (possibly empty) zero run.
// Dense: n rows of n space-separated 0/1 entries.
inline void write_adjacency(std::ostream& out, const SymmetricBitMatrix& a, AdjacencyFormat format) {
  const Eigen::Index n = a.size();
  if (format == AdjacencyFormat::Dense) {
    out << kDenseHeader << "\n" << n << "\n";
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) out << (j ? " " : "") << (a(i, j) ? 1 : 0);
      out << "\n";
    }
    return;
  }
  out << kRleHeader << "\n" << n << "\n";
  bool current = false;
  std::int64_t run = 0;
  int on_line = 0;
  auto flush = [&] {
    out << run << (++on_line % 32 == 0 ? "\n" : " ");
  };
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const bool bit = a(i, j);
      if (bit != current) {
        flush();
        current = bit;
        run = 0;
      }
      ++run;
    }
  flush();
  out << "\n";
}

inline void write_adjacency(const std::string& path, const SymmetricBitMatrix& a, AdjacencyFormat format) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  write_adjacency(out, a, format);
  if (!out) throw ParseError("write failed for " + path);
}

inline SymmetricBitMatrix parse_adjacency_dump(std::istream& in, const std::string& source = "<input>") {
  std::string header;
  std::getline(in, header);
  const auto h = detail::trim(header);
  const bool rle = h == kRleHeader;
  if (!rle && h != kDenseHeader) throw ParseError(source + ": not an ngg adjacency dump");
  std::int64_t n = -1;
  if (!(in >> n) || n < 0) throw ParseError(source + ": missing node count");
  SymmetricBitMatrix a(n);
  if (rle) {
    const std::int64_t total = n * (n - 1) / 2;
    std::int64_t pos = 0, run = 0;
    bool bit = false;
    Eigen::Index i = 0, j = 1;
    while (in >> run) {
      if (run < 0 || pos + run > total) throw ParseError(source + ": run lengths exceed the triangle");
      for (std::int64_t k = 0; k < run; ++k) {
        if (bit) a.set_edge(i, j);
        if (++j == n) {
          ++i;
          j = i + 1;
        }
      }
      pos += run;
      bit = !bit;
    }
    if (!in.eof()) throw ParseError(source + ": malformed run length");
    if (pos != total) throw ParseError(source + ": run lengths do not cover the triangle");
  } else {
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < n; ++j) {
        int v = -1;
        if (!(in >> v) || (v != 0 && v != 1)) throw ParseError(source + ": malformed dense entry");
        if (i == j && v) throw ParseError(source + ": non-zero diagonal");
        if (j > i && v) a.set_edge(i, j);
        if (j < i && v != static_cast<int>(a(j, i))) throw ParseError(source + ": matrix is not symmetric");
      }
  }
  return a;
}

struct LoadedGraph {
  SymmetricBitMatrix adjacency;
  std::string format;  // "edge-list", "rle", "dense"
  std::vector<std::string> warnings;
};

// Accepts an ngg adjacency dump (detected by its header) or an edge list.
inline LoadedGraph read_graph(const std::string& path) {
  auto in = detail::open_input(path);
  std::string first;
  std::getline(in, first);
  const auto h = detail::trim(first);
  in.clear();
  in.seekg(0);
  if (h == kRleHeader || h == kDenseHeader)
    return {parse_adjacency_dump(in, path), h == kRleHeader ? "rle" : "dense", {}};
  auto g = parse_edge_list(in, path);
  return {std::move(g.adjacency), "edge-list", std::move(g.warnings)};
}

// Lines "l value"; '%' or '#' comments; unlisted degrees are zero.
inline std::vector<double> parse_coefficients(std::istream& in, const std::string& source = "<input>") {
  std::map<int, double> by_degree;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '%' || body.front() == '#') continue;
    const auto tokens = detail::split_ws(body);
    int l = 0;
    double v = 0.0;
    if (tokens.size() != 2 || !detail::parse_number(tokens[0], l) || !detail::parse_number(tokens[1], v))
      throw ParseError(detail::line_error(source, line_no, "expected \"degree value\""));
    if (l < 0) throw ParseError(detail::line_error(source, line_no, "negative degree"));
    if (!by_degree.emplace(l, v).second)
      throw ParseError(detail::line_error(source, line_no, "degree listed twice"));
  }
  if (by_degree.empty()) throw ParseError(source + ": no coefficients found");
  std::vector<double> out(by_degree.rbegin()->first + 1, 0.0);
  for (auto [l, v] : by_degree) out[l] = v;
  return out;
}

inline std::vector<double> read_coefficients(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_coefficients(in, path);
}

}  // namespace ngg::io
