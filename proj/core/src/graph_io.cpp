#include "leap/graph_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "leap/errors.hpp"

namespace leap {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& tok, std::size_t line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    fail(line_no, "non-numeric token '" + tok + "'");
  }
  if (pos != tok.size()) fail(line_no, "non-numeric token '" + tok + "'");
  return v;
}

long parse_long(const std::string& tok, std::size_t line_no) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(tok, &pos);
  } catch (const std::exception&) {
    fail(line_no, "non-integer token '" + tok + "'");
  }
  if (pos != tok.size()) fail(line_no, "non-integer token '" + tok + "'");
  return v;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> toks;
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

}  // namespace

std::string serialize_graph(const Graph& g) {
  g.validate();
  std::ostringstream os;
  os << g.num_nodes << ' ' << g.feature_dim();
  if (g.graph_label) os << " label " << *g.graph_label;
  os << '\n';
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    for (std::size_t d = 0; d < g.feature_dim(); ++d) {
      if (d) os << ' ';
      os << fmt_double(g.features.at(i, d));
    }
    os << '\n';
  }
  if (!g.node_labels.empty()) {
    os << "labels";
    for (int l : g.node_labels) os << ' ' << l;
    os << '\n';
  }
  for (const auto& [i, j] : g.edges()) os << i << ' ' << j << '\n';
  return os.str();
}

Graph parse_graph(const std::string& content) {
  std::istringstream is(content);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(is, line)) throw ParseError("line 1: empty input");
  ++line_no;
  auto head = split_ws(line);
  if (head.size() != 2 && !(head.size() == 4 && head[2] == "label"))
    fail(line_no, "malformed header, expected 'N D' or 'N D label y'");
  const long n_raw = parse_long(head[0], line_no);
  const long d_raw = parse_long(head[1], line_no);
  if (n_raw < 1 || d_raw < 1) fail(line_no, "N and D must be positive");
  const auto n = static_cast<std::size_t>(n_raw);
  const auto d = static_cast<std::size_t>(d_raw);
  std::optional<int> label;
  if (head.size() == 4) label = static_cast<int>(parse_long(head[3], line_no));

  Tensor feat(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(is, line)) fail(line_no + 1, "expected feature row " + std::to_string(i));
    ++line_no;
    auto toks = split_ws(line);
    if (toks.size() != d)
      fail(line_no, "expected " + std::to_string(d) + " features, got " +
                        std::to_string(toks.size()));
    for (std::size_t k = 0; k < d; ++k) feat.at(i, k) = parse_double(toks[k], line_no);
  }

  std::vector<int> node_labels;
  Tensor adj(n, n);
  while (std::getline(is, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "labels") {
      if (toks.size() != n + 1)
        fail(line_no, "expected " + std::to_string(n) + " node labels");
      for (std::size_t i = 0; i < n; ++i)
        node_labels.push_back(static_cast<int>(parse_long(toks[i + 1], line_no)));
      continue;
    }
    if (toks.size() != 2) fail(line_no, "expected edge 'i j'");
    const long a = parse_long(toks[0], line_no);
    const long b = parse_long(toks[1], line_no);
    if (a < 0 || b < 0 || a >= static_cast<long>(n) || b >= static_cast<long>(n))
      fail(line_no, "dangling edge index " + std::to_string(a >= static_cast<long>(n) || a < 0 ? a : b));
    if (a == b) fail(line_no, "self-loop " + std::to_string(a) + " " + std::to_string(b));
    adj.at(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) = 1.0;
    adj.at(static_cast<std::size_t>(b), static_cast<std::size_t>(a)) = 1.0;
  }

  try {
    return make_graph(std::move(adj), std::move(feat), label, std::move(node_labels));
  } catch (const GraphError& e) {
    throw ParseError(std::string("graph invariant violated: ") + e.what());
  }
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_graph(os.str());
}

void save_graph(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write graph file " + path);
  out << serialize_graph(g);
}

std::string serialize_manifest(const std::vector<ManifestEntry>& entries) {
  std::ostringstream os;
  os << "leap-dataset 1 " << entries.size() << '\n';
  for (const auto& e : entries) os << e.file << ' ' << e.label << ' ' << e.split << '\n';
  return os.str();
}

std::vector<ManifestEntry> parse_manifest(const std::string& content) {
  std::istringstream is(content);
  std::string line;
  if (!std::getline(is, line)) throw ParseError("line 1: empty manifest");
  auto head = split_ws(line);
  if (head.size() != 3 || head[0] != "leap-dataset" || head[1] != "1")
    throw ParseError("line 1: malformed manifest header");
  const long count = parse_long(head[2], 1);
  std::vector<ManifestEntry> entries;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 3) fail(line_no, "expected '<file> <label> <split>'");
    ManifestEntry e;
    e.file = toks[0];
    e.label = static_cast<int>(parse_long(toks[1], line_no));
    e.split = toks[2];
    if (e.split != "train" && e.split != "val" && e.split != "test" && e.split != "none")
      fail(line_no, "unknown split '" + e.split + "'");
    entries.push_back(std::move(e));
  }
  if (entries.size() != static_cast<std::size_t>(count))
    throw ParseError("manifest count mismatch: header says " + std::to_string(count) +
                     ", found " + std::to_string(entries.size()));
  return entries;
}

}  // namespace leap
