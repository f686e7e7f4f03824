#include "hilbsheaf/sheaf_io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hilbsheaf {

namespace {
constexpr const char* kMagic = "hilbsheaf-sheaf v1";
}

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_short(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_sheaf(std::ostream& os, const SheafGraph& graph, const TransportSet& transports) {
  if (static_cast<int>(transports.size()) != graph.num_edges())
    throw std::invalid_argument("write_sheaf: one transport per edge required");
  const int d = graph.stalk_dim();
  os << kMagic << '\n'
     << graph.num_nodes() << ' ' << d << ' ' << format_real(graph.bandwidth()) << ' ' << graph.num_edges() << '\n';
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto [i, j] = graph.edges()[e];
    os << i << ' ' << j << ' ' << format_real(graph.weights()[e]);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) os << ' ' << format_real(transports[e](r, c));
    os << '\n';
  }
}

SerializedSheaf read_sheaf(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kMagic) throw std::runtime_error("read_sheaf: bad header");
  int n = 0, d = 0, m = 0;
  double t = 0.0;
  if (!std::getline(is, line)) throw std::runtime_error("read_sheaf: missing size line");
  {
    std::istringstream ls(line);
    if (!(ls >> n >> d >> t >> m) || n < 1 || d < 1 || m < 0) throw std::runtime_error("read_sheaf: bad size line");
  }
  std::vector<Edge> edges;
  std::vector<double> weights;
  TransportSet transports;
  edges.reserve(m);
  weights.reserve(m);
  transports.reserve(m);
  for (int e = 0; e < m; ++e) {
    if (!std::getline(is, line)) throw std::runtime_error("read_sheaf: truncated edge list");
    std::istringstream ls(line);
    Edge edge{};
    double k = 0.0;
    if (!(ls >> edge.i >> edge.j >> k)) throw std::runtime_error("read_sheaf: bad edge line");
    Matrix p(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c)
        if (!(ls >> p(r, c))) throw std::runtime_error("read_sheaf: short transport row");
    edges.push_back(edge);
    weights.push_back(k);
    transports.push_back(std::move(p));
  }
  try {
    return {SheafGraph(n, d, t, std::move(edges), std::move(weights)), std::move(transports)};
  } catch (const std::invalid_argument& ex) {
    throw std::runtime_error(std::string("read_sheaf: ") + ex.what());
  }
}

}  // namespace hilbsheaf
