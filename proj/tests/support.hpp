#pragma once

// Shared generators for the randomized suites. Every case draws from its own
// Philox stream derived from a fixed master seed, so failures are replayable
// from the printed case index.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include <doctest.h>

#include "hilbsheaf/rng.hpp"
#include "hilbsheaf/sheaf.hpp"
#include "hilbsheaf/spd_geometry.hpp"

namespace testing {

using namespace hilbsheaf;

inline constexpr std::uint64_t kMasterSeed = 0x5eed2024u;
inline constexpr int kCases = 100;

/// Runs `body(rng, case_index)` for kCases independent streams keyed by `tag`.
template <class Body>
void for_cases(std::uint64_t tag, Body&& body, int cases = kCases) {
  for (int c = 0; c < cases; ++c) {
    CAPTURE(c);
    Philox4x32 rng(derive_seed(kMasterSeed, {tag, static_cast<std::uint64_t>(c)}));
    body(rng, c);
  }
}

inline int uniform_int(Philox4x32& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.uniform() * (hi - lo + 1));
}

inline Matrix gaussian_matrix(int rows, int cols, Philox4x32& rng) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

inline Vector gaussian_vector(int n, Philox4x32& rng) { return gaussian_matrix(n, 1, rng).col(0); }

inline Matrix random_symmetric(int p, Philox4x32& rng) {
  const Matrix a = gaussian_matrix(p, p, rng);
  return 0.5 * (a + a.transpose());
}

/// Eigenvalues uniform in [lo, hi].
inline Matrix random_spd_matrix(int p, Philox4x32& rng, double lo = 0.5, double hi = 2.0) {
  const Matrix q = haar_orthogonal(p, rng);
  Vector lambda(p);
  for (int i = 0; i < p; ++i) lambda(i) = rng.uniform(lo, hi);
  Matrix s = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

inline SpdPoint random_spd(int p, Philox4x32& rng) { return SpdPoint(random_spd_matrix(p, rng)); }

/// Connected random graph: a random spanning tree plus extra edges with
/// probability `density`, weights uniform in (0.1, 1].
inline SheafGraph random_graph(int n, int d, double density, Philox4x32& rng) {
  std::set<std::pair<int, int>> pairs;
  for (int v = 1; v < n; ++v) {
    const int u = uniform_int(rng, 0, v - 1);
    pairs.emplace(u, v);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < density) pairs.emplace(i, j);
  std::vector<Edge> edges;
  std::vector<double> weights;
  for (const auto& [i, j] : pairs) {
    edges.push_back({i, j});
    weights.push_back(rng.uniform(0.1, 1.0));
  }
  return SheafGraph(n, d, 0.5, std::move(edges), std::move(weights));
}

inline TransportSet random_transports(const SheafGraph& g, Philox4x32& rng) {
  TransportSet out;
  out.reserve(static_cast<std::size_t>(g.num_edges()));
  for (int e = 0; e < g.num_edges(); ++e) out.push_back(haar_orthogonal(g.stalk_dim(), rng));
  return out;
}

inline Cochain random_cochain(int n, int d, Philox4x32& rng) {
  return Cochain(n, d, gaussian_vector(n * d, rng));
}

/// Cycle C_n with unit weights: edges (i, i+1) and (0, n-1).
inline SheafGraph cycle_graph(int n, int d) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  edges.push_back({0, n - 1});
  return SheafGraph(n, d, 1.0, edges, std::vector<double>(edges.size(), 1.0));
}

/// Scalar weighted graph Laplacian built directly from the edge list.
inline Matrix scalar_graph_laplacian(const SheafGraph& g) {
  Matrix l = Matrix::Zero(g.num_nodes(), g.num_nodes());
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [i, j] = g.edges()[e];
    const double k = g.weights()[e];
    l(i, i) += k;
    l(j, j) += k;
    l(i, j) -= k;
    l(j, i) -= k;
  }
  return l;
}

inline std::vector<int> random_permutation(int n, Philox4x32& rng) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[uniform_int(rng, 0, i)]);
  return perm;
}

/// The graph and transports relabeled by node i -> perm[i]. A stored edge
/// whose endpoints swap order carries the transposed transport.
struct Relabeled {
  SheafGraph graph;
  TransportSet transports;
};

inline Relabeled relabel(const SheafGraph& g, const TransportSet& t, const std::vector<int>& perm) {
  std::vector<Edge> edges;
  TransportSet out;
  for (int e = 0; e < g.num_edges(); ++e) {
    const int a = perm[g.edges()[e].i];
    const int b = perm[g.edges()[e].j];
    if (a < b) {
      edges.push_back({a, b});
      out.push_back(t[e]);
    } else {
      edges.push_back({b, a});
      out.push_back(t[e].transpose());
    }
  }
  return {SheafGraph(g.num_nodes(), g.stalk_dim(), g.bandwidth(), std::move(edges), g.weights()), std::move(out)};
}

/// Moves node block i of an nd x F matrix to block perm[i].
inline Matrix permute_blocks(const Matrix& m, int d, const std::vector<int>& perm) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < perm.size(); ++i)
    out.middleRows(static_cast<Eigen::Index>(perm[i]) * d, d) = m.middleRows(static_cast<Eigen::Index>(i) * d, d);
  return out;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
