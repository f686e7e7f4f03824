#pragma once

// Network sheaves built from sampled base points and their block Laplacians.
//
// Each stored edge (i, j) has i < j and carries the transport P_{j->i}, which
// maps the stalk over x_j to the stalk over x_i. The reverse direction uses
// the transpose. The Laplacian has diagonal blocks (sum_r k_ir) I_d and
// off-diagonal blocks B_ij = -k_ij P_{j->i}, B_ji = B_ij^T.

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace hilbsheaf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Edge {
  int i;
  int j;
  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class KernelDistance { Geodesic, Euclidean };

/// Heat-kernel weight exp(-dist^2 / (4 t)).
inline double heat_kernel_weight(double dist, double t) { return std::exp(-dist * dist / (4.0 * t)); }

class SheafGraph {
 public:
  /// Edges must satisfy 0 <= i < j < n without duplicates; weights in (0, 1].
  SheafGraph(int n, int stalk_dim, double bandwidth, std::vector<Edge> edges, std::vector<double> weights);

  int num_nodes() const { return n_; }
  int stalk_dim() const { return d_; }
  double bandwidth() const { return t_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<int> degrees() const;

 private:
  int n_;
  int d_;
  double t_;
  std::vector<Edge> edges_;
  std::vector<double> weights_;
};

/// A graph together with the base points it was built from and the geodesic
/// midpoint of every edge.
template <class Point>
struct SampledSheafGraph {
  std::vector<Point> points;
  SheafGraph graph;
  std::vector<Point> midpoints;
};

/// Symmetrized kNN: (i, j) is an edge if j is among the k nearest of i or
/// vice versa. Ties are broken by the smaller index. Throws when n < k + 1.
SheafGraph knn_graph_from_distances(const Matrix& dist, int k, double bandwidth, int stalk_dim);
SheafGraph complete_graph_from_distances(const Matrix& dist, double bandwidth, int stalk_dim);

/// Symmetric pairwise distance matrix; rows are computed in parallel.
template <class Point, class DistanceFn>
Matrix pairwise_distances(std::span<const Point> points, DistanceFn&& dist) {
  const int n = static_cast<int>(points.size());
  Matrix out = Matrix::Zero(n, n);
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out(i, j) = dist(points[i], points[j]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) out(i, j) = out(j, i);
  return out;
}

template <class Point, class DistanceFn>
SheafGraph build_knn_graph(std::span<const Point> points, int k, double bandwidth, int stalk_dim,
                           DistanceFn&& dist) {
  return knn_graph_from_distances(pairwise_distances(points, dist), k, bandwidth, stalk_dim);
}

template <class Point, class DistanceFn>
SheafGraph build_complete_graph(std::span<const Point> points, double bandwidth, int stalk_dim,
                                DistanceFn&& dist) {
  return complete_graph_from_distances(pairwise_distances(points, dist), bandwidth, stalk_dim);
}

/// One d x d matrix per edge, aligned with SheafGraph::edges(); entry e is P_{j->i}.
using TransportSet = std::vector<Matrix>;

TransportSet identity_transports(int num_edges, int d);

/// Node-to-node transports from midpoint transports: P_{j->i} = P_{i->m}^T P_{j->m}.
TransportSet compose_midpoint_transports(const TransportSet& from_i_to_mid, const TransportSet& from_j_to_mid);

/// Discretized section: one d-vector per node, concatenated.
class Cochain {
 public:
  Cochain(int n, int d) : n_(n), d_(d), values_(Vector::Zero(static_cast<Eigen::Index>(n) * d)) {}
  Cochain(int n, int d, Vector values);

  int num_nodes() const { return n_; }
  int stalk_dim() const { return d_; }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  auto node(int i) { return values_.segment(static_cast<Eigen::Index>(i) * d_, d_); }
  auto node(int i) const { return values_.segment(static_cast<Eigen::Index>(i) * d_, d_); }

 private:
  int n_;
  int d_;
  Vector values_;
};

class BlockSheafLaplacian {
 public:
  struct Neighbor {
    int edge;
    int other;
    bool is_row;  // true when this node is the row index i of the stored block
  };

  int num_nodes() const { return n_; }
  int stalk_dim() const { return d_; }
  int size() const { return n_ * d_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Scalar of the diagonal block (sum of incident weights).
  double degree(int i) const { return degree_[i]; }
  /// The (i, j) block -k_ij P_{j->i} for stored edge e = (i, j).
  Eigen::Map<const Matrix> offdiag_block(int e) const {
    return Eigen::Map<const Matrix>(blocks_.data() + static_cast<std::size_t>(e) * d_ * d_, d_, d_);
  }
  std::span<const Neighbor> neighbors(int i) const {
    return {adj_.data() + adj_offsets_[i], static_cast<std::size_t>(adj_offsets_[i + 1] - adj_offsets_[i])};
  }

  Matrix to_dense() const;
  /// c * L, used to apply the point-cloud normalization.
  BlockSheafLaplacian scaled(double c) const;

 private:
  friend BlockSheafLaplacian assemble_laplacian(const SheafGraph&, const TransportSet&, double);
  BlockSheafLaplacian() = default;

  int n_ = 0;
  int d_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> degree_;
  std::vector<double> blocks_;
  std::vector<int> adj_offsets_;
  std::vector<Neighbor> adj_;
};

/// ||T^T T - I||_F.
double orthogonality_defect(const Matrix& t);

/// Assembles the block Laplacian. Throws std::invalid_argument when a transport
/// is missing or has the wrong shape, and std::domain_error when a transport is
/// not orthogonal to `orthogonality_tol` (Frobenius norm of T^T T - I).
BlockSheafLaplacian assemble_laplacian(const SheafGraph& graph, const TransportSet& transports,
                                       double orthogonality_tol = 1e-6);

/// (L s)_i = sum_j k_ij (s_i - P_{j->i} s_j). Gathers per node in parallel;
/// each node sums its neighbors in adjacency order, so results do not depend
/// on the thread count.
Cochain apply_laplacian(const BlockSheafLaplacian& lap, const Cochain& s);
/// Column-wise application to an nd x F matrix.
Matrix apply_laplacian(const BlockSheafLaplacian& lap, const Matrix& s);

namespace serial {
/// Reference implementation: single pass over edges scattering into both endpoints.
Cochain apply_laplacian(const BlockSheafLaplacian& lap, const Cochain& s);
}  // namespace serial

/// sum_e k_ij ||s_i - P_{j->i} s_j||^2.
double dirichlet_energy(const SheafGraph& graph, const TransportSet& transports, const Cochain& s);

/// Point-cloud Laplacian at a query x:
/// (1/n) sum_j exp(-dist(x, x_j)^2 / 4t) (s(x) - P_{x_j->x} s(x_j)).
Vector point_cloud_extension(const SheafGraph& graph, const TransportSet& transports_to_x, const Cochain& s_values,
                             const Vector& s_at_x, std::span<const double> dist_to_x,
                             double orthogonality_tol = 1e-6);

/// t_n = n^(-1 / (m + 2 + alpha)).
double bandwidth_schedule(int n, int m, double alpha);

}  // namespace hilbsheaf
