#include "hilbsheaf/sheaf.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <utility>

namespace hilbsheaf {

SheafGraph::SheafGraph(int n, int stalk_dim, double bandwidth, std::vector<Edge> edges, std::vector<double> weights)
    : n_(n), d_(stalk_dim), t_(bandwidth), edges_(std::move(edges)), weights_(std::move(weights)) {
  if (n_ < 1 || d_ < 1) throw std::invalid_argument("SheafGraph: n and stalk_dim must be positive");
  if (!(t_ > 0.0)) throw std::invalid_argument("SheafGraph: bandwidth must be positive");
  if (edges_.size() != weights_.size()) throw std::invalid_argument("SheafGraph: one weight per edge required");
  std::set<std::pair<int, int>> seen;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto [i, j] = edges_[e];
    if (i < 0 || j >= n_ || i >= j) throw std::invalid_argument("SheafGraph: edges must satisfy 0 <= i < j < n");
    if (!seen.emplace(i, j).second) throw std::invalid_argument("SheafGraph: duplicate edge");
    if (!(weights_[e] > 0.0 && weights_[e] <= 1.0)) throw std::invalid_argument("SheafGraph: weight outside (0, 1]");
  }
}

std::vector<int> SheafGraph::degrees() const {
  std::vector<int> deg(n_, 0);
  for (const auto& e : edges_) {
    ++deg[e.i];
    ++deg[e.j];
  }
  return deg;
}

namespace {

SheafGraph graph_from_pairs(const std::set<std::pair<int, int>>& pairs, const Matrix& dist, double t, int d) {
  std::vector<Edge> edges;
  std::vector<double> weights;
  edges.reserve(pairs.size());
  weights.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    edges.push_back({i, j});
    weights.push_back(heat_kernel_weight(dist(i, j), t));
  }
  return SheafGraph(static_cast<int>(dist.rows()), d, t, std::move(edges), std::move(weights));
}

}  // namespace

SheafGraph knn_graph_from_distances(const Matrix& dist, int k, double bandwidth, int stalk_dim) {
  const int n = static_cast<int>(dist.rows());
  if (k < 1) throw std::invalid_argument("knn graph: k must be >= 1");
  if (n < k + 1) throw std::invalid_argument("knn graph: need at least k + 1 points");
  std::set<std::pair<int, int>> pairs;
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::erase(order, i);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
      if (dist(i, a) != dist(i, b)) return dist(i, a) < dist(i, b);
      return a < b;
    });
    for (int r = 0; r < k; ++r) pairs.emplace(std::min(i, order[r]), std::max(i, order[r]));
    order.resize(n);
  }
  return graph_from_pairs(pairs, dist, bandwidth, stalk_dim);
}

SheafGraph complete_graph_from_distances(const Matrix& dist, double bandwidth, int stalk_dim) {
  const int n = static_cast<int>(dist.rows());
  std::vector<Edge> edges;
  std::vector<double> weights;
  edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  weights.reserve(edges.capacity());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      edges.push_back({i, j});
      weights.push_back(heat_kernel_weight(dist(i, j), bandwidth));
    }
  return SheafGraph(n, stalk_dim, bandwidth, std::move(edges), std::move(weights));
}

TransportSet identity_transports(int num_edges, int d) { return TransportSet(num_edges, Matrix::Identity(d, d)); }

TransportSet compose_midpoint_transports(const TransportSet& from_i_to_mid, const TransportSet& from_j_to_mid) {
  if (from_i_to_mid.size() != from_j_to_mid.size())
    throw std::invalid_argument("compose_midpoint_transports: size mismatch");
  TransportSet out(from_i_to_mid.size());
  for (std::size_t e = 0; e < out.size(); ++e) out[e] = from_i_to_mid[e].transpose() * from_j_to_mid[e];
  return out;
}

Cochain::Cochain(int n, int d, Vector values) : n_(n), d_(d), values_(std::move(values)) {
  if (values_.size() != static_cast<Eigen::Index>(n) * d) throw std::invalid_argument("Cochain: length != n * d");
}

double orthogonality_defect(const Matrix& t) {
  return (t.transpose() * t - Matrix::Identity(t.cols(), t.cols())).norm();
}

BlockSheafLaplacian assemble_laplacian(const SheafGraph& graph, const TransportSet& transports,
                                       double orthogonality_tol) {
  const int m = graph.num_edges();
  const int d = graph.stalk_dim();
  if (static_cast<int>(transports.size()) != m) throw std::invalid_argument("assemble_laplacian: missing transport");
  for (const auto& p : transports)
    if (p.rows() != d || p.cols() != d) throw std::invalid_argument("assemble_laplacian: transport has wrong shape");

  BlockSheafLaplacian lap;
  lap.n_ = graph.num_nodes();
  lap.d_ = d;
  lap.edges_ = graph.edges();
  lap.blocks_.assign(static_cast<std::size_t>(m) * d * d, 0.0);

  const auto& w = graph.weights();
  int bad_edge = -1;
#pragma omp parallel for schedule(static)
  for (int e = 0; e < m; ++e) {
    if (orthogonality_defect(transports[e]) > orthogonality_tol) {
#pragma omp critical(hilbsheaf_assemble_bad)
      bad_edge = (bad_edge < 0 || e < bad_edge) ? e : bad_edge;
      continue;
    }
    Eigen::Map<Matrix> block(lap.blocks_.data() + static_cast<std::size_t>(e) * d * d, d, d);
    block = -w[e] * transports[e];
  }
  if (bad_edge >= 0)
    throw std::domain_error("assemble_laplacian: transport on edge " + std::to_string(bad_edge) +
                            " is not orthogonal within tolerance");

  // Ascending edge order keeps the diagonal bit-reproducible.
  lap.degree_.assign(lap.n_, 0.0);
  std::vector<int> count(lap.n_ + 1, 0);
  for (int e = 0; e < m; ++e) {
    const auto [i, j] = lap.edges_[e];
    lap.degree_[i] += w[e];
    lap.degree_[j] += w[e];
    ++count[i + 1];
    ++count[j + 1];
  }
  lap.adj_offsets_.assign(lap.n_ + 1, 0);
  std::partial_sum(count.begin(), count.end(), lap.adj_offsets_.begin());
  lap.adj_.resize(static_cast<std::size_t>(2) * m);
  std::vector<int> fill(lap.adj_offsets_.begin(), lap.adj_offsets_.end() - 1);
  for (int e = 0; e < m; ++e) {
    const auto [i, j] = lap.edges_[e];
    lap.adj_[fill[i]++] = {e, j, true};
    lap.adj_[fill[j]++] = {e, i, false};
  }
  return lap;
}

Matrix BlockSheafLaplacian::to_dense() const {
  const int nd = size();
  Matrix out = Matrix::Zero(nd, nd);
  for (int i = 0; i < n_; ++i) out.block(i * d_, i * d_, d_, d_).diagonal().setConstant(degree_[i]);
  for (int e = 0; e < num_edges(); ++e) {
    const auto [i, j] = edges_[e];
    const auto b = offdiag_block(e);
    out.block(i * d_, j * d_, d_, d_) = b;
    out.block(j * d_, i * d_, d_, d_) = b.transpose();
  }
  return out;
}

BlockSheafLaplacian BlockSheafLaplacian::scaled(double c) const {
  BlockSheafLaplacian out = *this;
  for (double& v : out.degree_) v *= c;
  for (double& v : out.blocks_) v *= c;
  return out;
}

namespace {

void apply_column(const BlockSheafLaplacian& lap, const double* in, double* out) {
  const int n = lap.num_nodes();
  const int d = lap.stalk_dim();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    Eigen::Map<const Vector> si(in + static_cast<std::size_t>(i) * d, d);
    Eigen::Map<Vector> oi(out + static_cast<std::size_t>(i) * d, d);
    oi = lap.degree(i) * si;
    for (const auto& nb : lap.neighbors(i)) {
      Eigen::Map<const Vector> sj(in + static_cast<std::size_t>(nb.other) * d, d);
      if (nb.is_row)
        oi.noalias() += lap.offdiag_block(nb.edge) * sj;
      else
        oi.noalias() += lap.offdiag_block(nb.edge).transpose() * sj;
    }
  }
}

}  // namespace

Cochain apply_laplacian(const BlockSheafLaplacian& lap, const Cochain& s) {
  if (s.num_nodes() != lap.num_nodes() || s.stalk_dim() != lap.stalk_dim())
    throw std::invalid_argument("apply_laplacian: dimension mismatch");
  Cochain out(lap.num_nodes(), lap.stalk_dim());
  apply_column(lap, s.values().data(), out.values().data());
  return out;
}

Matrix apply_laplacian(const BlockSheafLaplacian& lap, const Matrix& s) {
  if (s.rows() != lap.size()) throw std::invalid_argument("apply_laplacian: dimension mismatch");
  Matrix out(s.rows(), s.cols());
  for (Eigen::Index c = 0; c < s.cols(); ++c) apply_column(lap, s.col(c).data(), out.col(c).data());
  return out;
}

namespace serial {

Cochain apply_laplacian(const BlockSheafLaplacian& lap, const Cochain& s) {
  if (s.num_nodes() != lap.num_nodes() || s.stalk_dim() != lap.stalk_dim())
    throw std::invalid_argument("apply_laplacian: dimension mismatch");
  Cochain out(lap.num_nodes(), lap.stalk_dim());
  for (int i = 0; i < lap.num_nodes(); ++i) out.node(i) = lap.degree(i) * s.node(i);
  for (int e = 0; e < lap.num_edges(); ++e) {
    const auto [i, j] = lap.edges()[e];
    const auto b = lap.offdiag_block(e);
    out.node(i) += b * s.node(j);
    out.node(j) += b.transpose() * s.node(i);
  }
  return out;
}

}  // namespace serial

double dirichlet_energy(const SheafGraph& graph, const TransportSet& transports, const Cochain& s) {
  double total = 0.0;
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto [i, j] = graph.edges()[e];
    total += graph.weights()[e] * (s.node(i) - transports[e] * s.node(j)).squaredNorm();
  }
  return total;
}

Vector point_cloud_extension(const SheafGraph& graph, const TransportSet& transports_to_x, const Cochain& s_values,
                             const Vector& s_at_x, std::span<const double> dist_to_x, double orthogonality_tol) {
  const int n = graph.num_nodes();
  const int d = graph.stalk_dim();
  if (s_values.num_nodes() != n || s_values.stalk_dim() != d || s_at_x.size() != d ||
      static_cast<int>(transports_to_x.size()) != n || static_cast<int>(dist_to_x.size()) != n)
    throw std::invalid_argument("point_cloud_extension: dimension mismatch");
  Vector acc = Vector::Zero(d);
  for (int j = 0; j < n; ++j) {
    const Matrix& p = transports_to_x[j];
    if (p.rows() != d || p.cols() != d) throw std::invalid_argument("point_cloud_extension: transport shape");
    if (orthogonality_defect(p) > orthogonality_tol)
      throw std::domain_error("point_cloud_extension: transport not orthogonal");
    acc += heat_kernel_weight(dist_to_x[j], graph.bandwidth()) * (s_at_x - p * s_values.node(j));
  }
  return acc / static_cast<double>(n);
}

double bandwidth_schedule(int n, int m, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("bandwidth_schedule: alpha must be positive");
  if (n < 1 || m < 1) throw std::invalid_argument("bandwidth_schedule: n and m must be positive");
  return std::pow(static_cast<double>(n), -1.0 / (m + 2.0 + alpha));
}

}  // namespace hilbsheaf
