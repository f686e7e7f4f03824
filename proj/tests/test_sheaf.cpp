#include <cmath>
#include <sstream>

#include <doctest.h>

#include "hilbsheaf/parallel.hpp"
#include "hilbsheaf/sheaf.hpp"
#include "hilbsheaf/sheaf_io.hpp"
#include "hilbsheaf/spd_geometry.hpp"
#include "support.hpp"

using namespace hilbsheaf;
using namespace testing;

TEST_CASE("SheafGraph rejects malformed edge lists") {
  CHECK_THROWS_AS(SheafGraph(3, 1, 1.0, {{1, 1}}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SheafGraph(3, 1, 1.0, {{2, 1}}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SheafGraph(3, 1, 1.0, {{0, 1}, {0, 1}}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SheafGraph(3, 1, 1.0, {{0, 1}}, {1.5}), std::invalid_argument);
  CHECK_THROWS_AS(SheafGraph(3, 1, 0.0, {{0, 1}}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SheafGraph(3, 1, 1.0, {{0, 3}}, {1.0}), std::invalid_argument);
}

TEST_CASE("knn graph examples") {
  CHECK(heat_kernel_weight(0.0, 0.3) == 1.0);

  const std::vector<double> angles{0.0, 0.1, 0.2};
  const Matrix dist = pairwise_distances<double>(angles, [](double a, double b) { return std::abs(a - b); });
  const SheafGraph g = knn_graph_from_distances(dist, 2, 0.5, 1);
  CHECK(g.num_edges() == 3);
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [i, j] = g.edges()[e];
    CHECK(g.weights()[e] == doctest::Approx(std::exp(-dist(i, j) * dist(i, j) / 2.0)).epsilon(1e-12));
  }
  CHECK_THROWS(knn_graph_from_distances(dist, 3, 0.5, 1));

  const auto pts = sample_spd(3, 50, std::uint64_t{4});
  const SheafGraph h = build_knn_graph<SpdPoint>(pts, 8, 0.5, 6, [](const SpdPoint& a, const SpdPoint& b) {
    return bures_wasserstein_distance(a, b);
  });
  for (int deg : h.degrees()) CHECK(deg >= 8);
  for (int e = 0; e < h.num_edges(); ++e) {
    const auto [i, j] = h.edges()[e];
    CHECK(i < j);
    const double dij = bures_wasserstein_distance(pts[i], pts[j]);
    CHECK(std::abs(h.weights()[e] - std::exp(-dij * dij / 2.0)) < 1e-12);
  }
}

TEST_CASE("knn ties go to the smaller index") {
  // Node 0 is equidistant from 1, 2 and 3.
  Matrix dist(4, 4);
  dist << 0, 1, 1, 1,  //
      1, 0, 5, 5,      //
      1, 5, 0, 5,      //
      1, 5, 5, 0;
  const SheafGraph g = knn_graph_from_distances(dist, 1, 1.0, 1);
  // 0 picks 1; 1, 2, 3 each pick 0.
  CHECK(g.num_edges() == 3);
  const SheafGraph two = knn_graph_from_distances(dist.topLeftCorner(3, 3), 1, 1.0, 1);
  CHECK(two.edges() == std::vector<Edge>{{0, 1}, {0, 2}});
}

TEST_CASE("assemble_laplacian examples") {
  const double k = 0.37;
  const SheafGraph path(2, 1, 1.0, {{0, 1}}, {k});
  Matrix expect(2, 2);
  expect << k, -k, -k, k;
  CHECK(assemble_laplacian(path, identity_transports(1, 1)).to_dense() == expect);

  CHECK_THROWS_AS(assemble_laplacian(path, TransportSet{}), std::invalid_argument);
  CHECK_THROWS_AS(assemble_laplacian(path, TransportSet{Matrix::Identity(2, 2)}), std::invalid_argument);
  CHECK_THROWS_AS(assemble_laplacian(path, TransportSet{Matrix::Constant(1, 1, 1.1)}), std::domain_error);
  CHECK_NOTHROW(assemble_laplacian(path, TransportSet{Matrix::Constant(1, 1, 1.1)}, 0.5));
}

TEST_CASE("property: identity transports give graph Laplacian tensor I_d exactly") {
  for_cases(201, [](Philox4x32& rng, int c) {
    const int n = uniform_int(rng, 2, 12);
    const int d = 1 + c % 4;
    const SheafGraph g = random_graph(n, d, 0.3, rng);
    const Matrix sheaf = assemble_laplacian(g, identity_transports(g.num_edges(), d)).to_dense();
    const Matrix scalar = scalar_graph_laplacian(g);
    Matrix kron = Matrix::Zero(n * d, n * d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) kron.block(i * d, j * d, d, d) = scalar(i, j) * Matrix::Identity(d, d);
    CHECK((sheaf - kron).norm() == 0.0);
  });
}

TEST_CASE("property: block structure, symmetry and PSD") {
  for_cases(202, [](Philox4x32& rng, int c) {
    const int n = uniform_int(rng, 2, 15);
    const int d = 1 + c % 5;
    const SheafGraph g = random_graph(n, d, 0.3, rng);
    const TransportSet t = random_transports(g, rng);
    const BlockSheafLaplacian lap = assemble_laplacian(g, t);
    const Matrix dense = lap.to_dense();
    CHECK((dense - dense.transpose()).norm() == 0.0);
    std::vector<double> deg(n, 0.0);
    for (int e = 0; e < g.num_edges(); ++e) {
      const auto [i, j] = g.edges()[e];
      deg[i] += g.weights()[e];
      deg[j] += g.weights()[e];
      CHECK((dense.block(i * d, j * d, d, d) + g.weights()[e] * t[e]).norm() == 0.0);
      CHECK((dense.block(j * d, i * d, d, d) - dense.block(i * d, j * d, d, d).transpose()).norm() <= 1e-12);
    }
    for (int i = 0; i < n; ++i) CHECK(dense.block(i * d, i * d, d, d) == deg[i] * Matrix::Identity(d, d));
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(dense).eigenvalues();
    CHECK(ev(0) >= -1e-9 * ev(ev.size() - 1));
  });
}

TEST_CASE("property: Dirichlet energy identity and dense oracle") {
  for_cases(203, [](Philox4x32& rng, int c) {
    const int n = uniform_int(rng, 2, 15);
    const int d = 1 + c % 4;
    const SheafGraph g = random_graph(n, d, 0.3, rng);
    const TransportSet t = random_transports(g, rng);
    const BlockSheafLaplacian lap = assemble_laplacian(g, t);
    const Cochain s = random_cochain(n, d, rng);
    const Vector ls = apply_laplacian(lap, s).values();
    CHECK((ls - lap.to_dense() * s.values()).norm() <= 1e-10 * std::max(1.0, ls.norm()));
    const double energy = dirichlet_energy(g, t, s);
    CHECK(std::abs(s.values().dot(ls) - energy) <= 1e-10 * std::max(1.0, energy));
  });
}

TEST_CASE("property: permutation equivariance") {
  for_cases(204, [](Philox4x32& rng, int c) {
    const int n = uniform_int(rng, 2, 12);
    const int d = 1 + c % 3;
    const SheafGraph g = random_graph(n, d, 0.3, rng);
    const TransportSet t = random_transports(g, rng);
    const auto perm = random_permutation(n, rng);
    const Relabeled r = relabel(g, t, perm);
    const Cochain s = random_cochain(n, d, rng);
    const Matrix ls = apply_laplacian(assemble_laplacian(g, t), Matrix(s.values()));
    const Matrix lps = apply_laplacian(assemble_laplacian(r.graph, r.transports), permute_blocks(s.values(), d, perm));
    CHECK((lps - permute_blocks(ls, d, perm)).norm() <= 1e-12 * std::max(1.0, ls.norm()));
  });
}

TEST_CASE("property: serial and parallel application agree bit for bit") {
  const int saved = max_threads();
  set_threads(4);
  for_cases(205, [](Philox4x32& rng, int c) {
    const int n = uniform_int(rng, 2, 40);
    const int d = 1 + c % 4;
    const SheafGraph g = random_graph(n, d, 0.2, rng);
    const BlockSheafLaplacian lap = assemble_laplacian(g, random_transports(g, rng));
    const Cochain s = random_cochain(n, d, rng);
    CHECK(apply_laplacian(lap, s).values() == serial::apply_laplacian(lap, s).values());
  });
  set_threads(saved);
}

TEST_CASE("apply_laplacian examples") {
  Philox4x32 rng(206);
  // Transport-consistent cochain on a tree: s_i = P_{j->i} s_j along every edge.
  const int n = 6, d = 3;
  std::vector<Edge> edges{{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}};
  const SheafGraph tree(n, d, 1.0, edges, {0.3, 0.5, 0.7, 0.9, 1.0});
  const TransportSet t = random_transports(tree, rng);
  Cochain s(n, d);
  s.node(0) = gaussian_vector(d, rng);
  for (int e = 0; e < tree.num_edges(); ++e) s.node(edges[e].j) = t[e].transpose() * s.node(edges[e].i);
  const BlockSheafLaplacian lap = assemble_laplacian(tree, t);
  CHECK(apply_laplacian(lap, s).values().norm() < 1e-14);
  CHECK(apply_laplacian(lap, Cochain(n, d)).values().norm() == 0.0);
  CHECK_THROWS_AS(apply_laplacian(lap, Cochain(n, d + 1)), std::invalid_argument);
}

TEST_CASE("point_cloud_extension examples") {
  const SheafGraph one(1, 2, 0.5, {}, {});
  Cochain s(1, 2);
  s.node(0) << 1.0, -2.0;
  Vector sx(2);
  sx << 3.0, 5.0;
  const std::vector<double> zero{0.0};
  CHECK((point_cloud_extension(one, identity_transports(1, 2), s, sx, zero) - (sx - s.node(0))).norm() < 1e-15);

  // Query at a sample point with consistent values: that term vanishes.
  Philox4x32 rng(207);
  const Matrix q = haar_orthogonal(2, rng);
  const Vector at_x = q * s.node(0);
  CHECK(point_cloud_extension(one, TransportSet{q}, s, at_x, zero).norm() < 1e-14);
  CHECK_THROWS_AS(point_cloud_extension(one, identity_transports(2, 2), s, sx, zero), std::invalid_argument);
  CHECK_THROWS_AS(point_cloud_extension(one, TransportSet{2.0 * q}, s, sx, zero), std::domain_error);
}

TEST_CASE("bandwidth_schedule") {
  CHECK(bandwidth_schedule(1, 3, 0.7) == 1.0);
  CHECK(bandwidth_schedule(16, 1, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  for (int n = 1; n < 200; ++n) CHECK(bandwidth_schedule(n + 1, 2, 1.0) < bandwidth_schedule(n, 2, 1.0));
  CHECK_THROWS_AS(bandwidth_schedule(10, 1, 0.0), std::invalid_argument);
}

TEST_CASE("midpoint composition") {
  Philox4x32 rng(208);
  const Matrix a = haar_orthogonal(4, rng), b = haar_orthogonal(4, rng);
  const TransportSet out = compose_midpoint_transports({a}, {b});
  CHECK((out[0] - a.transpose() * b).norm() < 1e-15);
}

TEST_CASE("property: sheaf text format round-trips exactly") {
  for_cases(209, [](Philox4x32& rng, int c) {
    const int n = uniform_int(rng, 2, 10);
    const int d = 1 + c % 4;
    const SheafGraph g = random_graph(n, d, 0.4, rng);
    const TransportSet t = random_transports(g, rng);
    std::stringstream ss;
    write_sheaf(ss, g, t);
    const SerializedSheaf back = read_sheaf(ss);
    CHECK(back.graph.num_nodes() == n);
    CHECK(back.graph.stalk_dim() == d);
    CHECK(back.graph.bandwidth() == g.bandwidth());
    CHECK(back.graph.edges() == g.edges());
    CHECK(back.graph.weights() == g.weights());
    for (int e = 0; e < g.num_edges(); ++e) CHECK(back.transports[e] == t[e]);
  });
}

TEST_CASE("sheaf text format errors") {
  std::istringstream bad_header("nope\n");
  CHECK_THROWS_AS(read_sheaf(bad_header), std::runtime_error);
  std::istringstream truncated("hilbsheaf-sheaf v1\n3 1 0.5 2\n0 1 1 1\n");
  CHECK_THROWS_AS(read_sheaf(truncated), std::runtime_error);
  std::istringstream self_loop("hilbsheaf-sheaf v1\n3 1 0.5 1\n1 1 1 1\n");
  CHECK_THROWS_AS(read_sheaf(self_loop), std::runtime_error);
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_short(0.1) == "0.1");
}
