#include <algorithm>
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "hilbsheaf/spectral.hpp"
#include "support.hpp"

using namespace hilbsheaf;
using namespace testing;

TEST_CASE("bottom_k_eigenvalues examples") {
  const double c = 2.0 - 2.0 * std::cos(std::numbers::pi / 4);
  const auto c8 = bottom_k_eigenvalues(assemble_laplacian(cycle_graph(8, 1), identity_transports(8, 1)), 3);
  REQUIRE(c8.size() == 3);
  CHECK(c8[0] == 0.0);
  CHECK(std::abs(c8[1] - c) < 1e-12);
  CHECK(std::abs(c8[2] - c) < 1e-12);

  const double k = 0.4;
  const auto path = bottom_k_eigenvalues(assemble_laplacian(SheafGraph(2, 1, 1.0, {{0, 1}}, {k}), {Matrix::Ones(1, 1)}), 2);
  CHECK(path[0] == 0.0);
  CHECK(path[1] == doctest::Approx(2 * k).epsilon(1e-14));
}

TEST_CASE("cycle spectrum with stalk dimension d") {
  for (int d : {1, 2, 3, 5}) {
    const auto ev = bottom_k_eigenvalues(assemble_laplacian(cycle_graph(8, d), identity_transports(8, d)), 8 * d);
    std::vector<double> expect;
    for (int l = 0; l < 8; ++l)
      for (int r = 0; r < d; ++r) expect.push_back(2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * l / 8));
    std::sort(expect.begin(), expect.end());
    CHECK(max_abs_diff(ev, expect) <= 1e-8);
  }
}

TEST_CASE("bottom_k_eigenvalues errors") {
  const BlockSheafLaplacian lap = assemble_laplacian(cycle_graph(8, 2), identity_transports(8, 2));
  CHECK_THROWS_AS(bottom_k_eigenvalues(lap, 0), std::invalid_argument);
  CHECK_THROWS_AS(bottom_k_eigenvalues(lap, 17), std::invalid_argument);
  EigenOptions small;
  small.dense_limit = 15;
  CHECK_THROWS_AS(bottom_k_eigenvalues(lap, 3, small), std::length_error);
  Matrix nonsym = Matrix::Identity(3, 3);
  nonsym(0, 2) = 1.0;
  CHECK_THROWS_AS(bottom_k_eigenvalues(nonsym, 2), std::invalid_argument);
}

TEST_CASE("property: connected identity sheaves have a d-dimensional kernel") {
  for_cases(501, [](Philox4x32& rng, int c) {
    const int n = uniform_int(rng, 2, 12);
    const int d = 1 + c % 4;
    const SheafGraph g = random_graph(n, d, 0.3, rng);
    const auto ev = bottom_k_eigenvalues(assemble_laplacian(g, identity_transports(g.num_edges(), d)), n * d);
    for (int i = 0; i < d; ++i) CHECK(ev[i] == 0.0);
    if (n > 1) CHECK(ev[d] > 0.0);
  });
}

TEST_CASE("property: identity sheaf spectrum is the graph spectrum with multiplicity d") {
  for_cases(502, [](Philox4x32& rng, int c) {
    const int n = uniform_int(rng, 2, 20);
    const int d = 1 + c % 5;
    const SheafGraph g = random_graph(n, d, 0.3, rng);
    const auto ev = bottom_k_eigenvalues(assemble_laplacian(g, identity_transports(g.num_edges(), d)), n * d);
    const Vector scalar = Eigen::SelfAdjointEigenSolver<Matrix>(scalar_graph_laplacian(g)).eigenvalues();
    std::vector<double> expect;
    for (double v : scalar)
      for (int r = 0; r < d; ++r) expect.push_back(std::max(v, 0.0));
    std::sort(expect.begin(), expect.end());
    CHECK(max_abs_diff(ev, expect) <= 1e-8);
  });
}

TEST_CASE("property: gauge changes leave the spectrum invariant") {
  for_cases(503, [](Philox4x32& rng, int c) {
    const int n = uniform_int(rng, 2, 12);
    const int d = 1 + c % 4;
    const SheafGraph g = random_graph(n, d, 0.3, rng);
    const TransportSet t = random_transports(g, rng);
    std::vector<Matrix> q;
    for (int i = 0; i < n; ++i) q.push_back(haar_orthogonal(d, rng));
    TransportSet gauged;
    for (int e = 0; e < g.num_edges(); ++e) {
      const auto [i, j] = g.edges()[e];
      gauged.push_back(q[i] * t[e] * q[j].transpose());
    }
    const auto a = bottom_k_eigenvalues(assemble_laplacian(g, t), n * d);
    const auto b = bottom_k_eigenvalues(assemble_laplacian(g, gauged), n * d);
    CHECK(max_abs_diff(a, b) <= 1e-9);
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i] >= a[i - 1]);
    CHECK(a.front() >= -1e-9 * a.back());
  });
}

TEST_CASE("property: Rayleigh quotients lie inside the spectrum") {
  Philox4x32 rng0(504);
  const SheafGraph g = random_graph(12, 3, 0.3, rng0);
  const BlockSheafLaplacian lap = assemble_laplacian(g, random_transports(g, rng0));
  const auto ev = bottom_k_eigenvalues(lap, lap.size());
  for_cases(505, [&](Philox4x32& rng, int) {
    const Cochain s = random_cochain(12, 3, rng);
    const double q = s.values().dot(apply_laplacian(lap, s).values()) / s.values().squaredNorm();
    CHECK(q >= ev.front() - 1e-12);
    CHECK(q <= ev.back() + 1e-12);
  });
}

TEST_CASE("spectral metric examples") {
  const std::vector<double> a{0.0, 1.0, 2.0};
  CHECK(spec_l2(a, a, 3) == 0.0);
  CHECK(spec_rel_max(a, a, 3) == 0.0);
  CHECK(spec_l2(std::vector<double>{3.0}, std::vector<double>{1.0}, 1) == 2.0);
  CHECK(spec_l2(std::vector<double>{0.0, 2.0}, std::vector<double>{0.0, 0.0}, 2) == 1.0);
  CHECK(spec_rel_max(std::vector<double>{0.0, 1.0}, std::vector<double>{0.0, 2.0}, 2) == 0.5);
  CHECK_THROWS_AS(spec_rel_max(std::vector<double>{1.0, 1.0}, std::vector<double>{0.0, 0.0}, 2), std::domain_error);
  CHECK_THROWS(spec_l2(a, std::vector<double>{0.0}, 2));
}

TEST_CASE("property: spec_rel_max is scale invariant and both metrics are non-negative") {
  for_cases(506, [](Philox4x32& rng, int) {
    const int k = uniform_int(rng, 1, 8);
    std::vector<double> e(k), r(k);
    for (int i = 0; i < k; ++i) {
      e[i] = rng.uniform(0.0, 3.0);
      r[i] = rng.uniform(0.1, 3.0);
    }
    const double c = rng.uniform(0.1, 10.0);
    std::vector<double> ec(k), rc(k);
    for (int i = 0; i < k; ++i) {
      ec[i] = c * e[i];
      rc[i] = c * r[i];
    }
    CHECK(spec_rel_max(ec, rc, k) == doctest::Approx(spec_rel_max(e, r, k)).epsilon(1e-12));
    CHECK(spec_rel_max(e, r, k) >= 0.0);
    CHECK(spec_l2(e, r, k) >= 0.0);
  });
}

TEST_CASE("spectral report") {
  const std::vector<double> ref{0.0, 1.0, 2.0};
  const SpectralReport r = make_spectral_report(10, 3, {0.0, 1.5, 2.0}, 20, ref);
  CHECK(r.k == 3);
  CHECK(r.spec_l2 == doctest::Approx(0.5 / 3));
  CHECK(r.spec_rel_max == doctest::Approx(0.25));
}
