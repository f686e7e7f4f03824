#include <sstream>
#include <string>

#include <doctest.h>

#include "hilbsheaf/config.hpp"
#include "hilbsheaf/experiments.hpp"
#include "hilbsheaf/parallel.hpp"
#include "support.hpp"

using namespace hilbsheaf;
using namespace testing;

namespace {

KeyValueFile parse(const std::string& text) {
  std::istringstream is(text);
  return KeyValueFile::parse(is);
}

template <class Config, class Result>
std::string render(const Config& cfg, std::uint64_t seed, const Result& r) {
  std::ostringstream os;
  write_csv(os, cfg, seed, r);
  return os.str();
}

// Runs `make()` single-threaded and with 3 threads and returns both renderings.
template <class Make>
std::pair<std::string, std::string> under_thread_counts(Make&& make) {
  const int saved = max_threads();
  set_threads(1);
  std::string one = make();
  set_threads(3);
  std::string three = make();
  set_threads(saved);
  return {std::move(one), std::move(three)};
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("key-value files") {
  const KeyValueFile kv = parse("# comment\n\na = 1\nb=two words  \nlist = 1, 2 3\nflag = yes\n");
  CHECK(kv.get_int("a", 0) == 1);
  CHECK(kv.get_string("b", "") == "two words");
  CHECK(kv.get_ints("list") == std::vector<long long>{1, 2, 3});
  CHECK(kv.get_bool("flag", false));
  CHECK(kv.get_double("missing", 2.5) == 2.5);
  CHECK_THROWS_AS(parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse("a = x\n").get_int("a", 0), ConfigError);
  CHECK_THROWS_AS(parse("a = 1.5\n").get_int("a", 0), ConfigError);
  CHECK_THROWS_AS(parse("a = maybe\n").get_bool("a", false), ConfigError);
  CHECK_THROWS_AS(KeyValueFile::load("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("config defaults mirror the documented hyperparameters") {
  const TransportRecoveryConfig t = transport_recovery_config(parse(""));
  CHECK(t.p == 4);
  CHECK(t.n_grid == std::vector<int>{16, 32, 64, 128, 256});
  CHECK(t.knn == 8);
  CHECK(t.t == 0.5);
  CHECK(t.reflections == 16);
  CHECK(t.euler_steps == 50);
  CHECK(t.seeds == 3);
  const SpectralStabilityConfig s = spectral_stability_config(parse(""));
  CHECK(s.k_eig == 32);
  CHECK(s.seeds == 5);
  CHECK(s.dense_limit == 10000);
  const CircleConvergenceConfig c = circle_convergence_config(parse(""));
  CHECK(c.n_grid == std::vector<int>{256, 512, 1024, 2048, 4096});
  CHECK(c.alpha == 1.0);
  CHECK(c.seeds == 10);
  CHECK(c.queries == 32);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(transport_recovery_config(parse("bogus = 1\n")), ConfigError);
  CHECK_THROWS_AS(transport_recovery_config(parse("experiment = circle-convergence\n")), ConfigError);
  CHECK_THROWS_AS(transport_recovery_config(parse("p = 0\n")), ConfigError);
  CHECK_THROWS_AS(transport_recovery_config(parse("t = -1\n")), ConfigError);
  CHECK_THROWS_AS(transport_recovery_config(parse("n_grid = 32, 16\n")), ConfigError);
  CHECK_THROWS_AS(transport_recovery_config(parse("n_grid = 8, 16\n")), ConfigError);
  CHECK_THROWS_AS(transport_recovery_config(parse("classes = free, banded\n")), ConfigError);
  CHECK_THROWS_AS(transport_recovery_config(parse("target = edge\n")), ConfigError);
  CHECK_THROWS_AS(transport_recovery_config(parse("optimizer = sgd\n")), ConfigError);
  CHECK_THROWS_AS(spectral_stability_config(parse("n_grid = 50, 1000\n")), ConfigError);
  CHECK_THROWS_AS(spectral_stability_config(parse("k_eig = 500\n")), ConfigError);
  CHECK_THROWS_AS(spectral_stability_config(parse("p = 2, 3\nn_max = 800, 400, 200\n")), ConfigError);
  CHECK_THROWS_AS(circle_convergence_config(parse("sections = sin, tan\n")), ConfigError);
  CHECK_THROWS_AS(circle_convergence_config(parse("distance = taxicab\n")), ConfigError);
  CHECK_THROWS_AS(gaussian_oracle_config(parse("trials = 100\n")), ConfigError);

  const SpectralStabilityConfig per_p = spectral_stability_config(parse("p = 2, 3\nn_max = 800, 500\n"));
  CHECK(per_p.reference_n(0) == 800);
  CHECK(per_p.reference_n(1) == 500);
}

TEST_CASE("dense limit is enforced before any eigensolve") {
  SpectralStabilityConfig cfg;
  cfg.n_max = {4000};
  cfg.n_grid = {50};
  CHECK_THROWS_AS(run_spectral_stability(cfg, 0), std::length_error);
}

TEST_CASE("CSV comment line and header") {
  GaussianOracleConfig cfg;
  cfg.trials = 10000;
  const std::string csv = render(cfg, 42, run_gaussian_oracle(cfg, 42));
  const std::string head = first_line(csv);
  CHECK(head.rfind("# hilbsheaf " + code_version() + " experiment=gaussian-oracle rng=philox4x32-10 seed=42", 0) == 0);
  CHECK(head.find("trials=10000") != std::string::npos);
  CHECK(csv.find("\nquantity,estimate,target,std_error\n") != std::string::npos);
}

TEST_CASE("spectral self-reference is exactly zero") {
  SpectralStabilityConfig cfg;
  cfg.n_grid = {20, 40};
  cfg.n_max = {40};
  cfg.k_eig = 8;
  cfg.seeds = 2;
  cfg.knn = 4;
  cfg.euler_steps = 10;
  const SpectralStabilityResult r = run_spectral_stability(cfg, 5);
  for (const auto& row : r.rows) {
    CHECK(row.spec_l2 >= 0.0);
    CHECK(row.spec_rel_max >= 0.0);
    if (row.n == 40) {
      CHECK(row.spec_l2 == 0.0);
      CHECK(row.spec_rel_max == 0.0);
    }
    CHECK(row.eigenvalues.size() == 8);
  }
  CHECK(r.summary.size() == 2);
}

TEST_CASE("transport recovery on a small grid") {
  TransportRecoveryConfig cfg;
  cfg.p = 2;
  cfg.n_grid = {12};
  cfg.knn = 4;
  cfg.seeds = 2;
  cfg.reflections = 4;
  cfg.iterations = 3000;
  const TransportRecoveryResult r = run_transport_recovery(cfg, 1);
  REQUIRE(r.rows.size() == 3);
  for (const auto& row : r.rows) {
    CHECK(row.empirical.size() == 2);
    if (row.cls == "free") CHECK(row.empirical_mean <= 1e-6);
    if (row.cls == "frozen") CHECK(row.empirical == row.theory_per_seed);
  }
  CHECK(validate(r).empty());
  std::ostringstream edges;
  write_edges_csv(edges, cfg, 1, r);
  CHECK(edges.str().find("\nn,seed,edge_i,edge_j,class,final_loss,best_loss,plateau,iterations\n") != std::string::npos);
}

TEST_CASE("validation flags broken results") {
  TransportRecoveryResult t;
  t.rows.push_back({16, "free", 1e-3, 0.0, 0.0, {1e-3}, {0.0}});
  t.rows.push_back({16, "circulant", 0.05, 0.0, 0.05, {0.05}, {0.05}});
  t.rows.push_back({16, "frozen", 0.04, 0.0, 0.04, {0.04}, {0.04}});
  CHECK(validate(t).size() == 2);

  CircleConvergenceResult c;
  c.summary = {{256, "sin", 0.1, 0.1}, {4096, "sin", 0.09, 0.09}, {256, "constant", 0.0, 0.0}};
  c.rows = {{256, 1.0, 0.2, "constant", 0, 0.0, 1e-18}};
  CHECK(validate(c).size() == 2);

  GaussianOracleReport g;
  g.first_moment = 1.0;
  g.first_moment_se = 0.1;
  g.covariance_max_rel_residual = 0.02;
  g.odd_moment_ratio = 1.0;
  CHECK(validate(g).size() == 3);
}

TEST_CASE("property: CSV output is byte-identical across runs and worker counts") {
  for_cases(701, [](Philox4x32& rng, int c) {
    const auto seed = static_cast<std::uint64_t>(rng());
    std::pair<std::string, std::string> out;
    switch (c % 4) {
      case 0: {
        CircleConvergenceConfig cfg;
        cfg.n_grid = {uniform_int(rng, 8, 40), uniform_int(rng, 41, 90)};
        cfg.seeds = uniform_int(rng, 1, 3);
        cfg.queries = uniform_int(rng, 1, 9);
        cfg.alpha = rng.uniform(0.5, 2.0);
        cfg.chordal = rng.uniform() < 0.5;
        out = under_thread_counts([&] { return render(cfg, seed, run_circle_convergence(cfg, seed)); });
        break;
      }
      case 1: {
        GaussianOracleConfig cfg;
        cfg.m = uniform_int(rng, 1, 4);
        cfg.trials = 10000;
        out = under_thread_counts([&] { return render(cfg, seed, run_gaussian_oracle(cfg, seed)); });
        break;
      }
      case 2: {
        TransportRecoveryConfig cfg;
        cfg.p = 2;
        cfg.n_grid = {uniform_int(rng, 5, 9)};
        cfg.knn = 3;
        cfg.seeds = 1;
        cfg.reflections = 4;
        cfg.iterations = 30;
        cfg.euler_steps = 5;
        out = under_thread_counts([&] {
          const auto r = run_transport_recovery(cfg, seed);
          std::ostringstream os;
          write_csv(os, cfg, seed, r);
          write_edges_csv(os, cfg, seed, r);
          return os.str();
        });
        break;
      }
      default: {
        SpectralStabilityConfig cfg;
        cfg.p_values = {2};
        cfg.n_grid = {uniform_int(rng, 5, 8)};
        cfg.n_max = {10};
        cfg.knn = 3;
        cfg.k_eig = 4;
        cfg.seeds = 1;
        cfg.euler_steps = 5;
        out = under_thread_counts([&] {
          const auto r = run_spectral_stability(cfg, seed);
          std::ostringstream os;
          write_csv(os, cfg, seed, r);
          write_summary_csv(os, cfg, seed, r);
          return os.str();
        });
        break;
      }
    }
    CHECK(out.first == out.second);
    CHECK(first_line(out.first).rfind("# hilbsheaf ", 0) == 0);
  });
}
