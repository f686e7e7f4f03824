// Serial reference kernels against their OpenMP counterparts. Thread count
// follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <vector>

#include "hilbsheaf/convergence.hpp"
#include "hilbsheaf/rng.hpp"
#include "hilbsheaf/sheaf.hpp"
#include "hilbsheaf/spd_geometry.hpp"
#include "hilbsheaf/transports.hpp"

namespace {

using namespace hilbsheaf;

struct LaplacianFixture {
  BlockSheafLaplacian lap;
  Cochain s;
};

// kNN sheaf on random points in the unit square with Haar transports.
LaplacianFixture make_laplacian(int n, int d) {
  Philox4x32 rng(11);
  std::vector<Vector> pts(static_cast<std::size_t>(n));
  for (auto& p : pts) {
    p.resize(2);
    p << rng.uniform(), rng.uniform();
  }
  const SheafGraph g = build_knn_graph(std::span<const Vector>(pts), 8, 0.05, d,
                                       [](const Vector& a, const Vector& b) { return (a - b).norm(); });
  TransportSet t;
  for (int e = 0; e < g.num_edges(); ++e) t.push_back(haar_orthogonal(d, rng));
  Vector v(static_cast<Eigen::Index>(n) * d);
  for (auto& x : v) x = rng.normal();
  return {assemble_laplacian(g, t), Cochain(n, d, v)};
}

void BM_ApplyLaplacianSerial(benchmark::State& state) {
  const auto f = make_laplacian(static_cast<int>(state.range(0)), 10);
  for (auto _ : state) benchmark::DoNotOptimize(serial::apply_laplacian(f.lap, f.s));
}
void BM_ApplyLaplacianParallel(benchmark::State& state) {
  const auto f = make_laplacian(static_cast<int>(state.range(0)), 10);
  for (auto _ : state) benchmark::DoNotOptimize(apply_laplacian(f.lap, f.s));
}
BENCHMARK(BM_ApplyLaplacianSerial)->Arg(256)->Arg(2048);
BENCHMARK(BM_ApplyLaplacianParallel)->Arg(256)->Arg(2048);

TransportSet fit_targets(int edges) {
  Philox4x32 rng(12);
  TransportSet t;
  for (int e = 0; e < edges; ++e) {
    Matrix q = haar_orthogonal(10, rng);
    if (q.determinant() < 0) q.col(0) *= -1.0;
    t.push_back(q);
  }
  return t;
}

FitOptions fit_options() {
  FitOptions o;
  o.iterations = 200;
  o.loss_floor = 0.0;
  return o;
}

void BM_FitSerial(benchmark::State& state) {
  const auto t = fit_targets(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(serial::fit_transports(t, fit_options()));
}
void BM_FitParallel(benchmark::State& state) {
  const auto t = fit_targets(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_transports(t, fit_options()));
}
BENCHMARK(BM_FitSerial)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitParallel)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_CircleSerial(benchmark::State& state) {
  const CircleSample s = make_circle_sample(static_cast<int>(state.range(0)), 13);
  const auto q = equispaced_angles(32);
  for (auto _ : state) benchmark::DoNotOptimize(serial::rescaled_point_cloud_laplacian_circle(s, {}, q));
}
void BM_CircleParallel(benchmark::State& state) {
  const CircleSample s = make_circle_sample(static_cast<int>(state.range(0)), 13);
  const auto q = equispaced_angles(32);
  for (auto _ : state) benchmark::DoNotOptimize(rescaled_point_cloud_laplacian_circle(s, {}, q));
}
BENCHMARK(BM_CircleSerial)->Arg(4096);
BENCHMARK(BM_CircleParallel)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
