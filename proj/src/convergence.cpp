#include "hilbsheaf/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hilbsheaf/rng.hpp"
#include "hilbsheaf/sheaf.hpp"

namespace hilbsheaf {

namespace {

constexpr double kPi = kTwoPi / 2.0;

double wrap(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

}  // namespace

CircleSample make_circle_sample(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("make_circle_sample: n must be >= 1");
  Philox4x32 rng(seed);
  CircleSample s;
  s.n = n;
  s.angles.resize(static_cast<std::size_t>(n));
  for (auto& a : s.angles) a = wrap(kTwoPi * rng.uniform());
  return s;
}

CircleSample rotate(const CircleSample& s, double offset) {
  CircleSample r = s;
  for (auto& a : r.angles) a = wrap(a + offset);
  return r;
}

double arc_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

double chordal_distance(double a, double b) { return 2.0 * std::sin(0.5 * arc_distance(a, b)); }

double CircleSection::value(double theta) const {
  const double x = theta - phase;
  switch (kind) {
    case SectionKind::Sin: return std::sin(x);
    case SectionKind::Cos: return std::cos(x);
    case SectionKind::Sin2: return std::sin(2.0 * x);
    case SectionKind::Constant: return constant;
  }
  return 0.0;
}

double CircleSection::target(double theta) const {
  const double x = theta - phase;
  switch (kind) {
    case SectionKind::Sin: return std::sin(x) / kTwoPi;
    case SectionKind::Cos: return std::cos(x) / kTwoPi;
    case SectionKind::Sin2: return 4.0 * std::sin(2.0 * x) / kTwoPi;
    case SectionKind::Constant: return 0.0;
  }
  return 0.0;
}

SectionKind parse_section(const std::string& name) {
  if (name == "sin") return SectionKind::Sin;
  if (name == "cos") return SectionKind::Cos;
  if (name == "sin2") return SectionKind::Sin2;
  if (name == "constant") return SectionKind::Constant;
  throw std::invalid_argument("unknown section: " + name);
}

std::string section_name(SectionKind kind) {
  switch (kind) {
    case SectionKind::Sin: return "sin";
    case SectionKind::Cos: return "cos";
    case SectionKind::Sin2: return "sin2";
    case SectionKind::Constant: return "constant";
  }
  return "sin";
}

namespace {

struct CircleKernel {
  double t;
  double scale;
  std::vector<double> sample_values;
};

CircleKernel prepare(const CircleSample& sample, const CircleSection& section, const CircleLaplacianOptions& opt) {
  if (sample.n < 2 || static_cast<int>(sample.angles.size()) != sample.n)
    throw std::invalid_argument("rescaled_point_cloud_laplacian_circle: need n >= 2");
  if (!(opt.alpha > 0.0)) throw std::invalid_argument("rescaled_point_cloud_laplacian_circle: alpha must be > 0");
  CircleKernel k;
  k.t = bandwidth_schedule(sample.n, 1, opt.alpha);
  k.scale = 1.0 / (k.t * std::sqrt(4.0 * kPi * k.t) * sample.n);
  k.sample_values.reserve(sample.angles.size());
  for (double a : sample.angles) k.sample_values.push_back(section.value(a));
  return k;
}

double evaluate(const CircleSample& sample, const CircleSection& section, const CircleKernel& k, double x,
                bool chordal) {
  const double sx = section.value(x);
  double acc = 0.0;
  for (int j = 0; j < sample.n; ++j) {
    const double d = chordal ? chordal_distance(x, sample.angles[j]) : arc_distance(x, sample.angles[j]);
    acc += heat_kernel_weight(d, k.t) * (sx - k.sample_values[j]);
  }
  return k.scale * acc;
}

}  // namespace

std::vector<double> rescaled_point_cloud_laplacian_circle(const CircleSample& sample, const CircleSection& section,
                                                          std::span<const double> queries,
                                                          const CircleLaplacianOptions& options) {
  const CircleKernel k = prepare(sample, section, options);
  const int q = static_cast<int>(queries.size());
  std::vector<double> out(queries.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < q; ++i) out[i] = evaluate(sample, section, k, queries[i], options.chordal);
  return out;
}

namespace serial {
std::vector<double> rescaled_point_cloud_laplacian_circle(const CircleSample& sample, const CircleSection& section,
                                                          std::span<const double> queries,
                                                          const CircleLaplacianOptions& options) {
  const CircleKernel k = prepare(sample, section, options);
  std::vector<double> out;
  out.reserve(queries.size());
  for (double x : queries) out.push_back(evaluate(sample, section, k, x, options.chordal));
  return out;
}
}  // namespace serial

std::vector<double> equispaced_angles(int q, double offset) {
  std::vector<double> out(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) out[i] = wrap(kTwoPi * i / q + offset);
  return out;
}

SheafGraph circle_sheaf_graph(const CircleSample& sample, const CircleLaplacianOptions& options) {
  if (sample.n < 2) throw std::invalid_argument("circle_sheaf_graph: need n >= 2");
  const double t = bandwidth_schedule(sample.n, 1, options.alpha);
  const Matrix dist = pairwise_distances<double>(sample.angles, [&](double a, double b) {
    return options.chordal ? chordal_distance(a, b) : arc_distance(a, b);
  });
  return complete_graph_from_distances(dist, t, 1);
}

BlockSheafLaplacian rescaled_circle_laplacian(const CircleSample& sample, const CircleLaplacianOptions& options) {
  const SheafGraph graph = circle_sheaf_graph(sample, options);
  const double t = graph.bandwidth();
  return assemble_laplacian(graph, identity_transports(graph.num_edges(), 1))
      .scaled(1.0 / (t * std::sqrt(4.0 * kPi * t) * sample.n));
}

ConvergenceRow circle_convergence_row(const CircleSample& sample, const CircleSection& section,
                                      std::span<const double> queries, const CircleLaplacianOptions& options) {
  if (queries.empty()) throw std::invalid_argument("circle_convergence_row: no queries");
  const auto values = rescaled_point_cloud_laplacian_circle(sample, section, queries, options);
  ConvergenceRow row;
  row.n = sample.n;
  row.t_n = bandwidth_schedule(sample.n, 1, options.alpha);
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const double err = values[i] - section.target(queries[i]);
    abs_sum += std::abs(err);
    sq_sum += err * err;
  }
  const double q = static_cast<double>(queries.size());
  row.pointwise_error = abs_sum / q;
  row.l2_error = std::sqrt(kTwoPi / q * sq_sum);
  return row;
}

namespace {

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments finish(double sum, double sum_sq, long long trials) {
  const double n = static_cast<double>(trials);
  Moments m;
  m.mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - m.mean * m.mean);
  m.se = std::sqrt(var / n);
  return m;
}

Moments norm_moment(int m, double variance, long long trials, std::uint64_t seed) {
  Philox4x32 rng(seed);
  const double sd = std::sqrt(variance);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (long long r = 0; r < trials; ++r) {
    double sq = 0.0;
    for (int i = 0; i < m; ++i) {
      const double x = sd * rng.normal();
      sq += x * x;
    }
    const double norm = std::sqrt(sq);
    sum += norm;
    sum_sq += norm * norm;
  }
  return finish(sum, sum_sq, trials);
}

}  // namespace

GaussianOracleReport gaussian_identity_oracle(int m, double a, double t, long long trials, std::uint64_t seed) {
  if (trials < 10000) throw std::invalid_argument("gaussian_identity_oracle: need at least 10^4 trials");
  if (m < 1 || !(a > 0.0) || !(t > 0.0)) throw std::invalid_argument("gaussian_identity_oracle: need m >= 1, a, t > 0");

  GaussianOracleReport r;
  r.m = m;
  r.a = a;
  r.t = t;
  r.trials = trials;

  const double var = a * t;
  const double sd = std::sqrt(var);
  Philox4x32 rng(derive_seed(seed, {0}));
  Matrix second = Matrix::Zero(m, m);
  double s1 = 0.0, s1sq = 0.0, s2 = 0.0, s2sq = 0.0, s12 = 0.0, s12sq = 0.0;
  Vector x(m);
  for (long long r_ = 0; r_ < trials; ++r_) {
    for (int i = 0; i < m; ++i) x(i) = sd * rng.normal();
    second.selfadjointView<Eigen::Lower>().rankUpdate(x);
    s1 += x(0);
    s1sq += x(0) * x(0);
    const double x11 = x(0) * x(0);
    s2 += x11;
    s2sq += x11 * x11;
    if (m > 1) {
      const double x12 = x(0) * x(1);
      s12 += x12;
      s12sq += x12 * x12;
    }
  }
  const auto first = finish(s1, s1sq, trials);
  const auto diag = finish(s2, s2sq, trials);
  r.first_moment = first.mean;
  r.first_moment_se = first.se;
  r.second_diag = diag.mean;
  r.second_diag_se = diag.se;
  if (m > 1) {
    const auto off = finish(s12, s12sq, trials);
    r.second_offdiag = off.mean;
    r.second_offdiag_se = off.se;
  }
  second = second.selfadjointView<Eigen::Lower>();
  second /= static_cast<double>(trials);
  r.covariance_max_rel_residual = (second - var * Matrix::Identity(m, m)).cwiseAbs().maxCoeff() / var;

  const auto full = norm_moment(m, var, trials, derive_seed(seed, {1}));
  const auto half = norm_moment(m, 0.5 * var, trials, derive_seed(seed, {2}));
  r.odd_moment_ratio = full.mean / half.mean;
  // Delta method for a ratio of independent means.
  r.odd_moment_ratio_se = r.odd_moment_ratio * std::sqrt((full.se / full.mean) * (full.se / full.mean) +
                                                         (half.se / half.mean) * (half.se / half.mean));
  return r;
}

}  // namespace hilbsheaf
