#pragma once

// Point-cloud Laplacian convergence on the trivial line bundle over S^1, and
// Monte-Carlo checks of the Gaussian moment identities behind it.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hilbsheaf/sheaf.hpp"

namespace hilbsheaf {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct CircleSample {
  int n = 0;
  std::vector<double> angles;  // in [0, 2 pi)
};

/// n i.i.d. uniform angles from Philox stream 0 keyed by `seed`.
CircleSample make_circle_sample(int n, std::uint64_t seed);

/// Same sample rotated by `offset`, wrapped back into [0, 2 pi).
CircleSample rotate(const CircleSample& s, double offset);

double arc_distance(double a, double b);
double chordal_distance(double a, double b);

enum class SectionKind { Sin, Cos, Sin2, Constant };

struct CircleSection {
  SectionKind kind = SectionKind::Sin;
  /// Evaluates S(theta - phase); used to rotate a section together with the sample.
  double phase = 0.0;
  double constant = 1.0;

  double value(double theta) const;
  /// -S'' / (2 pi): the limit of the rescaled operator under uniform sampling.
  double target(double theta) const;
};

SectionKind parse_section(const std::string& name);
std::string section_name(SectionKind kind);

struct CircleLaplacianOptions {
  double alpha = 1.0;
  bool chordal = false;
};

/// (1 / (t (4 pi t)^(1/2))) (1/n) sum_j exp(-d(x, x_j)^2 / 4t) (S(x) - S(x_j)),
/// t = n^(-1/(3 + alpha)), at every query angle. Queries run in parallel.
std::vector<double> rescaled_point_cloud_laplacian_circle(const CircleSample& sample, const CircleSection& section,
                                                          std::span<const double> queries,
                                                          const CircleLaplacianOptions& options = {});

namespace serial {
std::vector<double> rescaled_point_cloud_laplacian_circle(const CircleSample& sample, const CircleSection& section,
                                                          std::span<const double> queries,
                                                          const CircleLaplacianOptions& options = {});
}  // namespace serial

/// Complete graph on the sample, d = 1, heat-kernel weights at bandwidth
/// t_n = n^(-1/(3 + alpha)).
SheafGraph circle_sheaf_graph(const CircleSample& sample, const CircleLaplacianOptions& options = {});

/// Sheaf Laplacian of circle_sheaf_graph with identity transports, times
/// 1 / (n t (4 pi t)^(1/2)). Row i equals the rescaled operator at query x_i.
BlockSheafLaplacian rescaled_circle_laplacian(const CircleSample& sample, const CircleLaplacianOptions& options = {});

struct ConvergenceRow {
  int n = 0;
  double t_n = 0.0;
  double pointwise_error = 0.0;  // mean |error| over the queries
  double l2_error = 0.0;         // sqrt( (2 pi / Q) sum error^2 )
};

/// Q equispaced queries 2 pi q / Q.
std::vector<double> equispaced_angles(int q, double offset = 0.0);

ConvergenceRow circle_convergence_row(const CircleSample& sample, const CircleSection& section,
                                      std::span<const double> queries, const CircleLaplacianOptions& options = {});

struct GaussianOracleReport {
  int m = 0;
  double a = 0.0;
  double t = 0.0;
  long long trials = 0;
  /// E[x_1] and its standard error; target 0.
  double first_moment = 0.0;
  double first_moment_se = 0.0;
  /// E[x_1^2]; target a t.
  double second_diag = 0.0;
  double second_diag_se = 0.0;
  /// E[x_1 x_2]; target 0 (zero when m = 1).
  double second_offdiag = 0.0;
  double second_offdiag_se = 0.0;
  /// max_ij |E[x_i x_j] - a t delta_ij| / (a t).
  double covariance_max_rel_residual = 0.0;
  /// E||x|| at t over E||x|| at t/2; target sqrt(2).
  double odd_moment_ratio = 0.0;
  double odd_moment_ratio_se = 0.0;
};

/// x ~ N(0, a t I_m). Throws std::invalid_argument when trials < 10^4.
GaussianOracleReport gaussian_identity_oracle(int m, double a, double t, long long trials, std::uint64_t seed);

}  // namespace hilbsheaf
