#pragma once

// Seeded experiment sweeps that write CSV artifacts. Every sweep is a pure
// function of its config: grid cells use seeds derived from the master seed,
// and rows are emitted in grid order.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hilbsheaf/config.hpp"
#include "hilbsheaf/convergence.hpp"
#include "hilbsheaf/sheaf.hpp"
#include "hilbsheaf/spd_geometry.hpp"
#include "hilbsheaf/transports.hpp"

namespace hilbsheaf {

std::string code_version();

// ---------------------------------------------------------------------------
// Statistical bundle over Sym++(p) with the Otto-Wasserstein metric.

enum class TargetMode {
  Midpoint,  // fit P_{x_i -> m_ij}
  Node,      // fit P_{x_j -> x_i}
};

struct SpdSheaf {
  std::vector<SpdPoint> points;
  SheafGraph graph;
  /// Cholesky-rescaled, polar-projected transports P_{x_i -> m_ij} and P_{x_j -> m_ij}.
  TransportSet to_mid_from_i;
  TransportSet to_mid_from_j;
  /// P_{j -> i} = P_{i -> m}^T P_{j -> m}.
  TransportSet node_transports;
  /// Largest ||T^T T - I||_F seen before projection.
  double max_orthogonality_defect = 0.0;
};

/// kNN graph under W_2 with heat-kernel weights, Levi-Civita transports by
/// explicit Euler through the geodesic midpoint of each edge.
SpdSheaf build_spd_sheaf(std::vector<SpdPoint> points, int knn, double bandwidth, int euler_steps);

// ---------------------------------------------------------------------------

struct TransportRecoveryConfig {
  int p = 4;
  std::vector<int> n_grid{16, 32, 64, 128, 256};
  int knn = 8;
  double t = 0.5;
  int seeds = 3;
  int reflections = 16;
  int euler_steps = 50;
  int iterations = 5000;
  double step = 5e-3;
  double epsilon = 1e-12;
  bool fixed_final_reflection = false;
  Optimizer optimizer = Optimizer::Adam;
  double init_spread = 0.1;
  std::vector<std::string> classes{"free", "circulant", "frozen"};
  TargetMode target = TargetMode::Midpoint;
};

struct TransportRecoveryRow {
  int n = 0;
  std::string cls;
  double empirical_mean = 0.0;
  double empirical_std = 0.0;
  double theory = 0.0;
  /// Per-seed values, same order as seeds.
  std::vector<double> empirical;
  std::vector<double> theory_per_seed;
};

struct EdgeRow {
  int n = 0;
  int seed = 0;
  int edge_i = 0;
  int edge_j = 0;
  std::string cls;
  double final_loss = 0.0;
  double best_loss = 0.0;
  double plateau = 0.0;
  int iterations = 0;
};

struct TransportRecoveryResult {
  std::vector<TransportRecoveryRow> rows;
  std::vector<EdgeRow> edges;
};

TransportRecoveryResult run_transport_recovery(const TransportRecoveryConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct SpectralStabilityConfig {
  std::vector<int> p_values{2};
  std::vector<int> n_grid{50, 100, 200, 400};
  /// Reference size: a single value, or one per entry of p_values.
  std::vector<int> n_max{800};
  int knn = 8;
  double t = 0.5;
  int k_eig = 32;
  int seeds = 5;
  int euler_steps = 50;
  int dense_limit = 10000;
  bool check_residuals = true;

  int reference_n(std::size_t p_index) const { return n_max.size() == 1 ? n_max.front() : n_max.at(p_index); }
};

struct SpectralRow {
  int p = 0;
  int d = 0;
  int n = 0;
  int seed = 0;
  int k = 0;
  double spec_l2 = 0.0;
  double spec_rel_max = 0.0;
  std::vector<double> eigenvalues;
};

struct SpectralSummaryRow {
  int p = 0;
  int d = 0;
  int n = 0;
  double spec_l2_mean = 0.0;
  double spec_l2_std = 0.0;
  double spec_rel_max_mean = 0.0;
  double spec_rel_max_std = 0.0;
};

struct SpectralStabilityResult {
  std::vector<SpectralRow> rows;
  std::vector<SpectralSummaryRow> summary;
};

SpectralStabilityResult run_spectral_stability(const SpectralStabilityConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct CircleConvergenceConfig {
  std::vector<int> n_grid{256, 512, 1024, 2048, 4096};
  double alpha = 1.0;
  std::vector<std::string> sections{"sin", "constant"};
  int seeds = 10;
  int queries = 32;
  bool chordal = false;
};

struct CircleRow {
  int n = 0;
  double alpha = 0.0;
  double t_n = 0.0;
  std::string section;
  int seed = 0;
  double pointwise_error = 0.0;
  double l2_error = 0.0;
};

struct CircleSummaryRow {
  int n = 0;
  std::string section;
  double pointwise_error_mean = 0.0;
  double l2_error_mean = 0.0;
};

struct CircleConvergenceResult {
  std::vector<CircleRow> rows;
  std::vector<CircleSummaryRow> summary;
};

CircleConvergenceResult run_circle_convergence(const CircleConvergenceConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct GaussianOracleConfig {
  int m = 3;
  double a = 2.0;
  double t = 0.1;
  long long trials = 1000000;
};

GaussianOracleReport run_gaussian_oracle(const GaussianOracleConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Config files. Unknown keys and non-positive or unsorted values raise ConfigError.

TransportRecoveryConfig transport_recovery_config(const KeyValueFile& kv);
SpectralStabilityConfig spectral_stability_config(const KeyValueFile& kv);
CircleConvergenceConfig circle_convergence_config(const KeyValueFile& kv);
GaussianOracleConfig gaussian_oracle_config(const KeyValueFile& kv);

/// Space-separated key=value summary of the effective config.
std::string describe(const TransportRecoveryConfig& cfg);
std::string describe(const SpectralStabilityConfig& cfg);
std::string describe(const CircleConvergenceConfig& cfg);
std::string describe(const GaussianOracleConfig& cfg);

// ---------------------------------------------------------------------------
// CSV writers. The first line is a comment with the experiment name, code
// version, RNG, master seed and config; the second is the column header.

void write_csv(std::ostream& os, const TransportRecoveryConfig& cfg, std::uint64_t seed,
               const TransportRecoveryResult& r);
void write_edges_csv(std::ostream& os, const TransportRecoveryConfig& cfg, std::uint64_t seed,
                     const TransportRecoveryResult& r);
void write_csv(std::ostream& os, const SpectralStabilityConfig& cfg, std::uint64_t seed,
               const SpectralStabilityResult& r);
void write_summary_csv(std::ostream& os, const SpectralStabilityConfig& cfg, std::uint64_t seed,
                       const SpectralStabilityResult& r);
void write_csv(std::ostream& os, const CircleConvergenceConfig& cfg, std::uint64_t seed,
               const CircleConvergenceResult& r);
void write_summary_csv(std::ostream& os, const CircleConvergenceConfig& cfg, std::uint64_t seed,
                       const CircleConvergenceResult& r);
void write_csv(std::ostream& os, const GaussianOracleConfig& cfg, std::uint64_t seed, const GaussianOracleReport& r);

// ---------------------------------------------------------------------------
// Tolerance checks used by --validate. Each returns human-readable failures.

std::vector<std::string> validate(const TransportRecoveryResult& r);
std::vector<std::string> validate(const SpectralStabilityResult& r);
std::vector<std::string> validate(const CircleConvergenceResult& r);
std::vector<std::string> validate(const GaussianOracleReport& r);

}  // namespace hilbsheaf
