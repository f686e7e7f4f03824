#pragma once

// Orthogonal transport hypothesis classes: frozen identity, products of
// Householder reflections, and real orthogonal circulants.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hilbsheaf/sheaf.hpp"

namespace hilbsheaf {

enum class TransportClass { FrozenIdentity, FreeOrthogonal, Circulant };

struct TransportClassTag {
  TransportClass kind = TransportClass::FrozenIdentity;
  int reflections = 0;  // FreeOrthogonal only

  static TransportClassTag frozen() { return {TransportClass::FrozenIdentity, 0}; }
  static TransportClassTag free_orthogonal(int r) { return {TransportClass::FreeOrthogonal, r}; }
  static TransportClassTag circulant() { return {TransportClass::Circulant, 0}; }

  /// 0, R d, or floor((d - 1) / 2).
  int parameter_count(int d) const;
  std::string name() const;
};

/// T = H(v_R) ... H(v_1), H(v) = I - 2 v v^T / (||v||^2 + epsilon).
struct HouseholderTransport {
  int d = 0;
  std::vector<Vector> vectors;
  double epsilon = 0.0;
};

Matrix householder_materialize(const HouseholderTransport& h);

/// Phases of the positive frequencies 1..floor((d-1)/2). The zero frequency
/// multiplier is 1, and so is the Nyquist multiplier when d is even.
struct CirculantTransport {
  int d = 0;
  Vector phases;
};

inline int circulant_phase_count(int d) { return (d - 1) / 2; }

/// Real arithmetic from the first column
/// c[r] = (1/d) [1 + [d even] (-1)^r + 2 sum_k cos(phi_k + 2 pi k r / d)],
/// C_ab = c[(a - b) mod d].
Matrix circulant_materialize(const CirculantTransport& c);

struct OrthogonalProjection {
  Matrix value;
  bool degenerate = false;  // rank-deficient target, polar factor not unique
};

/// Frobenius-nearest orthogonal matrix U V^T from the SVD of the target.
OrthogonalProjection project_orthogonal(const Matrix& target);

struct CirculantProjection {
  CirculantTransport transport;
  std::vector<int> undefined_frequencies;  // |(F T F*)_kk| < 1e-12, phase set to 0
};

/// phi_k = arg((F T F*)_kk) for k = 1..floor((d-1)/2).
CirculantProjection project_circulant(const Matrix& target);

/// Squared Frobenius distance to the nearest circulant-class member.
double circulant_projection_distance(const Matrix& target);

/// (1/|E|) sum ||P - I||_F^2.
double plateau_frozen(const TransportSet& transports);
/// (1/|E|) sum ||P - proj_circ(P)||_F^2.
double plateau_circulant(const TransportSet& transports);
/// (1/|E|) sum ||P - polar(P)||_F^2; zero for orthogonal transports.
double plateau_free(const TransportSet& transports);
double plateau(const TransportSet& transports, const TransportClassTag& cls);

enum class Optimizer { GradientDescent, Adam };

struct FitOptions {
  TransportClassTag cls = TransportClassTag::free_orthogonal(16);
  Optimizer optimizer = Optimizer::Adam;
  int iterations = 5000;
  /// Learning rate.
  double step = 5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-12;
  /// Householder vectors start in pairs v, v + init_spread * noise.
  double init_spread = 0.1;
  std::uint64_t seed = 0;
  double epsilon = 1e-12;
  /// Stop an edge early once its loss falls below this value.
  double loss_floor = 1e-14;
  /// Record the loss every `record_every` iterations (plus the last one).
  int record_every = 50;
  /// Append a fixed reflection diag(-1, 1, ..., 1) to reach the other O(d) component.
  bool fixed_final_reflection = false;
};

struct EdgeFit {
  Matrix fitted;
  double final_loss = 0.0;
  double best_loss = 0.0;
  int iterations = 0;
  bool parity_warning = false;
  std::vector<double> loss_history;
};

struct FitResult {
  std::vector<EdgeFit> edges;
  double mean_best_loss = 0.0;

  TransportSet fitted() const;
  int parity_warnings() const;
};

/// Per-edge gradient descent on ||T(theta) - target||_F^2 with analytic
/// gradients. Edge e uses seed derive_seed(options.seed, {e}). Edges run in
/// parallel; results do not depend on the thread count. Throws
/// std::invalid_argument for FrozenIdentity (nothing to fit) and
/// std::domain_error for non-orthogonal targets (tolerance 1e-6).
FitResult fit_transports(const TransportSet& targets, const FitOptions& options);

/// Single-edge fits, exposed for tests.
EdgeFit fit_householder(const Matrix& target, const FitOptions& options, std::uint64_t edge_seed);
EdgeFit fit_circulant(const Matrix& target, const FitOptions& options);

namespace serial {
FitResult fit_transports(const TransportSet& targets, const FitOptions& options);
}  // namespace serial

}  // namespace hilbsheaf
