#pragma once

// Otto-Wasserstein geometry of centered Gaussians N(0, Sigma).
//
// Tangent vectors at Sigma are symmetric matrices. Sym(p) is vectorized in
// the Frobenius-orthonormal basis {E_ii} u {(E_ij + E_ji)/sqrt(2), i<j},
// enumerated row-major over the upper triangle, so d = p(p+1)/2 and the
// Frobenius Gram matrix is the identity.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hilbsheaf/rng.hpp"

namespace hilbsheaf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A point of Sym++(p). Construction validates symmetry (relative 1e-12)
/// and strict positivity; violations throw std::domain_error.
class SpdPoint {
 public:
  explicit SpdPoint(Matrix cov);

  const Matrix& cov() const { return cov_; }
  int dim() const { return static_cast<int>(cov_.rows()); }

 private:
  Matrix cov_;
};

/// Element of Sym(p), the tangent space at any SpdPoint.
class SymTangent {
 public:
  /// Throws std::domain_error when `mat` is not symmetric to 1e-12 relative.
  explicit SymTangent(Matrix mat);
  static SymTangent zero(int p) { return SymTangent(Matrix::Zero(p, p)); }

  const Matrix& mat() const { return mat_; }
  int dim() const { return static_cast<int>(mat_.rows()); }

 private:
  Matrix mat_;
};

/// Metric data in the fixed Sym(p) basis: gram = R^T R with R upper triangular.
struct CholeskyFrame {
  Matrix gram;
  Matrix chol;
  Matrix chol_inv;
};

inline int sym_dim(int p) { return p * (p + 1) / 2; }

/// Coordinates of a symmetric matrix in the orthonormal Sym(p) basis.
Vector sym_to_vec(const Matrix& m);
Matrix vec_to_sym(const Vector& v, int p);
/// k-th basis element of Sym(p).
Matrix sym_basis(int p, int k);

/// Solves L Sigma + Sigma L = U through a cached eigendecomposition of Sigma;
/// (Q^T L Q)_ij = (Q^T U Q)_ij / (lambda_i + lambda_j).
class LyapunovOperator {
 public:
  explicit LyapunovOperator(const Matrix& sigma);
  Matrix apply(const Matrix& u) const;

 private:
  Matrix q_;
  Vector lambda_;
};

SymTangent lyapunov_solve(const SpdPoint& sigma, const SymTangent& u);

/// W_Sigma(U, V) = 1/2 Tr(L_Sigma[U] V).
double otto_inner(const SpdPoint& sigma, const SymTangent& u, const SymTangent& v);

/// Gram matrix of W_Sigma in the Sym(p) basis.
Matrix otto_gram(const SpdPoint& sigma);

CholeskyFrame cholesky_frame(const SpdPoint& sigma);

/// Symmetric square root / inverse square root by eigendecomposition, with
/// eigenvalues clamped at 1e-14.
Matrix sym_sqrt(const Matrix& a);
Matrix sym_inv_sqrt(const Matrix& a);

double bures_wasserstein_distance(const SpdPoint& a, const SpdPoint& b);
/// Frobenius distance ||A - B||_F; the Euclidean kernel alternative.
double frobenius_distance(const SpdPoint& a, const SpdPoint& b);

/// The Bures-Wasserstein geodesic Sigma_s = M_s A M_s, M_s = (1-s) I + s T,
/// where T is the optimal transport map from A to B.
class WassersteinGeodesic {
 public:
  WassersteinGeodesic(const SpdPoint& a, const SpdPoint& b);

  /// Throws std::domain_error for s outside [0, 1]. Endpoints are returned exactly.
  SpdPoint point(double s) const;
  /// d/ds Sigma_s = (T - I) A M_s + M_s A (T - I).
  Matrix velocity(double s) const;
  Matrix point_matrix(double s) const;
  const Matrix& transport_map() const { return t_; }

 private:
  Matrix a_;
  Matrix b_;
  Matrix t_;
};

SpdPoint wasserstein_geodesic(const SpdPoint& a, const SpdPoint& b, double s);

/// Levi-Civita Christoffel symbol of the Otto metric in covariance coordinates,
/// Gamma_Sigma(U, V) = -(L[U] Sigma L[V] + L[V] Sigma L[U]).
SymTangent christoffel(const SpdPoint& sigma, const SymTangent& u, const SymTangent& v);

/// Explicit-Euler integration of V' = -Gamma_{Sigma_t}(Sigma_t', V) along the
/// geodesic from a to b. Returns the d x d matrix of V(0) -> V(1) in the Sym(p)
/// basis; identity exactly when a == b.
Matrix parallel_transport(const SpdPoint& a, const SpdPoint& b, int steps);

/// R_b P R_a^{-1}: transport expressed in Cholesky-rescaled coordinates.
Matrix cholesky_rescale(const CholeskyFrame& frame_a, const CholeskyFrame& frame_b,
                        const Matrix& transport);

/// Haar-distributed orthogonal matrix: QR of a standard-normal matrix with
/// columns multiplied by sign(diag R). Entries drawn row-major.
Matrix haar_orthogonal(int p, Philox4x32& rng);

/// Sigma_i = R_i D_i R_i^T with Haar R_i and log-uniform eigenvalues on [lo, hi].
std::vector<SpdPoint> sample_spd(int p, int n, Philox4x32& rng, double lo = 0.5, double hi = 2.0);
std::vector<SpdPoint> sample_spd(int p, int n, std::uint64_t seed, double lo = 0.5, double hi = 2.0);

}  // namespace hilbsheaf
