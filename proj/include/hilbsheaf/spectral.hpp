#pragma once

// Bottom-of-spectrum eigenvalues of assembled sheaf Laplacians and the
// low-frequency discrepancy metrics used in the spectral-stability sweep.

#include <span>
#include <vector>

#include "hilbsheaf/sheaf.hpp"

namespace hilbsheaf {

inline constexpr int kDefaultDenseLimit = 10000;

struct EigenOptions {
  int dense_limit = kDefaultDenseLimit;
  /// Verify ||L v - lambda v|| <= residual_tol * ||L||_op for every returned pair.
  bool check_residuals = true;
  double residual_tol = 1e-7;
  /// Eigenvalues below clamp_rel * lambda_max are reported as exactly 0.
  double clamp_rel = 1e-12;
};

/// k smallest eigenvalues of the densified Laplacian, ascending. Throws
/// std::invalid_argument for k outside [1, nd], std::length_error when nd
/// exceeds the dense limit, std::runtime_error when a residual check fails.
std::vector<double> bottom_k_eigenvalues(const BlockSheafLaplacian& lap, int k, const EigenOptions& options = {});

/// Same, for an explicit dense symmetric matrix.
std::vector<double> bottom_k_eigenvalues(const Matrix& dense, int k, const EigenOptions& options = {});

/// (1/k) sqrt( sum_{i<k} (lambda_i - ref_i)^2 ).
double spec_l2(std::span<const double> eigs, std::span<const double> ref, int k);

/// max_{i<k} |lambda_i - ref_i| / ref_{k-1}. Throws std::domain_error when ref_{k-1} == 0.
double spec_rel_max(std::span<const double> eigs, std::span<const double> ref, int k);

struct SpectralReport {
  int n = 0;
  int d = 0;
  int k = 0;
  std::vector<double> eigenvalues;
  int reference_n = 0;
  double spec_l2 = 0.0;
  double spec_rel_max = 0.0;
};

SpectralReport make_spectral_report(int n, int d, std::vector<double> eigenvalues, int reference_n,
                                    std::span<const double> reference);

}  // namespace hilbsheaf
