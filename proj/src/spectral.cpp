#include "hilbsheaf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hilbsheaf {

std::vector<double> bottom_k_eigenvalues(const Matrix& dense, int k, const EigenOptions& options) {
  const Eigen::Index size = dense.rows();
  if (dense.cols() != size) throw std::invalid_argument("bottom_k_eigenvalues: matrix is not square");
  if (k < 1 || k > size) throw std::invalid_argument("bottom_k_eigenvalues: need 1 <= k <= nd");
  if ((dense - dense.transpose()).norm() > 1e-12 * std::max(1.0, dense.norm()))
    throw std::invalid_argument("bottom_k_eigenvalues: matrix is not symmetric");
  if (size > options.dense_limit)
    throw std::length_error("bottom_k_eigenvalues: nd = " + std::to_string(size) + " exceeds the dense limit " +
                            std::to_string(options.dense_limit) + "; reduce n");

  const auto mode = options.check_residuals ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(dense, mode);
  if (solver.info() != Eigen::Success) throw std::runtime_error("bottom_k_eigenvalues: eigensolver did not converge");
  const Vector& evals = solver.eigenvalues();
  const double op_norm = std::max(std::abs(evals(0)), std::abs(evals(size - 1)));

  if (options.check_residuals) {
    const Matrix v = solver.eigenvectors().leftCols(k);
    const Matrix residual = dense * v - v * evals.head(k).asDiagonal();
    for (int i = 0; i < k; ++i)
      if (residual.col(i).norm() > options.residual_tol * std::max(op_norm, 1e-300))
        throw std::runtime_error("bottom_k_eigenvalues: residual check failed for eigenpair " + std::to_string(i));
  }

  const double cutoff = options.clamp_rel * evals(size - 1);
  std::vector<double> out(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out[i] = evals(i) < cutoff ? 0.0 : evals(i);
  return out;
}

std::vector<double> bottom_k_eigenvalues(const BlockSheafLaplacian& lap, int k, const EigenOptions& options) {
  if (lap.size() > options.dense_limit)
    throw std::length_error("bottom_k_eigenvalues: nd = " + std::to_string(lap.size()) + " exceeds the dense limit " +
                            std::to_string(options.dense_limit) + "; reduce n");
  return bottom_k_eigenvalues(lap.to_dense(), k, options);
}

namespace {

void check_lengths(std::span<const double> eigs, std::span<const double> ref, int k) {
  if (k < 1) throw std::invalid_argument("spectral metric: k must be >= 1");
  if (static_cast<int>(eigs.size()) < k || static_cast<int>(ref.size()) < k)
    throw std::invalid_argument("spectral metric: sequence shorter than k");
}

}  // namespace

double spec_l2(std::span<const double> eigs, std::span<const double> ref, int k) {
  check_lengths(eigs, ref, k);
  double acc = 0.0;
  for (int i = 0; i < k; ++i) acc += (eigs[i] - ref[i]) * (eigs[i] - ref[i]);
  return std::sqrt(acc) / k;
}

double spec_rel_max(std::span<const double> eigs, std::span<const double> ref, int k) {
  check_lengths(eigs, ref, k);
  const double scale = ref[k - 1];
  if (scale == 0.0) throw std::domain_error("spec_rel_max: degenerate reference (lambda_k = 0)");
  double worst = 0.0;
  for (int i = 0; i < k; ++i) worst = std::max(worst, std::abs(eigs[i] - ref[i]));
  return worst / std::abs(scale);
}

SpectralReport make_spectral_report(int n, int d, std::vector<double> eigenvalues, int reference_n,
                                    std::span<const double> reference) {
  SpectralReport r;
  r.n = n;
  r.d = d;
  r.k = static_cast<int>(eigenvalues.size());
  r.reference_n = reference_n;
  r.spec_l2 = spec_l2(eigenvalues, reference, r.k);
  r.spec_rel_max = spec_rel_max(eigenvalues, reference, r.k);
  r.eigenvalues = std::move(eigenvalues);
  return r;
}

}  // namespace hilbsheaf
