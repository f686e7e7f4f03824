#include "hilbsheaf/spd_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hilbsheaf {

namespace {

constexpr double kSymTol = 1e-12;
constexpr double kEigClamp = 1e-14;

bool is_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= kSymTol * scale;
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void require_same_dim(int a, int b) {
  if (a != b) throw std::invalid_argument("dimension mismatch");
}

}  // namespace

SpdPoint::SpdPoint(Matrix cov) : cov_(std::move(cov)) {
  if (cov_.rows() == 0 || !is_symmetric(cov_))
    throw std::domain_error("SpdPoint: covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) <= 0.0) throw std::domain_error("SpdPoint: covariance is not positive definite");
}

SymTangent::SymTangent(Matrix mat) : mat_(std::move(mat)) {
  if (!is_symmetric(mat_) && mat_.size() > 0) throw std::domain_error("SymTangent: matrix is not symmetric");
}

Vector sym_to_vec(const Matrix& m) {
  const int p = static_cast<int>(m.rows());
  Vector v(sym_dim(p));
  int k = 0;
  for (int i = 0; i < p; ++i) {
    v(k++) = m(i, i);
    for (int j = i + 1; j < p; ++j) v(k++) = std::numbers::sqrt2 * 0.5 * (m(i, j) + m(j, i));
  }
  return v;
}

Matrix vec_to_sym(const Vector& v, int p) {
  if (v.size() != sym_dim(p)) throw std::invalid_argument("vec_to_sym: length mismatch");
  Matrix m(p, p);
  int k = 0;
  for (int i = 0; i < p; ++i) {
    m(i, i) = v(k++);
    for (int j = i + 1; j < p; ++j) {
      m(i, j) = m(j, i) = v(k++) / std::numbers::sqrt2;
    }
  }
  return m;
}

Matrix sym_basis(int p, int k) {
  Vector e = Vector::Zero(sym_dim(p));
  e(k) = 1.0;
  return vec_to_sym(e, p);
}

LyapunovOperator::LyapunovOperator(const Matrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
  q_ = es.eigenvectors();
  lambda_ = es.eigenvalues();
  if (lambda_(0) <= 0.0) throw std::domain_error("Lyapunov solve: sigma is not positive definite");
}

Matrix LyapunovOperator::apply(const Matrix& u) const {
  Matrix w = q_.transpose() * u * q_;
  const auto p = w.rows();
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) w(i, j) /= lambda_(i) + lambda_(j);
  return symmetrize(q_ * w * q_.transpose());
}

SymTangent lyapunov_solve(const SpdPoint& sigma, const SymTangent& u) {
  require_same_dim(sigma.dim(), u.dim());
  return SymTangent(LyapunovOperator(sigma.cov()).apply(u.mat()));
}

double otto_inner(const SpdPoint& sigma, const SymTangent& u, const SymTangent& v) {
  require_same_dim(sigma.dim(), u.dim());
  require_same_dim(sigma.dim(), v.dim());
  const Matrix lu = LyapunovOperator(sigma.cov()).apply(u.mat());
  return 0.5 * (lu.cwiseProduct(v.mat())).sum();
}

Matrix otto_gram(const SpdPoint& sigma) {
  const int p = sigma.dim();
  const int d = sym_dim(p);
  const LyapunovOperator lyap(sigma.cov());
  Matrix g(d, d);
  for (int l = 0; l < d; ++l) {
    const Matrix bl = sym_basis(p, l);
    const Vector col = sym_to_vec(lyap.apply(bl));
    // <B_k, L[B_l]>_F is the k-th coordinate of L[B_l].
    g.col(l) = 0.5 * col;
  }
  return symmetrize(g);
}

CholeskyFrame cholesky_frame(const SpdPoint& sigma) {
  CholeskyFrame f;
  f.gram = otto_gram(sigma);
  Eigen::LLT<Matrix> llt(f.gram);
  if (llt.info() != Eigen::Success) throw std::domain_error("cholesky_frame: Gram matrix not SPD");
  f.chol = llt.matrixU();
  const auto d = f.gram.rows();
  f.chol_inv = f.chol.triangularView<Eigen::Upper>().solve(Matrix::Identity(d, d));
  return f;
}

Matrix sym_sqrt(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const Vector s = es.eigenvalues().cwiseMax(kEigClamp).cwiseSqrt();
  return symmetrize(es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose());
}

Matrix sym_inv_sqrt(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const Vector s = es.eigenvalues().cwiseMax(kEigClamp).cwiseSqrt().cwiseInverse();
  return symmetrize(es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose());
}

double bures_wasserstein_distance(const SpdPoint& a, const SpdPoint& b) {
  require_same_dim(a.dim(), b.dim());
  if (a.cov() == b.cov()) return 0.0;
  const Matrix ah = sym_sqrt(a.cov());
  const Matrix cross = sym_sqrt(symmetrize(ah * b.cov() * ah));
  const double sq = a.cov().trace() + b.cov().trace() - 2.0 * cross.trace();
  return std::sqrt(std::max(sq, 0.0));
}

double frobenius_distance(const SpdPoint& a, const SpdPoint& b) {
  require_same_dim(a.dim(), b.dim());
  return (a.cov() - b.cov()).norm();
}

WassersteinGeodesic::WassersteinGeodesic(const SpdPoint& a, const SpdPoint& b) : a_(a.cov()), b_(b.cov()) {
  require_same_dim(a.dim(), b.dim());
  const Matrix ah = sym_sqrt(a_);
  const Matrix aih = sym_inv_sqrt(a_);
  t_ = symmetrize(aih * sym_sqrt(symmetrize(ah * b_ * ah)) * aih);
}

Matrix WassersteinGeodesic::point_matrix(double s) const {
  if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("geodesic parameter outside [0, 1]");
  if (s == 0.0) return a_;
  if (s == 1.0) return b_;
  const auto p = a_.rows();
  const Matrix m = (1.0 - s) * Matrix::Identity(p, p) + s * t_;
  return symmetrize(m * a_ * m);
}

SpdPoint WassersteinGeodesic::point(double s) const { return SpdPoint(point_matrix(s)); }

Matrix WassersteinGeodesic::velocity(double s) const {
  const auto p = a_.rows();
  const Matrix id = Matrix::Identity(p, p);
  const Matrix m = (1.0 - s) * id + s * t_;
  const Matrix dm = t_ - id;
  return symmetrize(dm * a_ * m + m * a_ * dm);
}

SpdPoint wasserstein_geodesic(const SpdPoint& a, const SpdPoint& b, double s) {
  return WassersteinGeodesic(a, b).point(s);
}

SymTangent christoffel(const SpdPoint& sigma, const SymTangent& u, const SymTangent& v) {
  require_same_dim(sigma.dim(), u.dim());
  require_same_dim(sigma.dim(), v.dim());
  const LyapunovOperator lyap(sigma.cov());
  const Matrix lu = lyap.apply(u.mat());
  const Matrix lv = lyap.apply(v.mat());
  const Matrix g = lu * sigma.cov() * lv;
  return SymTangent(-(g + g.transpose()));
}

Matrix parallel_transport(const SpdPoint& a, const SpdPoint& b, int steps) {
  require_same_dim(a.dim(), b.dim());
  if (steps < 1) throw std::invalid_argument("parallel_transport: steps must be >= 1");
  const int p = a.dim();
  const int d = sym_dim(p);
  Matrix transport = Matrix::Identity(d, d);
  if (a.cov() == b.cov()) return transport;

  std::vector<Matrix> basis(d);
  for (int l = 0; l < d; ++l) basis[l] = sym_basis(p, l);

  const WassersteinGeodesic geo(a, b);
  const double h = 1.0 / steps;
  Matrix gamma(d, d);
  for (int m = 0; m < steps; ++m) {
    const double s = m * h;
    const Matrix sigma = geo.point_matrix(s);
    const Matrix sigma_dot = geo.velocity(s);
    const LyapunovOperator lyap(sigma);
    const Matrix l_dot_sigma = lyap.apply(sigma_dot) * sigma;
    for (int l = 0; l < d; ++l) {
      const Matrix g = l_dot_sigma * lyap.apply(basis[l]);
      gamma.col(l) = -sym_to_vec(g + g.transpose());
    }
    transport -= h * (gamma * transport);
  }
  return transport;
}

Matrix cholesky_rescale(const CholeskyFrame& frame_a, const CholeskyFrame& frame_b, const Matrix& transport) {
  if (transport.rows() != frame_b.chol.rows() || transport.cols() != frame_a.chol.rows())
    throw std::invalid_argument("cholesky_rescale: dimension mismatch");
  return frame_b.chol * transport * frame_a.chol_inv;
}

Matrix haar_orthogonal(int p, Philox4x32& rng) {
  Matrix z(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) z(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(p, p);
  const Matrix& r = qr.matrixQR();
  for (int j = 0; j < p; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

std::vector<SpdPoint> sample_spd(int p, int n, Philox4x32& rng, double lo, double hi) {
  if (p < 1 || n < 1) throw std::invalid_argument("sample_spd: p and n must be positive");
  std::vector<SpdPoint> out;
  out.reserve(n);
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  for (int i = 0; i < n; ++i) {
    const Matrix r = haar_orthogonal(p, rng);
    Vector lambda(p);
    for (int k = 0; k < p; ++k) lambda(k) = std::exp(rng.uniform(llo, lhi));
    out.emplace_back(symmetrize(r * lambda.asDiagonal() * r.transpose()));
  }
  return out;
}

std::vector<SpdPoint> sample_spd(int p, int n, std::uint64_t seed, double lo, double hi) {
  Philox4x32 rng(seed);
  return sample_spd(p, n, rng, lo, hi);
}

}  // namespace hilbsheaf
