#include "hilbsheaf/transports.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "hilbsheaf/rng.hpp"

namespace hilbsheaf {

namespace {

constexpr double kTargetOrthTol = 1e-6;
constexpr double kPhaseFloor = 1e-12;

void reflect_left(Matrix& x, const Vector& v, double eps) {
  const double s = v.squaredNorm() + eps;
  if (s == 0.0) return;
  const Eigen::RowVectorXd vx = v.transpose() * x;
  x.noalias() -= (2.0 / s) * v * vx;
}

Matrix fixed_reflection(int d) {
  Matrix h = Matrix::Identity(d, d);
  h(0, 0) = -1.0;
  return h;
}

// Diagonal of F T F* with F_ka = exp(-2 pi i k a / d) / sqrt(d).
std::vector<std::complex<double>> dft_diagonal(const Matrix& t) {
  const int d = static_cast<int>(t.rows());
  // (F T F*)_kk = (1/d) sum_r a_r exp(-2 pi i k r / d) where a_r sums T along
  // the wrapped diagonal (a - b) mod d = r.
  std::vector<double> wrapped(d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) wrapped[((a - b) % d + d) % d] += t(a, b);
  std::vector<std::complex<double>> diag(d);
  for (int k = 0; k < d; ++k) {
    std::complex<double> acc = 0.0;
    for (int r = 0; r < d; ++r) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>((static_cast<long>(k) * r) % d) / d;
      acc += wrapped[r] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    diag[k] = acc / static_cast<double>(d);
  }
  return diag;
}

}  // namespace

int TransportClassTag::parameter_count(int d) const {
  switch (kind) {
    case TransportClass::FrozenIdentity: return 0;
    case TransportClass::FreeOrthogonal: return reflections * d;
    case TransportClass::Circulant: return circulant_phase_count(d);
  }
  return 0;
}

std::string TransportClassTag::name() const {
  switch (kind) {
    case TransportClass::FrozenIdentity: return "frozen";
    case TransportClass::FreeOrthogonal: return "free";
    case TransportClass::Circulant: return "circulant";
  }
  return "unknown";
}

Matrix householder_materialize(const HouseholderTransport& h) {
  if (h.d < 1) throw std::invalid_argument("householder_materialize: d must be >= 1");
  Matrix t = Matrix::Identity(h.d, h.d);
  for (const auto& v : h.vectors) {
    if (v.size() != h.d) throw std::invalid_argument("householder_materialize: vector length != d");
    reflect_left(t, v, h.epsilon);
  }
  return t;
}

Matrix circulant_materialize(const CirculantTransport& c) {
  const int d = c.d;
  const int m = circulant_phase_count(d);
  if (d < 1 || c.phases.size() != m) throw std::invalid_argument("circulant_materialize: expected floor((d-1)/2) phases");
  Vector col(d);
  for (int r = 0; r < d; ++r) {
    double acc = 1.0;
    if (d % 2 == 0) acc += (r % 2 == 0) ? 1.0 : -1.0;
    for (int k = 1; k <= m; ++k) acc += 2.0 * std::cos(c.phases(k - 1) + 2.0 * std::numbers::pi * k * r / d);
    col(r) = acc / d;
  }
  Matrix out(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) out(a, b) = col(((a - b) % d + d) % d);
  return out;
}

OrthogonalProjection project_orthogonal(const Matrix& target) {
  if (!target.allFinite()) throw std::domain_error("project_orthogonal: non-finite target");
  Eigen::JacobiSVD<Matrix> svd(target, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  OrthogonalProjection out;
  out.value = svd.matrixU() * svd.matrixV().transpose();
  const double smax = s.size() ? s(0) : 0.0;
  out.degenerate = s.size() == 0 || s(s.size() - 1) <= 1e-12 * std::max(smax, 1e-300);
  return out;
}

CirculantProjection project_circulant(const Matrix& target) {
  if (target.rows() != target.cols()) throw std::invalid_argument("project_circulant: target must be square");
  if (!target.allFinite()) throw std::domain_error("project_circulant: non-finite target");
  const int d = static_cast<int>(target.rows());
  const auto diag = dft_diagonal(target);
  CirculantProjection out;
  out.transport.d = d;
  out.transport.phases = Vector::Zero(circulant_phase_count(d));
  for (int k = 1; k <= circulant_phase_count(d); ++k) {
    if (std::abs(diag[k]) < kPhaseFloor) {
      out.undefined_frequencies.push_back(k);
      continue;
    }
    out.transport.phases(k - 1) = std::arg(diag[k]);
  }
  return out;
}

double circulant_projection_distance(const Matrix& target) {
  return (target - circulant_materialize(project_circulant(target).transport)).squaredNorm();
}

double plateau_frozen(const TransportSet& transports) {
  if (transports.empty()) throw std::invalid_argument("plateau: empty edge set");
  double acc = 0.0;
  for (const auto& p : transports) acc += (p - Matrix::Identity(p.rows(), p.cols())).squaredNorm();
  return acc / static_cast<double>(transports.size());
}

double plateau_circulant(const TransportSet& transports) {
  if (transports.empty()) throw std::invalid_argument("plateau: empty edge set");
  double acc = 0.0;
  for (const auto& p : transports) acc += circulant_projection_distance(p);
  return acc / static_cast<double>(transports.size());
}

double plateau_free(const TransportSet& transports) {
  if (transports.empty()) throw std::invalid_argument("plateau: empty edge set");
  double acc = 0.0;
  for (const auto& p : transports) acc += (p - project_orthogonal(p).value).squaredNorm();
  return acc / static_cast<double>(transports.size());
}

double plateau(const TransportSet& transports, const TransportClassTag& cls) {
  switch (cls.kind) {
    case TransportClass::FrozenIdentity: return plateau_frozen(transports);
    case TransportClass::FreeOrthogonal: return plateau_free(transports);
    case TransportClass::Circulant: return plateau_circulant(transports);
  }
  return 0.0;
}

namespace {

// Plain gradient descent or Adam over a list of parameter blocks of equal size.
class Stepper {
 public:
  Stepper(const FitOptions& opt, int blocks, int size) : opt_(opt) {
    if (opt.optimizer == Optimizer::Adam) {
      m_.assign(blocks, Vector::Zero(size));
      v_.assign(blocks, Vector::Zero(size));
    }
  }

  void update(int block, Eigen::Ref<Vector> x, const Vector& g) {
    if (opt_.optimizer == Optimizer::GradientDescent) {
      x -= opt_.step * g;
      return;
    }
    if (block == 0) {
      ++t_;
      c1_ = 1.0 - std::pow(opt_.beta1, t_);
      c2_ = 1.0 - std::pow(opt_.beta2, t_);
    }
    Vector& m = m_[block];
    Vector& v = v_[block];
    m = opt_.beta1 * m + (1.0 - opt_.beta1) * g;
    v = opt_.beta2 * v + (1.0 - opt_.beta2) * g.cwiseAbs2();
    x.array() -= opt_.step * (m.array() / c1_) / ((v.array() / c2_).sqrt() + opt_.adam_eps);
  }

 private:
  const FitOptions& opt_;
  std::vector<Vector> m_;
  std::vector<Vector> v_;
  int t_ = 0;
  double c1_ = 1.0;
  double c2_ = 1.0;
};

}  // namespace

EdgeFit fit_householder(const Matrix& target, const FitOptions& opt, std::uint64_t edge_seed) {
  const int d = static_cast<int>(target.rows());
  const int r_count = opt.cls.reflections;
  if (r_count < 1) throw std::invalid_argument("fit_householder: need at least one reflection");
  const double eps = opt.epsilon;

  Philox4x32 rng(edge_seed);
  // Reflections start in nearly equal pairs, H(a) H(a + delta) ~ I, so the
  // initial product is close to the identity component.
  std::vector<Vector> v(r_count, Vector(d));
  for (int r = 0; r < r_count; ++r) {
    Vector& vec = v[r];
    for (int a = 0; a < d; ++a) vec(a) = rng.normal();
    if (r % 2 == 1) vec = v[r - 1] + opt.init_spread * vec;
    vec.normalize();
  }

  const Matrix tail = opt.fixed_final_reflection ? fixed_reflection(d) : Matrix::Identity(d, d);
  const int parity = ((r_count + (opt.fixed_final_reflection ? 1 : 0)) % 2 == 0) ? 1 : -1;

  EdgeFit fit;
  fit.parity_warning = (target.determinant() > 0 ? 1 : -1) != parity;

  // partial[r] = H_r ... H_1 (partial[0] = I).
  std::vector<Matrix> partial(r_count + 1, Matrix::Identity(d, d));
  std::vector<Vector> grad(r_count, Vector(d));
  Stepper step(opt, r_count, d);
  Matrix best = Matrix::Identity(d, d);
  fit.best_loss = std::numeric_limits<double>::infinity();

  auto forward = [&] {
    for (int r = 0; r < r_count; ++r) {
      partial[r + 1] = partial[r];
      reflect_left(partial[r + 1], v[r], eps);
    }
    return Matrix(tail * partial[r_count]);
  };

  for (int it = 0; it <= opt.iterations; ++it) {
    const Matrix t = forward();
    const double loss = (t - target).squaredNorm();
    if (loss < fit.best_loss) {
      fit.best_loss = loss;
      best = t;
    }
    fit.final_loss = loss;
    fit.iterations = it;
    const bool last = it == opt.iterations || loss < opt.loss_floor;
    if (it % opt.record_every == 0 || last) fit.loss_history.push_back(loss);
    if (last) break;

    // Backward pass: g_bar is dL/d(partial[r+1]).
    Matrix g_bar = tail.transpose() * (2.0 * (t - target));
    for (int r = r_count - 1; r >= 0; --r) {
      const Vector& vr = v[r];
      const double s = vr.squaredNorm() + eps;
      const Matrix& x_prev = partial[r];
      // M = g_bar x_prev^T; only M v, M^T v and v^T M v are needed.
      const Vector mv = g_bar * (x_prev.transpose() * vr);
      const Vector mtv = x_prev * (g_bar.transpose() * vr);
      const double vmv = vr.dot(mv);
      grad[r] = -(2.0 / s) * (mv + mtv) + (8.0 / (s * s)) * vmv * vr;
      reflect_left(g_bar, vr, eps);  // H_r^T = H_r
    }
    for (int r = 0; r < r_count; ++r) step.update(r, v[r], grad[r]);
  }
  fit.fitted = best;
  return fit;
}

EdgeFit fit_circulant(const Matrix& target, const FitOptions& opt) {
  const int d = static_cast<int>(target.rows());
  const int m = circulant_phase_count(d);
  CirculantTransport c{d, Vector::Zero(m)};
  Stepper step(opt, 1, m);
  EdgeFit fit;
  fit.best_loss = std::numeric_limits<double>::infinity();
  Matrix best = Matrix::Identity(d, d);
  for (int it = 0; it <= opt.iterations; ++it) {
    const Matrix t = circulant_materialize(c);
    const Matrix resid = t - target;
    const double loss = resid.squaredNorm();
    if (loss < fit.best_loss) {
      fit.best_loss = loss;
      best = t;
    }
    fit.final_loss = loss;
    fit.iterations = it;
    const bool last = it == opt.iterations || loss < opt.loss_floor;
    if (it % opt.record_every == 0 || last) fit.loss_history.push_back(loss);
    if (last || m == 0) break;

    // dL/dc[r] sums 2 (C - T) over the wrapped diagonal r;
    // dc[r]/dphi_k = -(2/d) sin(phi_k + 2 pi k r / d).
    Vector dc = Vector::Zero(d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) dc(((a - b) % d + d) % d) += 2.0 * resid(a, b);
    Vector g = Vector::Zero(m);
    for (int k = 1; k <= m; ++k)
      for (int r = 0; r < d; ++r)
        g(k - 1) += dc(r) * (-2.0 / d) * std::sin(c.phases(k - 1) + 2.0 * std::numbers::pi * k * r / d);
    step.update(0, c.phases, g);
  }
  fit.fitted = best;
  return fit;
}

namespace {

void validate_fit_inputs(const TransportSet& targets, const FitOptions& opt) {
  if (opt.cls.kind == TransportClass::FrozenIdentity)
    throw std::invalid_argument("fit_transports: frozen identity has no parameters");
  if (opt.iterations < 0 || opt.record_every < 1 || !(opt.step > 0.0))
    throw std::invalid_argument("fit_transports: bad optimizer options");
  for (const auto& t : targets) {
    if (t.rows() != t.cols()) throw std::invalid_argument("fit_transports: target must be square");
    if (orthogonality_defect(t) > kTargetOrthTol) throw std::domain_error("fit_transports: target not orthogonal");
  }
}

EdgeFit fit_one(const TransportSet& targets, const FitOptions& opt, int e) {
  if (opt.cls.kind == TransportClass::Circulant) return fit_circulant(targets[e], opt);
  return fit_householder(targets[e], opt, derive_seed(opt.seed, {static_cast<std::uint64_t>(e)}));
}

void summarize(FitResult& res) {
  double acc = 0.0;
  for (const auto& e : res.edges) acc += e.best_loss;
  res.mean_best_loss = res.edges.empty() ? 0.0 : acc / static_cast<double>(res.edges.size());
}

}  // namespace

TransportSet FitResult::fitted() const {
  TransportSet out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.push_back(e.fitted);
  return out;
}

int FitResult::parity_warnings() const {
  return static_cast<int>(std::count_if(edges.begin(), edges.end(), [](const EdgeFit& e) { return e.parity_warning; }));
}

FitResult fit_transports(const TransportSet& targets, const FitOptions& opt) {
  validate_fit_inputs(targets, opt);
  FitResult res;
  res.edges.resize(targets.size());
  const int m = static_cast<int>(targets.size());
#pragma omp parallel for schedule(dynamic)
  for (int e = 0; e < m; ++e) res.edges[e] = fit_one(targets, opt, e);
  summarize(res);
  return res;
}

namespace serial {

FitResult fit_transports(const TransportSet& targets, const FitOptions& opt) {
  validate_fit_inputs(targets, opt);
  FitResult res;
  for (int e = 0; e < static_cast<int>(targets.size()); ++e) res.edges.push_back(fit_one(targets, opt, e));
  summarize(res);
  return res;
}

}  // namespace serial

}  // namespace hilbsheaf
