#include "hilbsheaf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "hilbsheaf/rng.hpp"
#include "hilbsheaf/sheaf_io.hpp"
#include "hilbsheaf/spectral.hpp"

namespace hilbsheaf {

std::string code_version() { return HILBSHEAF_VERSION; }

namespace {

// Tags that separate the seed streams of the different sweeps.
enum : std::uint64_t { kTagTransport = 1, kTagSpectral = 2, kTagCircle = 3, kTagGaussian = 4, kTagFit = 5 };

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for a single value.
double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

SpdSheaf build_spd_sheaf(std::vector<SpdPoint> points, int knn, double bandwidth, int euler_steps) {
  if (points.empty()) throw std::invalid_argument("build_spd_sheaf: no points");
  const int p = points.front().dim();
  const int d = sym_dim(p);
  const int n = static_cast<int>(points.size());

  const Matrix dist = pairwise_distances<SpdPoint>(
      points, [](const SpdPoint& a, const SpdPoint& b) { return bures_wasserstein_distance(a, b); });
  SheafGraph graph = knn_graph_from_distances(dist, knn, bandwidth, d);

  std::vector<CholeskyFrame> frames(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) frames[i] = cholesky_frame(points[i]);

  const int m = graph.num_edges();
  TransportSet from_i(static_cast<std::size_t>(m));
  TransportSet from_j(static_cast<std::size_t>(m));
  std::vector<double> defect(static_cast<std::size_t>(m), 0.0);
#pragma omp parallel for schedule(dynamic, 8)
  for (int e = 0; e < m; ++e) {
    const auto [i, j] = graph.edges()[e];
    const SpdPoint mid = WassersteinGeodesic(points[i], points[j]).point(0.5);
    const CholeskyFrame frame_m = cholesky_frame(mid);
    const Matrix a = cholesky_rescale(frames[i], frame_m, parallel_transport(points[i], mid, euler_steps));
    const Matrix b = cholesky_rescale(frames[j], frame_m, parallel_transport(points[j], mid, euler_steps));
    defect[e] = std::max(orthogonality_defect(a), orthogonality_defect(b));
    from_i[e] = project_orthogonal(a).value;
    from_j[e] = project_orthogonal(b).value;
  }

  SpdSheaf out{std::move(points), std::move(graph), std::move(from_i), std::move(from_j), {}, 0.0};
  out.node_transports = compose_midpoint_transports(out.to_mid_from_i, out.to_mid_from_j);
  for (double x : defect) out.max_orthogonality_defect = std::max(out.max_orthogonality_defect, x);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

TransportClassTag class_tag(const std::string& name, int reflections) {
  if (name == "free") return TransportClassTag::free_orthogonal(reflections);
  if (name == "circulant") return TransportClassTag::circulant();
  if (name == "frozen") return TransportClassTag::frozen();
  throw ConfigError("unknown transport class: " + name);
}

double edge_plateau(const Matrix& target, const TransportClassTag& cls) {
  switch (cls.kind) {
    case TransportClass::FrozenIdentity: return (target - Matrix::Identity(target.rows(), target.cols())).squaredNorm();
    case TransportClass::Circulant: return circulant_projection_distance(target);
    case TransportClass::FreeOrthogonal: return (target - project_orthogonal(target).value).squaredNorm();
  }
  return 0.0;
}

}  // namespace

TransportRecoveryResult run_transport_recovery(const TransportRecoveryConfig& cfg, std::uint64_t seed) {
  TransportRecoveryResult result;
  const std::size_t num_classes = cfg.classes.size();
  for (int n : cfg.n_grid) {
    std::vector<TransportRecoveryRow> rows(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
      rows[c].n = n;
      rows[c].cls = cfg.classes[c];
    }
    for (int s = 0; s < cfg.seeds; ++s) {
      const auto un = static_cast<std::uint64_t>(n);
      const auto us = static_cast<std::uint64_t>(s);
      auto points = sample_spd(cfg.p, n, derive_seed(seed, {kTagTransport, un, us}));
      const SpdSheaf sheaf = build_spd_sheaf(std::move(points), cfg.knn, cfg.t, cfg.euler_steps);
      const TransportSet& targets =
          cfg.target == TargetMode::Midpoint ? sheaf.to_mid_from_i : sheaf.node_transports;

      for (std::size_t c = 0; c < num_classes; ++c) {
        const TransportClassTag tag = class_tag(cfg.classes[c], cfg.reflections);
        const double theory = plateau(targets, tag);
        std::vector<EdgeFit> fits;
        double empirical = theory;
        if (tag.kind != TransportClass::FrozenIdentity) {
          FitOptions opt;
          opt.cls = tag;
          opt.iterations = cfg.iterations;
          opt.step = cfg.step;
          opt.epsilon = cfg.epsilon;
          opt.fixed_final_reflection = cfg.fixed_final_reflection;
          opt.optimizer = cfg.optimizer;
          opt.init_spread = cfg.init_spread;
          opt.seed = derive_seed(seed, {kTagFit, un, us, static_cast<std::uint64_t>(c)});
          FitResult fit = fit_transports(targets, opt);
          empirical = fit.mean_best_loss;
          fits = std::move(fit.edges);
        }
        rows[c].empirical.push_back(empirical);
        rows[c].theory_per_seed.push_back(theory);

        for (int e = 0; e < sheaf.graph.num_edges(); ++e) {
          EdgeRow er;
          er.n = n;
          er.seed = s;
          er.edge_i = sheaf.graph.edges()[e].i;
          er.edge_j = sheaf.graph.edges()[e].j;
          er.cls = cfg.classes[c];
          er.plateau = edge_plateau(targets[e], tag);
          if (fits.empty()) {
            er.final_loss = er.best_loss = er.plateau;
          } else {
            er.final_loss = fits[e].final_loss;
            er.best_loss = fits[e].best_loss;
            er.iterations = fits[e].iterations;
          }
          result.edges.push_back(er);
        }
      }
    }
    for (auto& row : rows) {
      row.empirical_mean = mean_of(row.empirical);
      row.empirical_std = std_of(row.empirical);
      row.theory = mean_of(row.theory_per_seed);
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

SpectralStabilityResult run_spectral_stability(const SpectralStabilityConfig& cfg, std::uint64_t seed) {
  SpectralStabilityResult result;
  EigenOptions eig;
  eig.dense_limit = cfg.dense_limit;
  eig.check_residuals = cfg.check_residuals;

  for (std::size_t pi = 0; pi < cfg.p_values.size(); ++pi) {
    const int p = cfg.p_values[pi];
    const int d = sym_dim(p);
    const int n_max = cfg.reference_n(pi);
    if (static_cast<long long>(n_max) * d > cfg.dense_limit)
      throw std::length_error("spectral-stability: n_max * d = " + std::to_string(n_max * d) +
                              " exceeds the dense limit " + std::to_string(cfg.dense_limit) + "; reduce n_max");
    // cells[s][g]
    std::vector<std::vector<SpectralRow>> cells(static_cast<std::size_t>(cfg.seeds));
    for (int s = 0; s < cfg.seeds; ++s) {
      const auto all = sample_spd(p, n_max,
                                  derive_seed(seed, {kTagSpectral, static_cast<std::uint64_t>(p),
                                                     static_cast<std::uint64_t>(s)}));
      auto eigenvalues_at = [&](int n) {
        std::vector<SpdPoint> subset(all.begin(), all.begin() + n);
        const SpdSheaf sheaf = build_spd_sheaf(std::move(subset), cfg.knn, cfg.t, cfg.euler_steps);
        return bottom_k_eigenvalues(assemble_laplacian(sheaf.graph, sheaf.node_transports), cfg.k_eig, eig);
      };
      const std::vector<double> ref = eigenvalues_at(n_max);
      for (int n : cfg.n_grid) {
        const std::vector<double> eigs = n == n_max ? ref : eigenvalues_at(n);
        SpectralRow row;
        row.p = p;
        row.d = d;
        row.n = n;
        row.seed = s;
        row.k = cfg.k_eig;
        row.spec_l2 = spec_l2(eigs, ref, cfg.k_eig);
        row.spec_rel_max = spec_rel_max(eigs, ref, cfg.k_eig);
        row.eigenvalues = eigs;
        cells[s].push_back(std::move(row));
      }
    }
    for (std::size_t g = 0; g < cfg.n_grid.size(); ++g) {
      std::vector<double> l2, rel;
      for (int s = 0; s < cfg.seeds; ++s) {
        result.rows.push_back(cells[s][g]);
        l2.push_back(cells[s][g].spec_l2);
        rel.push_back(cells[s][g].spec_rel_max);
      }
      result.summary.push_back({p, d, cfg.n_grid[g], mean_of(l2), std_of(l2), mean_of(rel), std_of(rel)});
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

CircleConvergenceResult run_circle_convergence(const CircleConvergenceConfig& cfg, std::uint64_t seed) {
  CircleConvergenceResult result;
  CircleLaplacianOptions opt;
  opt.alpha = cfg.alpha;
  opt.chordal = cfg.chordal;
  const auto queries = equispaced_angles(cfg.queries);
  for (const auto& name : cfg.sections) {
    CircleSection section;
    section.kind = parse_section(name);
    for (int n : cfg.n_grid) {
      std::vector<double> pw, l2;
      for (int s = 0; s < cfg.seeds; ++s) {
        const auto sample = make_circle_sample(
            n, derive_seed(seed, {kTagCircle, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(s)}));
        const ConvergenceRow c = circle_convergence_row(sample, section, queries, opt);
        result.rows.push_back({n, cfg.alpha, c.t_n, name, s, c.pointwise_error, c.l2_error});
        pw.push_back(c.pointwise_error);
        l2.push_back(c.l2_error);
      }
      result.summary.push_back({n, name, mean_of(pw), mean_of(l2)});
    }
  }
  return result;
}

GaussianOracleReport run_gaussian_oracle(const GaussianOracleConfig& cfg, std::uint64_t seed) {
  return gaussian_identity_oracle(cfg.m, cfg.a, cfg.t, cfg.trials, derive_seed(seed, {kTagGaussian}));
}

// ---------------------------------------------------------------------------

namespace {

void check_keys(const KeyValueFile& kv, std::initializer_list<const char*> allowed, const std::string& experiment) {
  std::set<std::string> ok{"experiment", "seed"};
  for (const char* k : allowed) ok.insert(k);
  for (const auto& [key, value] : kv.entries())
    if (!ok.count(key)) throw ConfigError("config: unknown key '" + key + "' for " + experiment);
  if (kv.has("experiment") && kv.raw("experiment") != experiment)
    throw ConfigError("config: file is for experiment '" + kv.raw("experiment") + "', not '" + experiment + "'");
}

int positive_int(const KeyValueFile& kv, const std::string& key, int fallback) {
  const long long v = kv.get_int(key, fallback);
  if (v <= 0 || v > std::numeric_limits<int>::max()) throw ConfigError("config: '" + key + "' must be a positive integer");
  return static_cast<int>(v);
}

double positive_real(const KeyValueFile& kv, const std::string& key, double fallback) {
  const double v = kv.get_double(key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("config: '" + key + "' must be positive");
  return v;
}

std::vector<int> int_grid(const KeyValueFile& kv, const std::string& key, std::vector<int> fallback,
                          bool ascending) {
  std::vector<int> out = std::move(fallback);
  if (kv.has(key)) {
    out.clear();
    for (long long v : kv.get_ints(key)) {
      if (v <= 0 || v > std::numeric_limits<int>::max()) throw ConfigError("config: '" + key + "' entries must be positive");
      out.push_back(static_cast<int>(v));
    }
  }
  if (out.empty()) throw ConfigError("config: '" + key + "' is empty");
  if (ascending)
    for (std::size_t i = 1; i < out.size(); ++i)
      if (out[i] <= out[i - 1]) throw ConfigError("config: '" + key + "' must be strictly ascending");
  return out;
}

std::vector<std::string> word_list(const KeyValueFile& kv, const std::string& key, std::vector<std::string> fallback) {
  if (!kv.has(key)) return fallback;
  std::string text = kv.raw(key);
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream is(text);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  if (out.empty()) throw ConfigError("config: '" + key + "' is empty");
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace

TransportRecoveryConfig transport_recovery_config(const KeyValueFile& kv) {
  check_keys(kv,
             {"p", "n_grid", "knn", "t", "seeds", "reflections", "euler_steps", "iterations", "step", "epsilon",
              "fixed_final_reflection", "classes", "target", "optimizer", "init_spread"},
             "transport-recovery");
  TransportRecoveryConfig c;
  c.p = positive_int(kv, "p", c.p);
  c.n_grid = int_grid(kv, "n_grid", c.n_grid, true);
  c.knn = positive_int(kv, "knn", c.knn);
  c.t = positive_real(kv, "t", c.t);
  c.seeds = positive_int(kv, "seeds", c.seeds);
  c.reflections = positive_int(kv, "reflections", c.reflections);
  c.euler_steps = positive_int(kv, "euler_steps", c.euler_steps);
  c.iterations = positive_int(kv, "iterations", c.iterations);
  c.step = positive_real(kv, "step", c.step);
  c.epsilon = positive_real(kv, "epsilon", c.epsilon);
  c.fixed_final_reflection = kv.get_bool("fixed_final_reflection", c.fixed_final_reflection);
  c.init_spread = positive_real(kv, "init_spread", c.init_spread);
  const std::string optimizer = kv.get_string("optimizer", "adam");
  if (optimizer == "adam") c.optimizer = Optimizer::Adam;
  else if (optimizer == "gd") c.optimizer = Optimizer::GradientDescent;
  else throw ConfigError("config: optimizer must be 'adam' or 'gd'");
  c.classes = word_list(kv, "classes", c.classes);
  for (const auto& name : c.classes) class_tag(name, c.reflections);
  const std::string target = kv.get_string("target", "midpoint");
  if (target == "midpoint") c.target = TargetMode::Midpoint;
  else if (target == "node") c.target = TargetMode::Node;
  else throw ConfigError("config: target must be 'midpoint' or 'node'");
  if (c.n_grid.front() < c.knn + 1) throw ConfigError("config: smallest n must exceed knn");
  return c;
}

SpectralStabilityConfig spectral_stability_config(const KeyValueFile& kv) {
  check_keys(kv,
             {"p", "n_grid", "n_max", "knn", "t", "k_eig", "seeds", "euler_steps", "dense_limit", "check_residuals"},
             "spectral-stability");
  SpectralStabilityConfig c;
  c.p_values = int_grid(kv, "p", c.p_values, true);
  c.n_grid = int_grid(kv, "n_grid", c.n_grid, true);
  c.n_max = int_grid(kv, "n_max", c.n_max, false);
  if (c.n_max.size() != 1 && c.n_max.size() != c.p_values.size())
    throw ConfigError("config: n_max needs one value or one per p");
  c.knn = positive_int(kv, "knn", c.knn);
  c.t = positive_real(kv, "t", c.t);
  c.k_eig = positive_int(kv, "k_eig", c.k_eig);
  c.seeds = positive_int(kv, "seeds", c.seeds);
  c.euler_steps = positive_int(kv, "euler_steps", c.euler_steps);
  c.dense_limit = positive_int(kv, "dense_limit", c.dense_limit);
  c.check_residuals = kv.get_bool("check_residuals", c.check_residuals);
  for (std::size_t pi = 0; pi < c.p_values.size(); ++pi)
    if (c.n_grid.back() > c.reference_n(pi)) throw ConfigError("config: n_grid entries must not exceed n_max");
  if (c.n_grid.front() < c.knn + 1) throw ConfigError("config: smallest n must exceed knn");
  for (int p : c.p_values)
    if (c.k_eig > c.n_grid.front() * sym_dim(p)) throw ConfigError("config: k_eig exceeds n d at the smallest n");
  return c;
}

CircleConvergenceConfig circle_convergence_config(const KeyValueFile& kv) {
  check_keys(kv, {"n_grid", "alpha", "sections", "seeds", "queries", "distance"}, "circle-convergence");
  CircleConvergenceConfig c;
  c.n_grid = int_grid(kv, "n_grid", c.n_grid, true);
  c.alpha = positive_real(kv, "alpha", c.alpha);
  c.sections = word_list(kv, "sections", c.sections);
  for (const auto& s : c.sections) {
    try {
      parse_section(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  c.seeds = positive_int(kv, "seeds", c.seeds);
  c.queries = positive_int(kv, "queries", c.queries);
  const std::string dist = kv.get_string("distance", "arc");
  if (dist == "arc") c.chordal = false;
  else if (dist == "chordal") c.chordal = true;
  else throw ConfigError("config: distance must be 'arc' or 'chordal'");
  if (c.n_grid.front() < 2) throw ConfigError("config: n must be >= 2");
  return c;
}

GaussianOracleConfig gaussian_oracle_config(const KeyValueFile& kv) {
  check_keys(kv, {"m", "a", "t", "trials"}, "gaussian-oracle");
  GaussianOracleConfig c;
  c.m = positive_int(kv, "m", c.m);
  c.a = positive_real(kv, "a", c.a);
  c.t = positive_real(kv, "t", c.t);
  c.trials = kv.get_int("trials", c.trials);
  if (c.trials < 10000) throw ConfigError("config: trials must be >= 10000");
  return c;
}

std::string describe(const TransportRecoveryConfig& c) {
  std::ostringstream os;
  os << "p=" << c.p << " n_grid=" << join(c.n_grid) << " knn=" << c.knn << " t=" << format_short(c.t)
     << " seeds=" << c.seeds << " reflections=" << c.reflections << " euler_steps=" << c.euler_steps
     << " iterations=" << c.iterations << " step=" << format_short(c.step) << " epsilon=" << format_short(c.epsilon)
     << " fixed_final_reflection=" << (c.fixed_final_reflection ? "true" : "false")
     << " optimizer=" << (c.optimizer == Optimizer::Adam ? "adam" : "gd") << " init_spread=" << format_short(c.init_spread)
     << " classes=" << join(c.classes)
     << " target=" << (c.target == TargetMode::Midpoint ? "midpoint" : "node");
  return os.str();
}

std::string describe(const SpectralStabilityConfig& c) {
  std::ostringstream os;
  os << "p=" << join(c.p_values) << " n_grid=" << join(c.n_grid) << " n_max=" << join(c.n_max) << " knn=" << c.knn
     << " t=" << format_short(c.t) << " k_eig=" << c.k_eig << " seeds=" << c.seeds << " euler_steps=" << c.euler_steps
     << " dense_limit=" << c.dense_limit << " check_residuals=" << (c.check_residuals ? "true" : "false");
  return os.str();
}

std::string describe(const CircleConvergenceConfig& c) {
  std::ostringstream os;
  os << "n_grid=" << join(c.n_grid) << " alpha=" << format_short(c.alpha) << " sections=" << join(c.sections)
     << " seeds=" << c.seeds << " queries=" << c.queries << " distance=" << (c.chordal ? "chordal" : "arc");
  return os.str();
}

std::string describe(const GaussianOracleConfig& c) {
  std::ostringstream os;
  os << "m=" << c.m << " a=" << format_short(c.a) << " t=" << format_short(c.t) << " trials=" << c.trials;
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

void comment_line(std::ostream& os, const std::string& experiment, std::uint64_t seed, const std::string& config) {
  os << "# hilbsheaf " << code_version() << " experiment=" << experiment << " rng=" << Philox4x32::kName
     << " seed=" << seed << ' ' << config << '\n';
}

}  // namespace

void write_csv(std::ostream& os, const TransportRecoveryConfig& cfg, std::uint64_t seed,
               const TransportRecoveryResult& r) {
  comment_line(os, "transport-recovery", seed, describe(cfg));
  os << "n,class,empirical_mean,empirical_std,theory\n";
  for (const auto& row : r.rows)
    os << row.n << ',' << row.cls << ',' << format_short(row.empirical_mean) << ',' << format_short(row.empirical_std)
       << ',' << format_short(row.theory) << '\n';
}

void write_edges_csv(std::ostream& os, const TransportRecoveryConfig& cfg, std::uint64_t seed,
                     const TransportRecoveryResult& r) {
  comment_line(os, "transport-recovery", seed, describe(cfg));
  os << "n,seed,edge_i,edge_j,class,final_loss,best_loss,plateau,iterations\n";
  for (const auto& e : r.edges)
    os << e.n << ',' << e.seed << ',' << e.edge_i << ',' << e.edge_j << ',' << e.cls << ','
       << format_short(e.final_loss) << ',' << format_short(e.best_loss) << ',' << format_short(e.plateau) << ','
       << e.iterations << '\n';
}

void write_csv(std::ostream& os, const SpectralStabilityConfig& cfg, std::uint64_t seed,
               const SpectralStabilityResult& r) {
  comment_line(os, "spectral-stability", seed, describe(cfg));
  os << "p,d,n,seed,k,spec_l2,spec_rel_max";
  for (int i = 1; i <= cfg.k_eig; ++i) os << ",lambda_" << i;
  os << '\n';
  for (const auto& row : r.rows) {
    os << row.p << ',' << row.d << ',' << row.n << ',' << row.seed << ',' << row.k << ',' << format_short(row.spec_l2)
       << ',' << format_short(row.spec_rel_max);
    for (double v : row.eigenvalues) os << ',' << format_short(v);
    os << '\n';
  }
}

void write_summary_csv(std::ostream& os, const SpectralStabilityConfig& cfg, std::uint64_t seed,
                       const SpectralStabilityResult& r) {
  comment_line(os, "spectral-stability", seed, describe(cfg));
  os << "p,d,n,spec_l2_mean,spec_l2_std,spec_rel_max_mean,spec_rel_max_std\n";
  for (const auto& s : r.summary)
    os << s.p << ',' << s.d << ',' << s.n << ',' << format_short(s.spec_l2_mean) << ',' << format_short(s.spec_l2_std)
       << ',' << format_short(s.spec_rel_max_mean) << ',' << format_short(s.spec_rel_max_std) << '\n';
}

void write_csv(std::ostream& os, const CircleConvergenceConfig& cfg, std::uint64_t seed,
               const CircleConvergenceResult& r) {
  comment_line(os, "circle-convergence", seed, describe(cfg));
  os << "n,alpha,t_n,section,seed,pointwise_error,l2_error\n";
  for (const auto& row : r.rows)
    os << row.n << ',' << format_short(row.alpha) << ',' << format_short(row.t_n) << ',' << row.section << ','
       << row.seed << ',' << format_short(row.pointwise_error) << ',' << format_short(row.l2_error) << '\n';
}

void write_summary_csv(std::ostream& os, const CircleConvergenceConfig& cfg, std::uint64_t seed,
                       const CircleConvergenceResult& r) {
  comment_line(os, "circle-convergence", seed, describe(cfg));
  os << "n,section,pointwise_error_mean,l2_error_mean\n";
  for (const auto& s : r.summary)
    os << s.n << ',' << s.section << ',' << format_short(s.pointwise_error_mean) << ','
       << format_short(s.l2_error_mean) << '\n';
}

void write_csv(std::ostream& os, const GaussianOracleConfig& cfg, std::uint64_t seed, const GaussianOracleReport& r) {
  comment_line(os, "gaussian-oracle", seed, describe(cfg));
  const double at = r.a * r.t;
  os << "quantity,estimate,target,std_error\n";
  os << "first_moment," << format_short(r.first_moment) << ",0," << format_short(r.first_moment_se) << '\n';
  os << "second_moment_diag," << format_short(r.second_diag) << ',' << format_short(at) << ','
     << format_short(r.second_diag_se) << '\n';
  os << "second_moment_offdiag," << format_short(r.second_offdiag) << ",0," << format_short(r.second_offdiag_se)
     << '\n';
  os << "covariance_max_rel_residual," << format_short(r.covariance_max_rel_residual) << ",0,\n";
  os << "odd_moment_ratio," << format_short(r.odd_moment_ratio) << ',' << format_short(std::sqrt(2.0)) << ','
     << format_short(r.odd_moment_ratio_se) << '\n';
}

// ---------------------------------------------------------------------------

std::vector<std::string> validate(const TransportRecoveryResult& r) {
  std::vector<std::string> fails;
  for (const auto& row : r.rows) {
    const std::string cell = "n=" + std::to_string(row.n) + " class=" + row.cls;
    if (row.cls == "free") {
      if (row.empirical_mean > 1e-6) fails.push_back(cell + ": empirical " + format_short(row.empirical_mean) + " > 1e-6");
    } else {
      for (std::size_t s = 0; s < row.empirical.size(); ++s) {
        const double th = row.theory_per_seed[s];
        if (std::abs(row.empirical[s] - th) > 0.03 * th)
          fails.push_back(cell + " seed=" + std::to_string(s) + ": empirical " + format_short(row.empirical[s]) +
                          " not within 3% of plateau " + format_short(th));
      }
    }
  }
  for (const auto& a : r.rows)
    for (const auto& b : r.rows)
      if (a.n == b.n && a.cls == "circulant" && b.cls == "frozen")
        for (std::size_t s = 0; s < a.theory_per_seed.size(); ++s)
          if (!(a.theory_per_seed[s] < b.theory_per_seed[s]))
            fails.push_back("n=" + std::to_string(a.n) + " seed=" + std::to_string(s) +
                            ": circulant plateau not below frozen plateau");
  return fails;
}

std::vector<std::string> validate(const SpectralStabilityResult& r) {
  std::vector<std::string> fails;
  for (const auto& row : r.rows)
    if (row.spec_l2 < 0.0 || row.spec_rel_max < 0.0) fails.push_back("negative spectral metric");
  std::set<int> ps;
  for (const auto& s : r.summary) ps.insert(s.p);
  for (int p : ps) {
    const SpectralSummaryRow* first = nullptr;
    const SpectralSummaryRow* last = nullptr;
    for (const auto& s : r.summary)
      if (s.p == p) {
        if (!first) first = &s;
        last = &s;
      }
    if (first == last) continue;
    if (!(last->spec_l2_mean < first->spec_l2_mean))
      fails.push_back("p=" + std::to_string(p) + ": spec_l2 at n=" + std::to_string(last->n) +
                      " not below n=" + std::to_string(first->n));
    if (!(last->spec_rel_max_mean < first->spec_rel_max_mean))
      fails.push_back("p=" + std::to_string(p) + ": spec_rel_max at n=" + std::to_string(last->n) +
                      " not below n=" + std::to_string(first->n));
  }
  return fails;
}

std::vector<std::string> validate(const CircleConvergenceResult& r) {
  std::vector<std::string> fails;
  for (const auto& row : r.rows)
    if (row.section == "constant" && (row.pointwise_error != 0.0 || row.l2_error != 0.0))
      fails.push_back("constant section error nonzero at n=" + std::to_string(row.n));
  std::set<std::string> sections;
  for (const auto& s : r.summary) sections.insert(s.section);
  for (const auto& name : sections) {
    if (name == "constant") continue;
    std::vector<const CircleSummaryRow*> seq;
    for (const auto& s : r.summary)
      if (s.section == name) seq.push_back(&s);
    for (std::size_t i = 1; i < seq.size(); ++i)
      if (!(seq[i]->l2_error_mean < seq[i - 1]->l2_error_mean))
        fails.push_back(name + ": L2 error not decreasing from n=" + std::to_string(seq[i - 1]->n) + " to n=" +
                        std::to_string(seq[i]->n));
    // Four doublings of n should at least halve the error.
    if (seq.size() > 1 && seq.back()->n >= 16 * seq.front()->n && !(seq.back()->l2_error_mean <= 0.5 * seq.front()->l2_error_mean))
      fails.push_back(name + ": L2 error at n=" + std::to_string(seq.back()->n) + " is above half its value at n=" +
                      std::to_string(seq.front()->n));
  }
  return fails;
}

std::vector<std::string> validate(const GaussianOracleReport& r) {
  std::vector<std::string> fails;
  if (std::abs(r.first_moment) > 3.0 * r.first_moment_se) fails.push_back("first moment beyond 3 standard errors");
  if (r.covariance_max_rel_residual > 0.01) fails.push_back("covariance residual above 1%");
  if (std::abs(r.odd_moment_ratio / std::sqrt(2.0) - 1.0) > 0.05) fails.push_back("odd-moment ratio not within 5% of sqrt(2)");
  return fails;
}

}  // namespace hilbsheaf
