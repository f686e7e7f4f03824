#include "hilbsheaf/hilbnet.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hilbsheaf/config.hpp"
#include "hilbsheaf/rng.hpp"
#include "hilbsheaf/sheaf_io.hpp"

namespace hilbsheaf {

Nonlinearity parse_nonlinearity(const std::string& name) {
  if (name == "relu") return Nonlinearity::Relu;
  if (name == "tanh") return Nonlinearity::Tanh;
  if (name == "identity") return Nonlinearity::Identity;
  throw std::invalid_argument("unknown nonlinearity: " + name);
}

std::string nonlinearity_name(Nonlinearity nl) {
  switch (nl) {
    case Nonlinearity::Relu: return "relu";
    case Nonlinearity::Tanh: return "tanh";
    case Nonlinearity::Identity: return "identity";
  }
  return "identity";
}

void FilterSpec::validate() const {
  if (widths.size() != layers.size() + 1) throw std::invalid_argument("FilterSpec: need L + 1 widths");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].weights.empty()) throw std::invalid_argument("FilterSpec: polynomial order must be >= 1");
    for (const auto& w : layers[l].weights)
      if (w.rows() != widths[l] || w.cols() != widths[l + 1])
        throw std::invalid_argument("FilterSpec: weight shape does not match channel widths");
  }
}

FilterSpec random_filter_spec(const std::vector<int>& widths, const std::vector<int>& orders, Nonlinearity nl,
                              std::uint64_t seed, double scale) {
  if (widths.size() != orders.size() + 1) throw std::invalid_argument("random_filter_spec: need L + 1 widths");
  Philox4x32 rng(seed);
  FilterSpec spec;
  spec.widths = widths;
  spec.nonlinearity = nl;
  for (std::size_t l = 0; l < orders.size(); ++l) {
    FilterLayer layer;
    const double sd = scale / std::sqrt(static_cast<double>(widths[l]));
    for (int k = 0; k < orders[l]; ++k) {
      Matrix w(widths[l], widths[l + 1]);
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = sd * rng.normal();
      layer.weights.push_back(std::move(w));
    }
    spec.layers.push_back(std::move(layer));
  }
  spec.validate();
  return spec;
}

FilterSpec load_filter_spec(std::istream& is) {
  const KeyValueFile kv = KeyValueFile::parse(is);
  FilterSpec spec;
  const auto num_layers = kv.get_int("layers", -1);
  if (num_layers < 1) throw ConfigError("filter spec: 'layers' must be >= 1");
  for (auto w : kv.get_ints("widths")) spec.widths.push_back(static_cast<int>(w));
  const auto orders = kv.get_ints("orders");
  if (static_cast<long long>(orders.size()) != num_layers || static_cast<long long>(spec.widths.size()) != num_layers + 1)
    throw ConfigError("filter spec: widths/orders do not match layer count");
  spec.nonlinearity = parse_nonlinearity(kv.get_string("nonlinearity", "relu"));
  for (int l = 0; l < num_layers; ++l) {
    FilterLayer layer;
    for (int k = 0; k < orders[l]; ++k) {
      const std::string key = "W." + std::to_string(l) + "." + std::to_string(k);
      const auto vals = kv.get_doubles(key);
      const int rows = spec.widths[l];
      const int cols = spec.widths[l + 1];
      if (static_cast<int>(vals.size()) != rows * cols) throw ConfigError("filter spec: wrong entry count for " + key);
      Matrix w(rows, cols);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) w(r, c) = vals[static_cast<std::size_t>(r) * cols + c];
      layer.weights.push_back(std::move(w));
    }
    spec.layers.push_back(std::move(layer));
  }
  spec.validate();
  return spec;
}

void save_filter_spec(std::ostream& os, const FilterSpec& spec) {
  spec.validate();
  os << "layers = " << spec.num_layers() << "\nwidths =";
  for (int w : spec.widths) os << ' ' << w;
  os << "\norders =";
  for (const auto& l : spec.layers) os << ' ' << l.order();
  os << "\nnonlinearity = " << nonlinearity_name(spec.nonlinearity) << '\n';
  for (int l = 0; l < spec.num_layers(); ++l)
    for (int k = 0; k < spec.layers[l].order(); ++k) {
      const Matrix& w = spec.layers[l].weights[k];
      os << "W." << l << '.' << k << " =";
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) os << ' ' << format_real(w(r, c));
      os << '\n';
    }
}

MultiChannelCochain::MultiChannelCochain(int n_, int d_, Matrix v) : n(n_), d(d_), values(std::move(v)) {
  if (values.rows() != static_cast<Eigen::Index>(n) * d) throw std::invalid_argument("MultiChannelCochain: rows != n d");
}

MultiChannelCochain polynomial_filter(const BlockSheafLaplacian& lap, const MultiChannelCochain& s,
                                      const std::vector<Matrix>& weights) {
  if (weights.empty()) throw std::invalid_argument("polynomial_filter: K must be >= 1");
  if (s.n != lap.num_nodes() || s.d != lap.stalk_dim()) throw std::invalid_argument("polynomial_filter: shape mismatch");
  for (const auto& w : weights)
    if (w.rows() != s.channels() || w.cols() != weights.front().cols())
      throw std::invalid_argument("polynomial_filter: weight shape mismatch");

  Matrix power = s.values;
  Matrix out = power * weights[0];
  for (std::size_t k = 1; k < weights.size(); ++k) {
    power = apply_laplacian(lap, power);
    out.noalias() += power * weights[k];
  }
  return {s.n, s.d, std::move(out)};
}

namespace {

void activate(Matrix& m, Nonlinearity nl) {
  switch (nl) {
    case Nonlinearity::Identity: break;
    case Nonlinearity::Relu: m = m.cwiseMax(0.0); break;
    case Nonlinearity::Tanh: m = m.array().tanh().matrix(); break;
  }
}

}  // namespace

MultiChannelCochain forward(const BlockSheafLaplacian& lap, const MultiChannelCochain& s0, const FilterSpec& spec) {
  spec.validate();
  if (s0.channels() != spec.widths.front()) throw std::invalid_argument("forward: input channels != F_0");
  MultiChannelCochain s = s0;
  for (const auto& layer : spec.layers) {
    s = polynomial_filter(lap, s, layer.weights);
    activate(s.values, spec.nonlinearity);
  }
  return s;
}

double transfer_disagreement(const BlockSheafLaplacian& lap_a, const BlockSheafLaplacian& lap_b,
                             const MultiChannelCochain& s_a, const MultiChannelCochain& s_b, const FilterSpec& spec,
                             const std::vector<std::pair<int, int>>& probes) {
  if (probes.empty()) throw std::invalid_argument("transfer_disagreement: no shared probe nodes");
  if (lap_a.stalk_dim() != lap_b.stalk_dim()) throw std::invalid_argument("transfer_disagreement: stalk mismatch");
  const auto ya = forward(lap_a, s_a, spec);
  const auto yb = forward(lap_b, s_b, spec);
  const int d = ya.d;
  double acc = 0.0;
  for (const auto& [pa, pb] : probes) {
    if (pa < 0 || pa >= ya.n || pb < 0 || pb >= yb.n) throw std::invalid_argument("transfer_disagreement: bad probe");
    acc += (ya.values.middleRows(static_cast<Eigen::Index>(pa) * d, d) -
            yb.values.middleRows(static_cast<Eigen::Index>(pb) * d, d))
               .squaredNorm();
  }
  return std::sqrt(acc / static_cast<double>(probes.size()));
}

double lipschitz_bound(double laplacian_op_norm, const FilterSpec& spec) {
  double bound = 1.0;
  for (const auto& layer : spec.layers) {
    double sum = 0.0;
    double power = 1.0;
    for (const auto& w : layer.weights) {
      const double op = Eigen::JacobiSVD<Matrix>(w).singularValues()(0);
      sum += power * op;
      power *= laplacian_op_norm;
    }
    bound *= sum;
  }
  return bound;
}

void write_output_csv(std::ostream& os, const MultiChannelCochain& y) {
  os << "node,coord,channel,value\n";
  for (int i = 0; i < y.n; ++i)
    for (int a = 0; a < y.d; ++a)
      for (int c = 0; c < y.channels(); ++c)
        os << i << ',' << a << ',' << c << ',' << format_real(y.values(static_cast<Eigen::Index>(i) * y.d + a, c))
           << '\n';
}

}  // namespace hilbsheaf
