#pragma once

// Polynomial sheaf filters and the layered (n, d)-HilbNet forward map
//   S^{l+1} = sigma( sum_{k<K_l} L^k S^l W_{l,k} ).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hilbsheaf/sheaf.hpp"

namespace hilbsheaf {

enum class Nonlinearity { Identity, Relu, Tanh };

Nonlinearity parse_nonlinearity(const std::string& name);
std::string nonlinearity_name(Nonlinearity nl);

struct FilterLayer {
  std::vector<Matrix> weights;  // K matrices of shape F_in x F_out
  int order() const { return static_cast<int>(weights.size()); }
};

struct FilterSpec {
  std::vector<int> widths;  // F_0 .. F_L
  std::vector<FilterLayer> layers;
  Nonlinearity nonlinearity = Nonlinearity::Relu;

  int num_layers() const { return static_cast<int>(layers.size()); }
  /// Throws std::invalid_argument when weight shapes disagree with widths.
  void validate() const;
};

/// Weights i.i.d. N(0, scale^2 / F_in).
FilterSpec random_filter_spec(const std::vector<int>& widths, const std::vector<int>& orders, Nonlinearity nl,
                              std::uint64_t seed, double scale = 1.0);

/// Key-value file:
///   layers = L
///   widths = F_0 ... F_L
///   orders = K_0 ... K_{L-1}
///   nonlinearity = relu | tanh | identity
///   W.<l>.<k> = F_l * F_{l+1} reals, row-major
FilterSpec load_filter_spec(std::istream& is);
void save_filter_spec(std::ostream& os, const FilterSpec& spec);

/// Multi-channel signal: nd x F matrix, node-major rows.
struct MultiChannelCochain {
  int n = 0;
  int d = 0;
  Matrix values;

  MultiChannelCochain() = default;
  MultiChannelCochain(int n_, int d_, Matrix v);
  int channels() const { return static_cast<int>(values.cols()); }
};

/// sum_k L^k S W_k by repeated application of L; L^k is never formed.
MultiChannelCochain polynomial_filter(const BlockSheafLaplacian& lap, const MultiChannelCochain& s,
                                      const std::vector<Matrix>& weights);

MultiChannelCochain forward(const BlockSheafLaplacian& lap, const MultiChannelCochain& s0, const FilterSpec& spec);

/// RMS over probes of the per-node Frobenius norm of the output difference,
/// sqrt( (1/P) sum_p ||Y_a[probe_a] - Y_b[probe_b]||^2 ). Probes pair a node
/// index in sample a with the same base point's index in sample b.
double transfer_disagreement(const BlockSheafLaplacian& lap_a, const BlockSheafLaplacian& lap_b,
                             const MultiChannelCochain& s_a, const MultiChannelCochain& s_b, const FilterSpec& spec,
                             const std::vector<std::pair<int, int>>& probes);

/// prod_l C_sigma sum_k ||L||^k ||W_{l,k}||_op with C_sigma = 1 for all supported sigma.
double lipschitz_bound(double laplacian_op_norm, const FilterSpec& spec);

/// CSV rows: node,coord,channel,value.
void write_output_csv(std::ostream& os, const MultiChannelCochain& y);

}  // namespace hilbsheaf
