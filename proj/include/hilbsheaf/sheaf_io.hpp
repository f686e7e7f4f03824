#pragma once

// Line-oriented text format for a sheaf graph with its transports:
//
//   hilbsheaf-sheaf v1
//   <n> <d> <t> <num_edges>
//   <i> <j> <k_ij> <P_00> <P_01> ... <P_{d-1,d-1}>     (one line per edge)
//
// P is the stored transport P_{j->i}, row-major. A BlockSheafLaplacian is
// persisted through the graph and transports it was assembled from. Reals are written with 17
// significant digits so a write/read cycle is exact.

#include <iosfwd>
#include <string>

#include "hilbsheaf/sheaf.hpp"

namespace hilbsheaf {

struct SerializedSheaf {
  SheafGraph graph;
  TransportSet transports;
};

void write_sheaf(std::ostream& os, const SheafGraph& graph, const TransportSet& transports);
/// Throws std::runtime_error on malformed input.
SerializedSheaf read_sheaf(std::istream& is);

/// 17 significant digits.
std::string format_real(double x);
/// Shortest decimal form that parses back to the same double.
std::string format_short(double x);

}  // namespace hilbsheaf
