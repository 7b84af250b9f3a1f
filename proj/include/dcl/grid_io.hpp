#pragma once

// Flat little-endian binary and CSV forms of multiplier grids and lattice
// functions. Binary payloads are interleaved (re, im) float64 values in
// row-major order.
//
// MultiplierGrid header: int64 n, int64 N, int64 j, float64 lambda.
// LatticeFunction header: int64 n, then int64 lo[n], then int64 shape[n].

#include <iosfwd>
#include <string>

#include "dcl/multipliers.hpp"
#include "dcl/operators.hpp"

namespace dcl {

void write_binary(std::ostream& os, const MultiplierGrid& g);
MultiplierGrid read_multiplier_grid(std::istream& is);

void write_binary(std::ostream& os, const LatticeFunction& f);
LatticeFunction read_lattice_function(std::istream& is);

/// Columns k_1..k_n, xi_1..xi_n, re, im.
void write_csv(std::ostream& os, const MultiplierGrid& g);
/// Columns x_1..x_n, re, im.
void write_csv(std::ostream& os, const LatticeFunction& f);

/// %.17g, the round-trip format used by every emitted table.
std::string fmt_double(double v);

}  // namespace dcl
