#pragma once

// Plain-text operator files.
//
//   # comment lines start with '#'
//   xi-operator 1
//   blocks 2
//   1 0.3              <- block dimension and trace weight
//   1,0                <- one row per line, entries "re,im"
//   1 0.7
//   -1,0
//
// A file may hold several records one after another; they are read in
// order (e.g. M then N).

#include <iosfwd>
#include <string>
#include <vector>

#include "xi_index/algebra.hpp"

namespace xidx::harness {

/// Reads every record of a stream. Throws StructuralError with the line
/// number on malformed input.
std::vector<Operator> read_operators(std::istream& in);
std::vector<Operator> read_operator_file(const std::string& path);

/// Writes one record with 17 significant digits.
void write_operator(std::ostream& out, const Operator& x);

}  // namespace xidx::harness
