#pragma once

#include <filesystem>
#include <iosfwd>

#include "vortexlab/field_pair.hpp"

namespace vortexlab {

// Text format:
//
//   vortexlab-field 1
//   n1 <int>
//   n2 <int>
//   L1 <real>
//   L2 <real>
//   eps <real>
//   form full|regular
//   components u1 u2
//   values
//   <n1 lines of n2 values for u1>
//   <n1 lines of n2 values for u2>
//
// Values are written in shortest round-trip decimal form, so reading back
// reproduces every double exactly.
struct StoredPair {
  FieldPair pair;
  double l1 = 0.0;
  double l2 = 0.0;
};

void write_field_pair(std::ostream& out, const FieldPair& pair, double l1, double l2);
void write_field_pair(const std::filesystem::path& path, const FieldPair& pair, double l1, double l2);
StoredPair read_field_pair(std::istream& in);
StoredPair read_field_pair(const std::filesystem::path& path);

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

}  // namespace vortexlab
