#pragma once

#include <array>
#include <string>

#include "vortexlab/field.hpp"

namespace vortexlab {

enum class Form { full, regular };

std::string to_string(Form form);
Form form_from_string(const std::string& s);

// Discrete (u1, u2). In regular form the full value is u0_i + u_i.
struct FieldPair {
  std::array<Field, 2> u;
  double eps = 1.0;
  Form form = Form::regular;
};

}  // namespace vortexlab
