#pragma once

#include <string>

namespace dogma {

// Fixed-format double rendering for tables and model files. Table output
// uses 6 significant digits; model files use 17 so values round-trip
// exactly through strtod.
std::string fmt_double(double v, int significant_digits = 6);

}  // namespace dogma
