#include "dogma/format.hpp"

#include <cstdio>

namespace dogma {

std::string fmt_double(double v, int significant_digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, v);
  return buf;
}

}  // namespace dogma
