#pragma once

#include <cstdio>
#include <string>

namespace mdelab {

/// Round-trippable decimal: 17 significant digits, fixed across platforms.
inline std::string fmt17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value == 0.0 ? 0.0 : value);
  return buf;
}

}  // namespace mdelab
