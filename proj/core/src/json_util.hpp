#pragma once

// Private to the core library: nlohmann/json never appears in public headers.

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "json.hpp"

namespace attrinfer::detail {

using Json = nlohmann::json;

// Reports carry at most 10 significant digits.
inline double round_significant(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return std::strtod(buf, nullptr);
}

}  // namespace attrinfer::detail
