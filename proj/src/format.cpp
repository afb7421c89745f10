#include "idslab/format.hpp"

#include <cstdio>

namespace idslab {

std::string fmt17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace idslab
