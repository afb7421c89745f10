#pragma once

#include <string>

namespace idslab {

/// Shortest-safe lossless rendering: 17 significant digits, '%.17g'.
std::string fmt17(double value);

}  // namespace idslab
