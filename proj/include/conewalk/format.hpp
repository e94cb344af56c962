#pragma once

#include <string>

namespace conewalk {

/// 17 significant digits, so every double round-trips through text.
std::string format_double(double v);

}  // namespace conewalk
