#pragma once

#include <functional>
#include <ostream>
#include <string>

#include "havana/types.hpp"

namespace havana {

/// Format with 9 significant digits (the precision of all text outputs).
std::string format_g9(Scalar value);

/// Run `writer` against a temporary file next to `path`, then rename it into
/// place. On any failure the temporary is removed and `path` is untouched.
void atomic_write(const std::string& path,
                  const std::function<void(std::ostream&)>& writer);

}  // namespace havana
