#pragma once

#include "curvflow/config.hpp"

#include <iosfwd>

namespace curvflow {

// Executes the suite selected by cfg["suite"], writing artifacts to the
// output directory.  Returns 0 on success, 1 on suite failure, 2 on a
// configuration error.
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace curvflow
