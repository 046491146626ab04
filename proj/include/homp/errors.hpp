#pragma once

#include <stdexcept>
#include <string>

namespace homp {

// Invalid inputs, mismatched grids, malformed files. CLI maps this to exit 2.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Runtime numerical failures (negative diffusion, degenerate densities, ...).
// CLI maps this to exit 3.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace homp
