#pragma once

#include <map>

#include "edgecasc/core_model.hpp"

namespace edgecasc {

/// Threshold limits for server model switching. A tier whose devices all sit
/// below `c_lower` asks for a faster model; every tier above its `c_upper`
/// asks for a heavier one.
struct SwitchLimits {
    double c_lower = 0.0;
    std::map<TierId, double> c_upper;

    void validate() const;
};

}  // namespace edgecasc
