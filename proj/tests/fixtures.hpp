#pragma once

#include "epr/cherenkov_kernel.hpp"

namespace fixtures {

// Reference physics on lighter grids, for tests that need a real kernel quickly.
inline epr::PhysicalScenario coarse_scenario() {
    auto s = epr::reference_scenario();
    s.grid.n_kx = 41;
    s.grid.n_ky = 101;
    s.grid.n_kz = 101;
    s.grid.n_x = 801;
    return s;
}

inline const epr::MomentumKernel& coarse_kernel() {
    static const epr::MomentumKernel K = epr::build_kernel(coarse_scenario());
    return K;
}

} // namespace fixtures
