#pragma once

#include <cmath>
#include <vector>

#include "srh/field_synth.hpp"
#include "srh/grid_field.hpp"
#include "srh/model_space.hpp"
#include "srh/rng.hpp"

namespace srh::testing {

/// Least-squares convergence order from errors on a dyadic grid ladder
/// (each level halves h). With three levels this is log2(e0/e2)/2.
inline double fitted_order(const std::vector<double>& errs) {
    const int n = static_cast<int>(errs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = -i; // log2 h decreases by 1 per level
        const double y = std::log2(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Grid ladder used by refinement studies; nz keeps the 2:1 default aspect on
/// the Heisenberg quotient so every level stays shear aligned.
inline ModelSpace ladder_space(SpaceKind kind, int n) {
    return kind == SpaceKind::HeisenbergNil ? ModelSpace(kind, n, n, 2 * n)
                                            : ModelSpace(kind, n, n, n);
}

/// Deterministic smooth test field with z-dependence where the space allows.
inline GridField smooth_probe(const ModelSpace& space, int variant = 0) {
    const double c = 0.07 * variant;
    LatticeBump bump(space.kind(), 0.31 + c, 0.57 - c, 0.13 + c, 0.16, 0.14, 0.13);
    GridField f = bump.sample(space);
    std::vector<WaveSpec> waves = {{1, -1, 0, 0.4, 0.3 + c}, {0, 1, 0, 0.25, 1.1}};
    GridField w = wave_field(space, waves);
    axpy(1.0, w, f);
    return f;
}

} // namespace srh::testing
