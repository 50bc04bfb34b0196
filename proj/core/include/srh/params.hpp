#pragma once

#include <cmath>

namespace srh {

/**
 * Constants of the generalized curvature-dimension inequality
 *
 *   Gamma2(f) + nu Gamma2Z(f) >= (1/d) (Lf)^2 + (rho1 - k/nu) Gamma(f)
 *                                + rho2 GammaZ(f)   for every nu > 0.
 *
 * rho1 may take any sign; rho2 > 0; k >= 0; d >= 2 or infinity (use
 * std::numeric_limits<double>::infinity(), which turns the (Lf)^2 term off).
 */
struct CDConstants {
    double rho1 = 0.0;
    double rho2 = 0.5;
    double k = 1.0;
    double d = 2.0;

    bool finite_dim() const { return std::isfinite(d); }
    /// Throws config_error when outside the admissible ranges.
    void validate() const;
};

/// Uniform bounds on a potential: gamma1^2 >= Gamma(V), gamma2^2 >= GammaZ(V),
/// theta >= LV, all pointwise over space (and time for time-varying V).
struct PotentialBounds {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double theta = 0.0;

    bool is_zero() const { return gamma1 == 0.0 && gamma2 == 0.0 && theta == 0.0; }
    void validate() const;
};

} // namespace srh
