#include "srh/params.hpp"

#include <cmath>
#include <sstream>

#include "srh/errors.hpp"

namespace srh {

void CDConstants::validate() const {
    std::ostringstream bad;
    if (!std::isfinite(rho1)) bad << "rho1 must be finite; ";
    if (!(rho2 > 0.0) || !std::isfinite(rho2)) bad << "rho2 must be positive; ";
    if (!(k >= 0.0) || !std::isfinite(k)) bad << "k must be >= 0; ";
    if (!(d >= 2.0)) bad << "d must be >= 2 (infinity allowed); ";
    const std::string msg = bad.str();
    if (!msg.empty()) throw config_error("invalid curvature-dimension constants: " + msg);
}

void PotentialBounds::validate() const {
    std::ostringstream bad;
    if (!(gamma1 >= 0.0) || !std::isfinite(gamma1)) bad << "gamma1 must be >= 0; ";
    if (!(gamma2 >= 0.0) || !std::isfinite(gamma2)) bad << "gamma2 must be >= 0; ";
    if (!std::isfinite(theta)) bad << "theta must be finite; ";
    const std::string msg = bad.str();
    if (!msg.empty()) throw config_error("invalid potential bounds: " + msg);
}

} // namespace srh
