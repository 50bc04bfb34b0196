#include "srh/model_space.hpp"

#include <algorithm>
#include <sstream>

#include "srh/errors.hpp"

namespace srh {

std::string to_string(SpaceKind kind) {
    switch (kind) {
    case SpaceKind::FlatTorus3: return "flat_torus3";
    case SpaceKind::HeisenbergNil: return "heisenberg_nilmanifold";
    }
    return "unknown";
}

ModelSpace::ModelSpace(SpaceKind kind, int nx, int ny, int nz)
    : kind_(kind), nx_(nx), ny_(ny), nz_(nz) {
    if (nx < 4 || ny < 4 || nz < 4) {
        throw config_error("ModelSpace: each grid dimension must be at least 4, got " +
                           std::to_string(nx) + "x" + std::to_string(ny) + "x" +
                           std::to_string(nz));
    }
    hx_ = 1.0 / nx;
    hy_ = 1.0 / ny;
    hz_ = 1.0 / nz;
    weight_ = hx_ * hy_ * hz_;
    shear_ratio_ = static_cast<double>(nz) / ny;
    aligned_ = (kind != SpaceKind::HeisenbergNil) || (nz % ny == 0);
}

double ModelSpace::hmax() const { return std::max({hx_, hy_, hz_}); }

std::string ModelSpace::describe() const {
    std::ostringstream os;
    os << to_string(kind_) << " " << nx_ << "x" << ny_ << "x" << nz_;
    if (sheared() && !aligned_) os << " (shear interpolated)";
    return os.str();
}

} // namespace srh
