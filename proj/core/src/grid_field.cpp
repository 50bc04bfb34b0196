#include "srh/grid_field.hpp"

#include <algorithm>
#include <cmath>

#include "srh/errors.hpp"

namespace srh {

const ModelSpace& GridField::space() const {
    if (!space_) throw contract_error("GridField: use of a default-constructed field");
    return *space_;
}

namespace {
inline int imod(int a, int n) {
    int r = a % n;
    return (r < 0) ? r + n : r;
}
} // namespace

double GridField::read_wrapped(int i, int j, int l) const {
    const ModelSpace& ms = space();
    const int nx = ms.nx(), ny = ms.ny(), nz = ms.nz();
    j = imod(j, ny);
    // Crossing the x boundary shifts the z read position by the row's shear.
    double zpos = l;
    while (i >= nx) {
        i -= nx;
        zpos -= ms.shear_cells(j);
    }
    while (i < 0) {
        i += nx;
        zpos += ms.shear_cells(j);
    }
    zpos -= nz * std::floor(zpos / nz);
    const double nearest = std::nearbyint(zpos);
    if (std::abs(zpos - nearest) < 1e-9) {
        return v_[ms.index(i, j, imod(static_cast<int>(nearest), nz))];
    }
    const int l0 = static_cast<int>(std::floor(zpos));
    const double w = zpos - l0;
    const double a = v_[ms.index(i, j, imod(l0, nz))];
    const double b = v_[ms.index(i, j, imod(l0 + 1, nz))];
    return (1.0 - w) * a + w * b;
}

void GridField::fill_from(const std::function<double(double, double, double)>& fn) {
    const ModelSpace& ms = space();
    std::size_t idx = 0;
    for (int i = 0; i < ms.nx(); ++i)
        for (int j = 0; j < ms.ny(); ++j)
            for (int l = 0; l < ms.nz(); ++l, ++idx)
                v_[idx] = fn(ms.x_of(i), ms.y_of(j), ms.z_of(l));
}

double GridField::min() const { return *std::min_element(v_.begin(), v_.end()); }
double GridField::max() const { return *std::max_element(v_.begin(), v_.end()); }

double GridField::linf() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
}

double GridField::integral() const {
    double s = 0.0;
    for (double x : v_) s += x;
    return s * space().cell_weight();
}

double GridField::l2() const {
    double s = 0.0;
    for (double x : v_) s += x * x;
    return std::sqrt(s * space().cell_weight());
}

void require_same_space(const GridField& f, const GridField& g, const char* op) {
    if (f.space() != g.space()) {
        throw contract_error(std::string(op) + ": fields live on different spaces (" +
                             f.space().describe() + " vs " + g.space().describe() + ")");
    }
}

double inner(const GridField& f, const GridField& g) {
    require_same_space(f, g, "inner");
    double s = 0.0;
    const double* a = f.data();
    const double* b = g.data();
    for (std::size_t n = 0; n < f.size(); ++n) s += a[n] * b[n];
    return s * f.space().cell_weight();
}

GridField operator+(const GridField& f, const GridField& g) {
    require_same_space(f, g, "operator+");
    GridField out(f.space());
    for (std::size_t n = 0; n < f.size(); ++n) out[n] = f[n] + g[n];
    return out;
}

GridField operator-(const GridField& f, const GridField& g) {
    require_same_space(f, g, "operator-");
    GridField out(f.space());
    for (std::size_t n = 0; n < f.size(); ++n) out[n] = f[n] - g[n];
    return out;
}

GridField operator*(double c, const GridField& f) {
    GridField out(f.space());
    for (std::size_t n = 0; n < f.size(); ++n) out[n] = c * f[n];
    return out;
}

GridField pointwise_mul(const GridField& f, const GridField& g) {
    require_same_space(f, g, "pointwise_mul");
    GridField out(f.space());
    for (std::size_t n = 0; n < f.size(); ++n) out[n] = f[n] * g[n];
    return out;
}

GridField map_field(const GridField& f, const std::function<double(double)>& fn) {
    GridField out(f.space());
    for (std::size_t n = 0; n < f.size(); ++n) out[n] = fn(f[n]);
    return out;
}

void axpy(double c, const GridField& x, GridField& y) {
    require_same_space(x, y, "axpy");
    for (std::size_t n = 0; n < x.size(); ++n) y[n] += c * x[n];
}

} // namespace srh
