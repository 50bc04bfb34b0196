#include "srh/forms.hpp"

#include <cmath>
#include <vector>

#include "srh/errors.hpp"

namespace srh {

namespace {

inline int imod(int a, int n) {
    int r = a % n;
    return (r < 0) ? r + n : r;
}

/// Materialize the ghost copy of row (i_src, j, .) as seen across the x
/// boundary: out[l] = f(i_src, j, l + zshift cells), wrapped in z. On
/// shear-aligned grids zshift is an integer and the copy is exact; otherwise
/// the row is linearly interpolated in z.
void ghost_row(const GridField& f, int i_src, int j, double zshift, double* out) {
    const ModelSpace& ms = f.space();
    const int nz = ms.nz();
    const double* row = f.data() + ms.index(i_src, j, 0);
    const double fs = std::floor(zshift);
    const double w = zshift - fs;
    int k = imod(static_cast<int>(fs) % nz, nz);
    if (w < 1e-12) {
        for (int l = 0; l < nz; ++l) {
            out[l] = row[k];
            if (++k == nz) k = 0;
        }
    } else {
        int k1 = (k + 1 == nz) ? 0 : k + 1;
        for (int l = 0; l < nz; ++l) {
            out[l] = (1.0 - w) * row[k] + w * row[k1];
            if (++k == nz) k = 0;
            if (++k1 == nz) k1 = 0;
        }
    }
}

/// Row pointer with x-boundary ghosts resolved into scratch when needed.
const double* x_neighbor_row(const GridField& f, int i, int di, int j,
                             std::vector<double>& scratch) {
    const ModelSpace& ms = f.space();
    const int nx = ms.nx();
    const int it = i + di;
    if (it >= 0 && it < nx) return f.data() + ms.index(it, j, 0);
    const int i_src = imod(it, nx);
    // Crossing +x reads at z - shear, crossing -x at z + shear.
    const double zshift = (it >= nx) ? -ms.shear_cells(j) : ms.shear_cells(j);
    scratch.resize(ms.nz());
    ghost_row(f, i_src, j, zshift, scratch.data());
    return scratch.data();
}

void apply_L_into(const GridField& f, GridField& out) {
    const ModelSpace& ms = f.space();
    require_same_space(f, out, "apply_L");
    const int nx = ms.nx(), ny = ms.ny(), nz = ms.nz();
    const double cxx = 1.0 / (ms.hx() * ms.hx());
    const double cyy = 1.0 / (ms.hy() * ms.hy());
    const bool nil = ms.kind() == SpaceKind::HeisenbergNil;
    std::vector<double> sxp, sxm;
    for (int i = 0; i < nx; ++i) {
        const double x = ms.x_of(i);
        const double czz = nil ? x * x / (ms.hz() * ms.hz()) : 0.0;
        const double cyz = nil ? x / (2.0 * ms.hy() * ms.hz()) : 0.0;
        for (int j = 0; j < ny; ++j) {
            const int jp = (j + 1 == ny) ? 0 : j + 1;
            const int jm = (j == 0) ? ny - 1 : j - 1;
            const double* rc = f.data() + ms.index(i, j, 0);
            const double* rxp = x_neighbor_row(f, i, +1, j, sxp);
            const double* rxm = x_neighbor_row(f, i, -1, j, sxm);
            const double* ryp = f.data() + ms.index(i, jp, 0);
            const double* rym = f.data() + ms.index(i, jm, 0);
            double* ro = out.data() + ms.index(i, j, 0);
            if (!nil) {
                for (int l = 0; l < nz; ++l) {
                    ro[l] = cxx * (rxp[l] + rxm[l] - 2.0 * rc[l]) +
                            cyy * (ryp[l] + rym[l] - 2.0 * rc[l]);
                }
                continue;
            }
            auto cell = [&](int l, int lp, int lm) {
                ro[l] = cxx * (rxp[l] + rxm[l] - 2.0 * rc[l]) +
                        cyy * (ryp[l] + rym[l] - 2.0 * rc[l]) +
                        czz * (rc[lp] + rc[lm] - 2.0 * rc[l]) +
                        cyz * (ryp[lp] - ryp[lm] - rym[lp] + rym[lm]);
            };
            cell(0, 1, nz - 1);
            for (int l = 1; l < nz - 1; ++l) cell(l, l + 1, l - 1);
            cell(nz - 1, 0, nz - 2);
        }
    }
}

enum class Axis { X, Y, Z };

void diff_into(const GridField& f, GridField& out, Axis axis) {
    const ModelSpace& ms = f.space();
    const int nx = ms.nx(), ny = ms.ny(), nz = ms.nz();
    std::vector<double> sxp, sxm;
    const double inv2h = 0.5 / (axis == Axis::X ? ms.hx() : axis == Axis::Y ? ms.hy() : ms.hz());
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            double* ro = out.data() + ms.index(i, j, 0);
            if (axis == Axis::X) {
                const double* rxp = x_neighbor_row(f, i, +1, j, sxp);
                const double* rxm = x_neighbor_row(f, i, -1, j, sxm);
                for (int l = 0; l < nz; ++l) ro[l] = inv2h * (rxp[l] - rxm[l]);
            } else if (axis == Axis::Y) {
                const int jp = (j + 1 == ny) ? 0 : j + 1;
                const int jm = (j == 0) ? ny - 1 : j - 1;
                const double* ryp = f.data() + ms.index(i, jp, 0);
                const double* rym = f.data() + ms.index(i, jm, 0);
                for (int l = 0; l < nz; ++l) ro[l] = inv2h * (ryp[l] - rym[l]);
            } else {
                const double* rc = f.data() + ms.index(i, j, 0);
                ro[0] = inv2h * (rc[1] - rc[nz - 1]);
                for (int l = 1; l < nz - 1; ++l) ro[l] = inv2h * (rc[l + 1] - rc[l - 1]);
                ro[nz - 1] = inv2h * (rc[0] - rc[nz - 2]);
            }
        }
    }
}

} // namespace

GridField diff_x(const GridField& f) {
    GridField out(f.space());
    diff_into(f, out, Axis::X);
    return out;
}

GridField diff_y(const GridField& f) {
    GridField out(f.space());
    diff_into(f, out, Axis::Y);
    return out;
}

GridField diff_z(const GridField& f) {
    GridField out(f.space());
    diff_into(f, out, Axis::Z);
    return out;
}

GridField frame_x1(const GridField& f) { return diff_x(f); }

GridField frame_x2(const GridField& f) {
    const ModelSpace& ms = f.space();
    GridField out = diff_y(f);
    if (ms.kind() == SpaceKind::HeisenbergNil) {
        GridField dz = diff_z(f);
        for (int i = 0; i < ms.nx(); ++i) {
            const double x = ms.x_of(i);
            for (int j = 0; j < ms.ny(); ++j) {
                double* ro = out.data() + ms.index(i, j, 0);
                const double* rz = dz.data() + ms.index(i, j, 0);
                for (int l = 0; l < ms.nz(); ++l) ro[l] += x * rz[l];
            }
        }
    }
    return out;
}

GridField frame_z(const GridField& f) { return diff_z(f); }

GridField apply_L(const GridField& f) {
    GridField out(f.space());
    apply_L_into(f, out);
    return out;
}

GridField gamma(const GridField& f, const GridField& g) {
    require_same_space(f, g, "gamma");
    GridField out = pointwise_mul(frame_x1(f), frame_x1(g));
    GridField t2 = pointwise_mul(frame_x2(f), frame_x2(g));
    for (std::size_t n = 0; n < out.size(); ++n) out[n] += t2[n];
    return out;
}

GridField gamma(const GridField& f) { return gamma(f, f); }

GridField gamma_Z(const GridField& f, const GridField& g) {
    require_same_space(f, g, "gamma_Z");
    return pointwise_mul(frame_z(f), frame_z(g));
}

GridField gamma_Z(const GridField& f) { return gamma_Z(f, f); }

GridField gamma2(const GridField& f) {
    GridField Lf = apply_L(f);
    GridField G = gamma(f);
    GridField out = apply_L(G);
    GridField cross = gamma(f, Lf);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = 0.5 * out[n] - cross[n];
    return out;
}

GridField gamma2_Z(const GridField& f) {
    // Z commutes with the horizontal frame on both model spaces, so the
    // vertical iterated form equals Gamma(Zf) in the continuum. Evaluating it
    // through that identity keeps the discrete form nonnegative, which the
    // two-level difference expression L(GammaZ)/2 - GammaZ(f, Lf) fails to do
    // near roundoff-scale cells. The two evaluations agree at second order on
    // resolved fields (covered by the geometry suite).
    return gamma(frame_z(f));
}

double resolution_defect(const GridField& f) {
    const ModelSpace& ms = f.space();
    GridField s = f;
    // One 1-2-1 pass per axis; boundary reads use the wrapped accessors.
    for (int axis = 0; axis < 3; ++axis) {
        GridField t(ms);
        for (int i = 0; i < ms.nx(); ++i)
            for (int j = 0; j < ms.ny(); ++j)
                for (int l = 0; l < ms.nz(); ++l) {
                    const int di = axis == 0, dj = axis == 1, dl = axis == 2;
                    const double a = s.read_wrapped(i - di, j - dj, l - dl);
                    const double b = s.at(i, j, l);
                    const double c = s.read_wrapped(i + di, j + dj, l + dl);
                    t.at(i, j, l) = 0.25 * a + 0.5 * b + 0.25 * c;
                }
        s = t;
    }
    const double denom = f.l2();
    if (denom < 1e-300) return 0.0;
    return (f - s).l2() / denom;
}

} // namespace srh
