#include "srh/field_synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "srh/errors.hpp"

namespace srh {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Unnormalized Gaussian and its first two derivatives.
double gauss(double s, double sigma, int order) {
    const double is2 = 1.0 / (sigma * sigma);
    const double g = std::exp(-0.5 * s * s * is2);
    switch (order) {
    case 0: return g;
    case 1: return -s * is2 * g;
    default: return (s * s * is2 - 1.0) * is2 * g;
    }
}

/// Periodization over integer shifts, truncated at +-q copies.
double gauss_per(double s, double sigma, int order, int q) {
    double acc = 0.0;
    for (int m = -q; m <= q; ++m) acc += gauss(s + m, sigma, order);
    return acc;
}

} // namespace

GridField wave_field(const ModelSpace& space, const std::vector<WaveSpec>& waves) {
    for (const WaveSpec& w : waves) {
        if (space.kind() == SpaceKind::HeisenbergNil && w.kz != 0) {
            throw contract_error(
                "wave_field: a mode with kz != 0 is not invariant under the sheared "
                "identification of the Heisenberg quotient");
        }
    }
    GridField f(space);
    f.fill_from([&](double x, double y, double z) {
        double acc = 0.0;
        for (const WaveSpec& w : waves)
            acc += w.amp * std::cos(kTwoPi * (w.kx * x + w.ky * y + w.kz * z) + w.phase);
        return acc;
    });
    return f;
}

GridField coord_wave(const ModelSpace& space, int axis, int k, double amp, double phase) {
    if (axis < 0 || axis > 2) throw contract_error("coord_wave: axis must be 0, 1 or 2");
    WaveSpec w;
    (axis == 0 ? w.kx : axis == 1 ? w.ky : w.kz) = k;
    w.amp = amp;
    // sin(u) = cos(u - pi/2)
    w.phase = phase - 0.5 * std::numbers::pi;
    return wave_field(space, {w});
}

LatticeBump::LatticeBump(SpaceKind kind, double cx, double cy, double cz, double sx,
                         double sy, double sz)
    : kind_(kind), cx_(cx), cy_(cy), cz_(cz), sx_(sx), sy_(sy), sz_(sz) {
    if (sx <= 0 || sy <= 0 || sz <= 0) throw contract_error("LatticeBump: widths must be positive");
    if (sx > 0.35 || sy > 0.35 || sz > 0.35) {
        throw contract_error("LatticeBump: widths above 0.35 are not resolved by the "
                             "truncated lattice sum");
    }
}

double LatticeBump::eval(double x, double y, double z, Part part) const {
    const int Q = kCopies;
    const double A0 = gauss_per(y - cy_, sy_, 0, Q);
    const double A1 = gauss_per(y - cy_, sy_, 1, Q);
    const double A2 = gauss_per(y - cy_, sy_, 2, Q);
    if (kind_ == SpaceKind::FlatTorus3) {
        const double P0 = gauss_per(x - cx_, sx_, 0, Q);
        const double B0 = gauss_per(z - cz_, sz_, 0, Q);
        switch (part) {
        case Part::Value: return P0 * A0 * B0;
        case Part::X1: return gauss_per(x - cx_, sx_, 1, Q) * A0 * B0;
        case Part::X2: return P0 * A1 * B0;
        case Part::Z: return P0 * A0 * gauss_per(z - cz_, sz_, 1, Q);
        case Part::GenL:
            return gauss_per(x - cx_, sx_, 2, Q) * A0 * B0 + P0 * A2 * B0;
        }
    }
    double acc = 0.0;
    for (int m = -Q; m <= Q; ++m) {
        const double u0 = gauss(x + m - cx_, sx_, 0);
        const double zarg = z + m * y - cz_;
        const double B0 = gauss_per(zarg, sz_, 0, Q);
        switch (part) {
        case Part::Value:
            acc += u0 * A0 * B0;
            break;
        case Part::X1:
            acc += gauss(x + m - cx_, sx_, 1) * A0 * B0;
            break;
        case Part::X2:
            acc += u0 * (A1 * B0 + (m + x) * A0 * gauss_per(zarg, sz_, 1, Q));
            break;
        case Part::Z:
            acc += u0 * A0 * gauss_per(zarg, sz_, 1, Q);
            break;
        case Part::GenL: {
            const double B1 = gauss_per(zarg, sz_, 1, Q);
            const double B2 = gauss_per(zarg, sz_, 2, Q);
            acc += gauss(x + m - cx_, sx_, 2) * A0 * B0 +
                   u0 * (A2 * B0 + 2.0 * (m + x) * A1 * B1 + (m + x) * (m + x) * A0 * B2);
            break;
        }
        }
    }
    return acc;
}

GridField LatticeBump::sample(const ModelSpace& space, Part part) const {
    if (space.sheared() != (kind_ == SpaceKind::HeisenbergNil)) {
        throw contract_error("LatticeBump: space kind does not match the bump kind");
    }
    GridField f(space);
    if (!space.shear_aligned() || kind_ == SpaceKind::FlatTorus3) {
        f.fill_from([&](double x, double y, double z) { return eval(x, y, z, part); });
        return f;
    }
    // Shear-aligned fast path: all z arguments land on grid points, so the
    // periodized factors reduce to per-axis lookup tables.
    const int nx = space.nx(), ny = space.ny(), nz = space.nz();
    const int Q = kCopies;
    std::vector<std::vector<double>> T1(2 * Q + 1), T1d(2 * Q + 1), T1dd(2 * Q + 1);
    for (int m = -Q; m <= Q; ++m) {
        auto& t0 = T1[m + Q];
        auto& t1 = T1d[m + Q];
        auto& t2 = T1dd[m + Q];
        t0.resize(nx);
        t1.resize(nx);
        t2.resize(nx);
        for (int i = 0; i < nx; ++i) {
            const double s = space.x_of(i) + m - cx_;
            t0[i] = gauss(s, sx_, 0);
            t1[i] = gauss(s, sx_, 1);
            t2[i] = gauss(s, sx_, 2);
        }
    }
    std::vector<double> A0(ny), A1(ny), A2(ny), B0(nz), B1(nz), B2(nz);
    for (int j = 0; j < ny; ++j) {
        const double s = space.y_of(j) - cy_;
        A0[j] = gauss_per(s, sy_, 0, Q);
        A1[j] = gauss_per(s, sy_, 1, Q);
        A2[j] = gauss_per(s, sy_, 2, Q);
    }
    for (int l = 0; l < nz; ++l) {
        const double s = space.z_of(l) - cz_;
        B0[l] = gauss_per(s, sz_, 0, Q);
        B1[l] = gauss_per(s, sz_, 1, Q);
        B2[l] = gauss_per(s, sz_, 2, Q);
    }
    for (int i = 0; i < nx; ++i) {
        const double x = space.x_of(i);
        for (int j = 0; j < ny; ++j) {
            const int shear = static_cast<int>(space.shear_cells(j));
            double* row = f.data() + space.index(i, j, 0);
            for (int m = -Q; m <= Q; ++m) {
                const int off = ((m * shear) % nz + nz) % nz;
                const double u0 = T1[m + Q][i];
                const double u1 = T1d[m + Q][i];
                const double u2 = T1dd[m + Q][i];
                const double mx = m + x;
                for (int l = 0; l < nz; ++l) {
                    int lz = l + off;
                    if (lz >= nz) lz -= nz;
                    double term = 0.0;
                    switch (part) {
                    case Part::Value: term = u0 * A0[j] * B0[lz]; break;
                    case Part::X1: term = u1 * A0[j] * B0[lz]; break;
                    case Part::X2: term = u0 * (A1[j] * B0[lz] + mx * A0[j] * B1[lz]); break;
                    case Part::Z: term = u0 * A0[j] * B1[lz]; break;
                    case Part::GenL:
                        term = u2 * A0[j] * B0[lz] +
                               u0 * (A2[j] * B0[lz] + 2.0 * mx * A1[j] * B1[lz] +
                                     mx * mx * A0[j] * B2[lz]);
                        break;
                    }
                    row[l] += term;
                }
            }
        }
    }
    return f;
}

GridField random_smooth_field(const ModelSpace& space, std::mt19937_64& rng,
                              FieldPreset preset, int kmax) {
    std::uniform_real_distribution<double> uamp(-1.0, 1.0);
    std::uniform_real_distribution<double> uphase(0.0, kTwoPi);
    std::uniform_real_distribution<double> ucoord(0.0, 1.0);
    std::uniform_int_distribution<int> uk(-kmax, kmax);
    std::uniform_int_distribution<int> ukpos(1, kmax);

    auto draw_modes = [&](int count, bool allow_kz) {
        std::vector<WaveSpec> waves;
        while (static_cast<int>(waves.size()) < count) {
            WaveSpec w;
            w.kx = uk(rng);
            w.ky = uk(rng);
            w.kz = allow_kz ? uk(rng) : 0;
            if (w.kx == 0 && w.ky == 0 && w.kz == 0) continue;
            w.amp = uamp(rng);
            w.phase = uphase(rng);
            waves.push_back(w);
        }
        return waves;
    };

    switch (preset) {
    case FieldPreset::ZIndependent:
        return wave_field(space, draw_modes(6, false));
    case FieldPreset::PureZ: {
        WaveSpec w;
        w.kz = ukpos(rng);
        w.amp = uamp(rng);
        w.phase = uphase(rng);
        return wave_field(space, {w});
    }
    case FieldPreset::Full3D:
        break;
    }
    if (space.kind() == SpaceKind::FlatTorus3) {
        return wave_field(space, draw_modes(6, true));
    }
    // Heisenberg quotient: z-dependence enters through lattice bumps. Keep
    // widths at five grid cells or more so the fields stay band limited at
    // the sampling resolution, within the lattice-sum truncation cap.
    GridField f = wave_field(space, draw_modes(4, false));
    const double h = space.hmax();
    const double slo = std::min(std::max(0.14, 5.0 * h), 0.24);
    const double shi = std::min(std::max(0.20, 7.5 * h), 0.30);
    std::uniform_real_distribution<double> usigma(slo, shi);
    for (int b = 0; b < 2; ++b) {
        LatticeBump bump(space.kind(), ucoord(rng), ucoord(rng), ucoord(rng), usigma(rng),
                         usigma(rng), usigma(rng));
        const double amp = (uamp(rng) < 0 ? -1.0 : 1.0) * (0.5 + 0.5 * ucoord(rng));
        GridField bf = bump.sample(space);
        axpy(amp, bf, f);
    }
    return f;
}

} // namespace srh
