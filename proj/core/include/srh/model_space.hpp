#pragma once

#include <cstddef>
#include <string>

namespace srh {

/// Compact model geometries carried by a periodic unit-cube grid.
enum class SpaceKind {
    /// Flat 3-torus. Horizontal frame X1 = dx, X2 = dy; vertical Z = dz.
    /// The horizontal distribution is integrable, so points separated only
    /// in z are not reachable by horizontal curves.
    FlatTorus3,
    /// Compact quotient of the Heisenberg group by its integer lattice.
    /// Horizontal frame X1 = dx, X2 = dy + x dz; vertical Z = dz with
    /// [X1, X2] = Z. Fundamental domain [0,1)^3 with identifications
    ///   (x, y, z) ~ (x + 1, y, z + y) ~ (x, y + 1, z) ~ (x, y, z + 1).
    HeisenbergNil,
};

std::string to_string(SpaceKind kind);

/**
 * Uniform grid over the fundamental domain of a model space.
 *
 * Cell (i, j, l) sits at (i*hx, j*hy, l*hz); the measure is the uniform
 * probability weight hx*hy*hz (unit total mass). Wrapping in y and z is plain
 * periodic. Wrapping in x follows the space: plain periodic on the torus,
 * sheared on the Heisenberg quotient, where crossing x += 1 re-enters at
 * z -= y. On a grid the shear moves z by j*nz/ny cells; when ny divides nz
 * that count is an integer, every ghost read is an exact lattice copy, and
 * the discrete operators keep their symmetry to machine precision. Grids
 * without that alignment fall back to linear interpolation in z.
 */
class ModelSpace {
public:
    ModelSpace(SpaceKind kind, int nx, int ny, int nz);

    SpaceKind kind() const { return kind_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    double hz() const { return hz_; }
    /// Largest grid spacing, the resolution scale h in O(h^2) statements.
    double hmax() const;
    /// Uniform per-cell measure weight, hx*hy*hz; cell weights sum to 1.
    double cell_weight() const { return weight_; }
    std::size_t ncells() const { return static_cast<std::size_t>(nx_) * ny_ * nz_; }

    std::size_t index(int i, int j, int l) const {
        return (static_cast<std::size_t>(i) * ny_ + j) * nz_ + l;
    }
    double x_of(int i) const { return i * hx_; }
    double y_of(int j) const { return j * hy_; }
    double z_of(int l) const { return l * hz_; }

    bool sheared() const { return kind_ == SpaceKind::HeisenbergNil; }
    /// True when ny divides nz (or on the torus), so shear ghost reads are exact.
    bool shear_aligned() const { return aligned_; }
    /// Signed z-shift, in cells, applied when crossing the x boundary at row j.
    double shear_cells(int j) const { return sheared() ? j * shear_ratio_ : 0.0; }

    bool operator==(const ModelSpace& o) const {
        return kind_ == o.kind_ && nx_ == o.nx_ && ny_ == o.ny_ && nz_ == o.nz_;
    }
    bool operator!=(const ModelSpace& o) const { return !(*this == o); }

    std::string describe() const;

private:
    SpaceKind kind_;
    int nx_, ny_, nz_;
    double hx_, hy_, hz_;
    double weight_;
    double shear_ratio_; // nz/ny as a double
    bool aligned_;
};

} // namespace srh
