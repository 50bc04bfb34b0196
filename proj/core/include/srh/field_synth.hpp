#pragma once

#include <random>
#include <vector>

#include "srh/grid_field.hpp"

namespace srh {

/// One trigonometric mode amp * cos(2 pi (kx x + ky y + kz z) + phase).
struct WaveSpec {
    int kx = 0, ky = 0, kz = 0;
    double amp = 1.0;
    double phase = 0.0;
};

/// Superposition of modes. On the Heisenberg quotient a mode with kz != 0 is
/// not invariant under the sheared identification and is rejected.
GridField wave_field(const ModelSpace& space, const std::vector<WaveSpec>& waves);

/// Single-coordinate wave amp * sin(2 pi k s + phase), s in {x, y, z} by axis
/// index 0, 1, 2. Subject to the same invariance rule as wave_field.
GridField coord_wave(const ModelSpace& space, int axis, int k, double amp = 1.0,
                     double phase = 0.0);

/**
 * Smooth positive bump on a model space, with analytic frame derivatives.
 *
 * Built as a separable Gaussian on the universal cover, summed over the
 * identification lattice (truncated far below double precision), so the
 * result is an exact smooth function on the quotient. On the Heisenberg
 * quotient the x-copies carry the z-shear, which makes the bump genuinely
 * three dimensional. The analytic values serve as discretization oracles
 * for the frame derivatives and the generator.
 */
class LatticeBump {
public:
    enum class Part { Value, X1, X2, Z, GenL };

    LatticeBump(SpaceKind kind, double cx, double cy, double cz, double sx, double sy,
                double sz);

    double eval(double x, double y, double z, Part part = Part::Value) const;

    /// Sample a part on a grid of the same space kind. Uses exact index
    /// tables on shear-aligned grids, direct evaluation otherwise.
    GridField sample(const ModelSpace& space, Part part = Part::Value) const;

    SpaceKind kind() const { return kind_; }

private:
    SpaceKind kind_;
    double cx_, cy_, cz_;
    double sx_, sy_, sz_;
    static constexpr int kCopies = 5; // lattice truncation radius per axis
};

/// Field corpus presets for randomized smooth test fields.
enum class FieldPreset {
    Full3D,       ///< waves plus bumps; z-dependence included where the space allows it
    ZIndependent, ///< waves with kz = 0 only
    PureZ,        ///< single z-wave; rejected on the Heisenberg quotient
};

GridField random_smooth_field(const ModelSpace& space, std::mt19937_64& rng,
                              FieldPreset preset, int kmax = 2);

} // namespace srh
