#pragma once

#include "srh/grid_field.hpp"

namespace srh {

/**
 * Second-order subelliptic generator and its bilinear forms, discretized
 * with centered differences (second-order accurate on smooth fields).
 *
 * FlatTorus3:    L = dxx + dyy
 * HeisenbergNil: L = dxx + dyy + 2 x dydz + x^2 dzz  (sum of squares of the
 *                horizontal frame X1 = dx, X2 = dy + x dz)
 *
 * The discrete L annihilates constants exactly, is exactly symmetric for the
 * uniform cell measure on shear-aligned grids, and is negative semidefinite.
 * It is not an M-matrix on the Heisenberg quotient (the mixed dydz stencil
 * carries both signs), so evolution code must not assume a discrete maximum
 * principle.
 */

/// Centered first differences along each axis.
GridField diff_x(const GridField& f);
GridField diff_y(const GridField& f);
GridField diff_z(const GridField& f);

/// Horizontal frame derivatives. X2 picks up the x dz shear term on the
/// Heisenberg quotient and reduces to dy on the torus.
GridField frame_x1(const GridField& f);
GridField frame_x2(const GridField& f);
/// Vertical derivative Z = dz on both spaces.
GridField frame_z(const GridField& f);

/// Generator application, fused single pass.
GridField apply_L(const GridField& f);

/// Horizontal squared-gradient form Gamma(f, g) = X1 f X1 g + X2 f X2 g.
GridField gamma(const GridField& f, const GridField& g);
GridField gamma(const GridField& f);

/// Vertical form GammaZ(f, g) = Z f Z g.
GridField gamma_Z(const GridField& f, const GridField& g);
GridField gamma_Z(const GridField& f);

/// Iterated form Gamma2(f) = (L Gamma(f) - 2 Gamma(f, L f)) / 2. Meaningful
/// on fields resolved by the grid; see resolution_defect for the documented
/// smoothness diagnostic.
GridField gamma2(const GridField& f);
/// Vertical iterated form. Z commutes with the horizontal frame on both
/// model spaces, so this equals Gamma(Zf); that expression is used directly
/// because it stays nonnegative under discretization while the two-level
/// difference form can dip below zero at noise-scale cells. Agrees with
/// (L GammaZ(f) - 2 GammaZ(f, L f)) / 2 to O(h^2) on resolved fields.
GridField gamma2_Z(const GridField& f);

/**
 * Smoothness heuristic: relative L2 energy of f minus its one-step
 * 1-2-1 axis smoothing. Band-limited fields score well below 1; fields with
 * grid-scale content score near 1. Iterated forms on fields scoring above
 * ~0.5 carry O(1) discretization error and should not be trusted.
 */
double resolution_defect(const GridField& f);

} // namespace srh
