#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srh/field_synth.hpp"
#include "srh/grid_field.hpp"
#include "srh/params.hpp"

namespace srh {

/// Worst sample found by the curvature-dimension scan: the (field, nu, cell)
/// whose margin sits closest to (or beyond) its noise floor.
struct CDWitness {
    double margin = 0.0; ///< LHS - RHS at the witness sample
    double tol = 0.0;    ///< noise floor at the witness sample
    double nu = 0.0;
    std::size_t field_index = 0;
    int i = 0, j = 0, l = 0;
};

/**
 * Outcome of testing the curvature-dimension inequality
 *
 *   Gamma2(f) + nu Gamma2_Z(f) >=
 *       (1/d)(Lf)^2 + (rho1 - k/nu) Gamma(f) + rho2 Gamma_Z(f)
 *
 * over a field corpus, a positive nu grid, and all grid cells. The claim
 * quantifies over every nu > 0; the grid is an under-approximation of that,
 * so holds = true is evidence, holds = false is a counterexample.
 */
struct CDReport {
    CDConstants constants;
    std::size_t tested_fields = 0;
    std::vector<double> nu_grid;
    CDWitness worst; ///< minimizer of margin + tol over all samples
    bool holds = false;
    std::uint64_t corpus_seed = 0; ///< seed recorded by cd_corpus, 0 otherwise
};

/// Log-spaced nu grid, endpoints included.
std::vector<double> default_nu_grid(double nu_min = 1e-2, double nu_max = 1e2,
                                    int count = 25);

/**
 * Band-limited corpus for the scan: a deterministic slate of coordinate
 * waves, wave products, and an analytic bump, followed by random_count
 * seeded random smooth fields of the given preset.
 */
std::vector<GridField> cd_corpus(const ModelSpace& space, FieldPreset preset,
                                 int random_count, std::uint64_t seed);

struct CDOptions {
    /// Noise-floor coefficient: a sample passes when
    /// margin >= -tol_coeff * hmax^2 * scale, where scale sums the
    /// magnitudes of every term of the inequality over the 3x3x3 cell
    /// neighborhood, plus a field-strength floor (below). Calibrated so
    /// that on band-limited corpora stencil noise stays below roughly
    /// half of this coefficient while genuine violations of a false
    /// constant tuple exceed roughly twice it at the default resolutions.
    double tol_coeff = 40.0;
    /// Fraction of the field's strongest neighborhood term sum added to
    /// every cell's scale. Gaussian-tail cells have term magnitudes that
    /// decay faster than their stencil truncation error, so a purely local
    /// scale underestimates the noise there; the floor keeps the budget
    /// tied to where the field actually has content.
    double tol_floor_frac = 0.10;
    /// Bookkeeping only: copied into CDReport::corpus_seed.
    std::uint64_t corpus_seed = 0;
};

/// Scan the inequality over fields x nu_grid x cells. Fields must live on
/// the given space; nu_grid entries must be positive.
CDReport verify_cd(const ModelSpace& space, const CDConstants& constants,
                   const std::vector<GridField>& fields,
                   const std::vector<double>& nu_grid, const CDOptions& opt = {});

/// Report serialized as a JSON object string.
std::string to_json(const CDReport& report);

} // namespace srh
