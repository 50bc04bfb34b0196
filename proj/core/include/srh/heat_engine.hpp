#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srh/grid_field.hpp"
#include "srh/params.hpp"

namespace srh {

/**
 * Nonnegative Schroedinger potential, time independent or piecewise linear
 * in time between sample fields. Negative entries are rejected on input.
 */
class Potential {
public:
    static Potential zero(const ModelSpace& space);
    static Potential constant(const ModelSpace& space, double value);
    static Potential from_field(GridField v);
    static Potential time_varying(std::vector<double> times, std::vector<GridField> fields);

    const ModelSpace& space() const;
    bool is_zero() const { return zero_; }
    bool time_dependent() const { return times_.size() > 1; }
    /// V at time t (linear interpolation between samples; clamped outside).
    GridField sample(double t) const;
    /// Fast path for the time-independent case.
    const GridField& steady() const;
    /// Pointwise value by cell at time t.
    double value_at(double t, int i, int j, int l) const;

    /// Uniform bounds gamma1, gamma2, theta computed with the discrete forms,
    /// maximized over the sample times.
    PotentialBounds bounds() const;

private:
    Potential() = default;
    std::vector<double> times_;
    std::vector<GridField> fields_;
    bool zero_ = false;
};

/// Free-function form of the bounds computation.
PotentialBounds potential_bounds(const Potential& v);

enum class Scheme { CrankNicolson, BackwardEuler };

std::string to_string(Scheme s);

/// Per-macro-step solver record: target interval, positivity substeps taken,
/// total conjugate gradient iterations spent, tail cells lifted to the
/// positivity floor. A run with substeps == 1 and clamped == 0 throughout
/// applied one fixed linear operator per step.
struct StepMeta {
    double t_from = 0.0;
    double t_to = 0.0;
    int substeps = 1;
    int cg_iters = 0;
    int clamped = 0;
};

/**
 * Stored evolution of the heat or Schroedinger flow. States are the field
 * at times[i]; times[0] = 0 holds the initial state. Stored times are an
 * arithmetic progression with spacing store_every * dt.
 */
struct Trajectory {
    const ModelSpace* space = nullptr;
    std::vector<double> times;
    std::vector<GridField> states;
    std::vector<StepMeta> step_meta;
    double dt = 0.0;
    Scheme scheme = Scheme::CrankNicolson;
    bool potential_is_zero = true;
    double initial_mass = 0.0;

    std::size_t size() const { return times.size(); }
    /// Index of the stored time nearest to t; throws when off by more than tol.
    std::size_t index_of(double t, double tol = 1e-9) const;
    const GridField& at_time(double t, double tol = 1e-9) const;
    double store_dt() const;
};

struct EvolveOptions {
    double t_end = 1.0;
    double dt = 1e-3;
    int store_every = 1;
    Scheme scheme = Scheme::CrankNicolson;
    /// Run the first few steps with backward Euler to damp rough data.
    int initial_be_steps = 0;
    double solver_rtol = 1e-12;
    int solver_max_iters = 50000;
    /// A step producing a nonpositive state is retried on halved substeps, at
    /// most this many halvings, then the evolution fails.
    int max_halvings = 12;
};

/// Evolve du/dt = L u - V u from a strictly positive initial state.
/// Mass is conserved exactly (up to solver residuals) when V is zero.
Trajectory evolve(const GridField& u0, const Potential& v, const EvolveOptions& opt);

struct KernelOptions {
    double dt = 1e-3;
    int store_every = 1;
    /// Initial bump width in cells, per axis. Widths below about three cells
    /// leave the early transient under-resolved in the tail.
    double width_cells = 3.0;
    int initial_be_steps = 10;
    double solver_rtol = 1e-12;
};

/// Heat kernel approximation from a mass-one smooth bump centered at cell
/// (i0, j0, l0), evolved with V = 0 to time t.
Trajectory heat_kernel(const ModelSpace& space, int i0, int j0, int l0, double t,
                       const KernelOptions& opt = {});

/// Principal eigenpair of L - V: largest eigenvalue lam0 <= 0 with positive
/// eigenfunction, via inverse-free power iteration on the backward Euler map.
/// The returned field is normalized to unit maximum; the residual
/// |(L - V) u - lam0 u|_2 is driven below res_tol * |u|_2.
struct GroundState {
    double lam0 = 0.0;
    GridField u;
    double residual = 0.0;
    int iterations = 0;
};
GroundState ground_state(const Potential& v, double res_tol = 1e-8, int max_iters = 100000);

/// Largest magnitude eigenvalue estimate of -L + V by power iteration, used
/// for conditioning diagnostics.
double operator_norm_estimate(const Potential& v, int iters = 60);

} // namespace srh
