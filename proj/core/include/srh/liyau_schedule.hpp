#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "srh/heat_engine.hpp"
#include "srh/params.hpp"
#include "srh/quadrature.hpp"

namespace srh {

/// Admissible rate families a(t) driving the Li-Yau schedule.
enum class ScheduleFamily {
    PowerLaw,  ///< a(t) = t^gamma, gamma > 1
    ExpFamily, ///< a(t) = e^{q t} (e^{q t} - 1)^beta, q = gamma rho1, beta even
    Custom,    ///< tabulated (t, a, a'), integrability checked at build time
};

std::string to_string(ScheduleFamily family);

/// Tabulated rate for the Custom family. Must start at t = 0 with a = 0; the
/// head below the first positive node is modeled as c t^p with p fitted from
/// that node, and p <= 1 is rejected as non-integrable.
struct CustomRate {
    std::vector<double> t, a, da;
};

struct ScheduleSpec {
    ScheduleFamily family = ScheduleFamily::PowerLaw;
    double gamma = 2.0;
    int beta = 2;
    /// Relaxation weights in (0,1). Both exactly zero selects the degenerate
    /// potential-free schedule (requires zero potential bounds).
    double eps1 = 0.5;
    double eps2 = 0.5;
    CustomRate custom;
    double t_max = 5.0;
    int grid_points = 2049;

    bool potential_free() const { return eps1 == 0.0 && eps2 == 0.0; }
    void validate(const CDConstants& c, const PotentialBounds& vb) const;
};

struct ScheduleSample {
    double t = 0, a = 0, da = 0, b = 0, eta = 0, alpha = 0, phi = 0;
};

/**
 * Tabulated Li-Yau schedule. With Ia(t) = int_0^t a:
 *
 *   b     = 2 (1 - eps2) rho2 Ia / a
 *   eta   = (d/4) ((1 + eps1) a'/a + k a / (rho2 Ia) - 2 rho1)
 *   alpha = (4 / (d a)) int_0^t a eta
 *   phi   = (1/a) int_0^t a [ gamma1^2 a (alpha-1)^2 / (eps1 a')
 *                             + b^2 gamma2^2 / (2 eps2 rho2)
 *                             + theta alpha + 2 eta^2 / d ]
 *
 * a, a', Ia, b, eta evaluate in closed form per family; alpha and phi come
 * from adaptive quadrature tabulated on a log-spaced grid and interpolated
 * with exact-slope cubic Hermite pieces. Queries below t_min or above t_max
 * throw (phi is singular at zero).
 */
class LiYauSchedule {
public:
    double a(double t) const;
    double da(double t) const;
    double Ia(double t) const;
    double b(double t) const;
    double eta(double t) const;
    double alpha(double t) const;
    double phi(double t) const;
    ScheduleSample sample(double t) const;

    double t_min() const { return nodes_.front(); }
    double t_max() const { return nodes_.back(); }
    const std::vector<double>& nodes() const { return nodes_; }
    std::vector<ScheduleSample> table() const;

    /// Range of alpha over (0, t_hi], using the dense table and the t -> 0
    /// limit node. Needed by the parabolic Harnack exponent construction.
    std::pair<double, double> alpha_range(double t_hi) const;

    const ScheduleSpec& spec() const { return spec_; }
    const CDConstants& constants() const { return constants_; }
    const PotentialBounds& vbounds() const { return vbounds_; }

private:
    friend LiYauSchedule build_schedule(const ScheduleSpec&, const CDConstants&,
                                        const PotentialBounds&, const std::vector<double>&);
    ScheduleSpec spec_;
    CDConstants constants_;
    PotentialBounds vbounds_;
    std::vector<double> nodes_;
    HermiteSeries alpha_tab_, phi_tab_;
    HermiteSeries custom_a_; // Custom family only
    double custom_p_ = 0.0, custom_t1_ = 0.0, custom_a1_ = 0.0;
};

/// Build by adaptive quadrature on a log-spaced grid augmented with the
/// caller's nodes (for example stored trajectory times).
LiYauSchedule build_schedule(const ScheduleSpec& spec, const CDConstants& constants,
                             const PotentialBounds& vbounds,
                             const std::vector<double>& extra_nodes = {});

/**
 * Closed forms for the two analytic families.
 *
 * PowerLaw (any admissible eps):
 *   b     = 2 (1-eps2) rho2 t / (gamma+1)
 *   alpha = c0 - c1 t,  c0 = (1+eps1) + (1+gamma) k / (gamma rho2),
 *                       c1 = 2 rho1 / (1+gamma)
 *   phi   = phi_m1 / t + sum_{i=0..4} phi_poly[i] t^i
 * ExpFamily: b and alpha in closed form for any eps1, eps2; phi in closed
 * form for the potential-free degenerate schedule only.
 */
struct ClosedFormSchedule {
    ScheduleFamily family = ScheduleFamily::PowerLaw;
    CDConstants constants;
    PotentialBounds vbounds;
    double gamma = 2.0;
    int beta = 2;
    double eps1 = 0.5, eps2 = 0.5;
    bool has_phi = false;

    // PowerLaw coefficient data (zeroed for ExpFamily).
    double b_slope = 0.0;
    double alpha_c0 = 0.0, alpha_c1 = 0.0;
    double phi_m1 = 0.0;
    std::array<double, 5> phi_poly{};

    double b_at(double t) const;
    double alpha_at(double t) const;
    double phi_at(double t) const; // throws contract_error unless has_phi
};

ClosedFormSchedule closed_form_schedule(const ScheduleSpec& spec, const CDConstants& constants,
                                        const PotentialBounds& vbounds);

/**
 * Differential Harnack margin of a stored positive trajectory: with
 * f = log u and centered time differencing of f,
 *
 *   F = Gamma(f) + b GammaZ(f) - alpha (f_t + V) - phi
 *
 * evaluated at each interior stored time inside the schedule range. The
 * inequality predicts F <= 0 up to discretization noise; scale carries the
 * per-time magnitude sum used to set tolerances.
 */
struct MarginSeries {
    std::vector<double> t;
    std::vector<double> value;
    std::vector<std::size_t> arg_cell;
    std::vector<double> scale;
};

MarginSeries harnack_margin(const Trajectory& traj, const Potential& v,
                            const LiYauSchedule& sched);

/// Margin of the parabolic differential inequality satisfied by F:
///   (L - d/dt) F + 2 Gamma(f, F) - (a'/a) F >= 0
/// evaluated cellwise; the reported value is the per-time minimum.
MarginSeries subsolution_margin(const Trajectory& traj, const Potential& v,
                                const LiYauSchedule& sched);

/// Empirical constant in the stationary gradient bound
///   Gamma(log u) + (rho2 / (4 |rho1|)) GammaZ(log u) <= (2 + k/rho2) V + C
/// for a positive stationary state of L - V. Requires rho1 != 0 and a
/// stationarity residual below res_tol.
struct StationaryFit {
    double C = 0.0;
    std::size_t arg_cell = 0;
};
StationaryFit stationary_gradient_fit(const GridField& u, const Potential& v,
                                      const CDConstants& constants, double res_tol = 1e-6);

} // namespace srh
