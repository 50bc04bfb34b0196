#include "srh/liyau_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "srh/errors.hpp"
#include "srh/forms.hpp"

namespace srh {

std::string to_string(ScheduleFamily family) {
    switch (family) {
        case ScheduleFamily::PowerLaw: return "power_law";
        case ScheduleFamily::ExpFamily: return "exp_family";
        case ScheduleFamily::Custom: return "custom";
    }
    return "unknown";
}

namespace {

double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

// Rate evaluation: a, a', and Ia = int_0^t a in closed form per family.
// The Custom family interpolates its table above the first positive node and
// follows the fitted power model c t^p below it, which keeps Ia exact for
// the model and consistent with the table at the node.
struct Rate {
    const ScheduleSpec* spec = nullptr;
    const HermiteSeries* custom_a = nullptr;
    double p = 0.0, t1 = 0.0, a1 = 0.0; // custom head model a = a1 (t/t1)^p

    double a(double t) const {
        switch (spec->family) {
            case ScheduleFamily::PowerLaw:
                return std::pow(t, spec->gamma);
            case ScheduleFamily::ExpFamily: {
                const double q = spec->gamma * q_rho1;
                const double E = std::exp(q * t);
                return E * ipow(E - 1.0, spec->beta);
            }
            case ScheduleFamily::Custom:
                if (t < t1) return a1 * std::pow(t / t1, p);
                return (*custom_a)(t);
        }
        return 0.0;
    }

    double da(double t) const {
        switch (spec->family) {
            case ScheduleFamily::PowerLaw:
                return spec->gamma * std::pow(t, spec->gamma - 1.0);
            case ScheduleFamily::ExpFamily: {
                const double q = spec->gamma * q_rho1;
                const double E = std::exp(q * t);
                return q * E * ipow(E - 1.0, spec->beta - 1) * ((1.0 + spec->beta) * E - 1.0);
            }
            case ScheduleFamily::Custom:
                if (t < t1) return a1 * (p / t1) * std::pow(t / t1, p - 1.0);
                return custom_a->derivative(t);
        }
        return 0.0;
    }

    double Ia(double t) const {
        switch (spec->family) {
            case ScheduleFamily::PowerLaw:
                return std::pow(t, spec->gamma + 1.0) / (spec->gamma + 1.0);
            case ScheduleFamily::ExpFamily: {
                const double q = spec->gamma * q_rho1;
                const double E = std::exp(q * t);
                return ipow(E - 1.0, spec->beta + 1) / ((spec->beta + 1) * q);
            }
            case ScheduleFamily::Custom: {
                const double head = a1 * t1 / (p + 1.0);
                if (t < t1) return head * std::pow(t / t1, p + 1.0);
                // integral_to starts at the table's t = 0 row; replace its
                // first-interval contribution with the exact head model.
                return head + custom_a->integral_to(t) - custom_a->integral_to(t1);
            }
        }
        return 0.0;
    }

    double q_rho1 = 0.0; // rho1, cached for the ExpFamily exponent
};

double eta_of(const Rate& r, const CDConstants& c, double eps1, double t) {
    const double a = r.a(t);
    return 0.25 * c.d *
           ((1.0 + eps1) * r.da(t) / a + c.k * a / (c.rho2 * r.Ia(t)) - 2.0 * c.rho1);
}

double b_of(const Rate& r, const CDConstants& c, double eps2, double t) {
    return 2.0 * (1.0 - eps2) * c.rho2 * r.Ia(t) / r.a(t);
}

} // namespace

void ScheduleSpec::validate(const CDConstants& c, const PotentialBounds& vb) const {
    c.validate();
    vb.validate();
    if (!c.finite_dim())
        throw config_error("schedules require a finite dimension parameter d");
    if (!(t_max > 0.0) || !std::isfinite(t_max))
        throw config_error("schedule horizon t_max must be positive and finite");
    if (grid_points < 65) throw config_error("schedule grid_points must be at least 65");

    if (potential_free()) {
        if (!vb.is_zero())
            throw config_error(
                "degenerate schedule (eps1 = eps2 = 0) is only admissible for a zero "
                "potential; nonzero potential bounds need eps1, eps2 in (0,1)");
    } else {
        if (!(eps1 > 0.0 && eps1 < 1.0) || !(eps2 > 0.0 && eps2 < 1.0))
            throw config_error("eps1 and eps2 must lie in (0,1), or both be exactly 0 "
                               "for the potential-free degenerate schedule");
    }

    switch (family) {
        case ScheduleFamily::PowerLaw:
            if (!(gamma > 1.0))
                throw config_error("power-law rate needs gamma > 1 (got " +
                                   std::to_string(gamma) + ")");
            break;
        case ScheduleFamily::ExpFamily: {
            if (beta < 2 || beta % 2 != 0)
                throw config_error("exponential-family rate needs even beta >= 2");
            if (c.rho1 == 0.0)
                throw config_error("exponential-family rate needs rho1 != 0");
            if (gamma == 0.0 || !std::isfinite(gamma))
                throw config_error("exponential-family rate needs a nonzero finite gamma");
            const double q = gamma * c.rho1;
            if (q < 0.0) {
                // Shrinking exponent: a' changes sign where (1+beta) e^{qt} = 1,
                // so the rate is only admissible on an initial window.
                const double t_star = std::log(1.0 + beta) / (-q);
                if (!(t_max < t_star)) {
                    std::ostringstream msg;
                    msg << "exponential-family rate with gamma * rho1 < 0 stops "
                           "being increasing at t* = "
                        << t_star << "; reduce t_max below t*";
                    throw config_error(msg.str());
                }
            }
            break;
        }
        case ScheduleFamily::Custom: {
            const auto& ct = custom.t;
            if (ct.size() < 3 || custom.a.size() != ct.size() || custom.da.size() != ct.size())
                throw config_error("custom rate table needs >= 3 rows of matching t, a, da");
            if (ct.front() != 0.0 || custom.a.front() != 0.0)
                throw config_error("custom rate table must start at t = 0 with a = 0");
            for (std::size_t i = 1; i < ct.size(); ++i) {
                if (!(ct[i] > ct[i - 1]))
                    throw config_error("custom rate table times must be strictly increasing");
                if (!(custom.a[i] > 0.0) || !(custom.da[i] > 0.0))
                    throw config_error("custom rate must be positive and increasing after t = 0");
            }
            const double p = ct[1] * custom.da[1] / custom.a[1];
            if (!(p > 1.0 + 1e-9)) {
                std::ostringstream msg;
                msg << "custom rate is not integrable enough near t = 0 for the "
                       "schedule quadrature: local exponent p = t a'/a = "
                    << p << " at the first node, need p > 1";
                throw config_error(msg.str());
            }
            if (!(t_max <= ct.back() * (1.0 + 1e-12)))
                throw config_error("custom rate table must cover t_max");
            break;
        }
    }
}

namespace {

std::vector<double> make_grid(const ScheduleSpec& spec, const std::vector<double>& extra) {
    const double t_hi = spec.t_max;
    const double t_lo = 1e-8 * t_hi;
    const int n = spec.grid_points;
    std::vector<double> nodes;
    nodes.reserve(static_cast<std::size_t>(n) + extra.size() + 16);
    const double ratio = std::log(t_hi / t_lo);
    for (int i = 0; i < n; ++i)
        nodes.push_back(t_lo * std::exp(ratio * double(i) / double(n - 1)));
    nodes.back() = t_hi;
    if (spec.family == ScheduleFamily::Custom)
        for (double t : spec.custom.t)
            if (t >= t_lo && t <= t_hi) nodes.push_back(t);
    for (double t : extra)
        if (t >= t_lo && t <= t_hi) nodes.push_back(t);
    std::sort(nodes.begin(), nodes.end());
    // Drop nodes closer than a relative 1e-12 (Hermite needs strict increase).
    std::vector<double> out;
    out.reserve(nodes.size());
    for (double t : nodes)
        if (out.empty() || t - out.back() > 1e-12 * t) out.push_back(t);
    return out;
}

} // namespace

LiYauSchedule build_schedule(const ScheduleSpec& spec, const CDConstants& constants,
                             const PotentialBounds& vbounds,
                             const std::vector<double>& extra_nodes) {
    spec.validate(constants, vbounds);

    LiYauSchedule s;
    s.spec_ = spec;
    s.constants_ = constants;
    s.vbounds_ = vbounds;

    if (spec.family == ScheduleFamily::Custom) {
        s.custom_a_ = HermiteSeries(spec.custom.t, spec.custom.a, spec.custom.da);
        s.custom_t1_ = spec.custom.t[1];
        s.custom_a1_ = spec.custom.a[1];
        s.custom_p_ = spec.custom.t[1] * spec.custom.da[1] / spec.custom.a[1];
    }

    Rate rate;
    rate.spec = &s.spec_;
    rate.q_rho1 = constants.rho1;
    rate.custom_a = s.custom_a_.empty() ? nullptr : &s.custom_a_;
    rate.p = s.custom_p_;
    rate.t1 = s.custom_t1_;
    rate.a1 = s.custom_a1_;

    s.nodes_ = make_grid(spec, extra_nodes);
    const auto& nodes = s.nodes_;
    const std::size_t n = nodes.size();

    for (double t : nodes) {
        const double a = rate.a(t), da = rate.da(t);
        if (!(a > 0.0) || !(da > 0.0) || !std::isfinite(a) || !std::isfinite(da)) {
            std::ostringstream msg;
            msg << "rate is not admissible at t = " << t << " (a = " << a << ", a' = " << da
                << "); the schedule needs a > 0 and a' > 0 on (0, t_max]";
            throw config_error(msg.str());
        }
    }

    const CDConstants& c = constants;
    const double eps1 = spec.eps1, eps2 = spec.eps2;

    // Pass 1: alpha = 4 I[a eta] / (d a). The head below the first node uses
    // the exact antiderivative of the local power model: with p the local
    // exponent of a, int_0^t a eta = (d/4) [(1+eps1) a + (k/rho2)(p+1)/p a
    // - 2 rho1 Ia] up to O(t) relative corrections that are negligible at
    // the 1e-8 head scale.
    auto aeta = [&](double t) { return rate.a(t) * eta_of(rate, c, eps1, t); };
    std::vector<double> I_aeta(n);
    {
        const double t0 = nodes.front();
        const double a0 = rate.a(t0);
        const double p_loc = t0 * rate.da(t0) / a0;
        I_aeta[0] = 0.25 * c.d * ((1.0 + eps1) * a0 + (c.k / c.rho2) * (p_loc + 1.0) / p_loc * a0 -
                                  2.0 * c.rho1 * rate.Ia(t0));
        for (std::size_t i = 1; i < n; ++i)
            I_aeta[i] = I_aeta[i - 1] +
                        adaptive_simpson(aeta, nodes[i - 1], nodes[i], 1e-16, 1e-12);
    }

    std::vector<double> alpha(n), dalpha(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = nodes[i], a = rate.a(t);
        alpha[i] = 4.0 * I_aeta[i] / (c.d * a);
        dalpha[i] = 4.0 * eta_of(rate, c, eps1, t) / c.d - alpha[i] * rate.da(t) / a;
    }
    s.alpha_tab_ = HermiteSeries(nodes, alpha, dalpha);

    // Pass 2: phi = I[a * bracket] / a with the running cost bracket below.
    // The head fit samples below the first node, where alpha sits at its
    // finite small-time limit; clamp the table query there.
    const double g1 = vbounds.gamma1, g2 = vbounds.gamma2, th = vbounds.theta;
    auto bracket = [&](double t) {
        const double al = (t < nodes.front()) ? alpha.front() : s.alpha_tab_(t);
        const double et = eta_of(rate, c, eps1, t);
        double v = th * al + 2.0 * et * et / c.d;
        if (g1 > 0.0) {
            const double am1 = al - 1.0;
            v += g1 * g1 * rate.a(t) * am1 * am1 / (eps1 * rate.da(t));
        }
        if (g2 > 0.0) {
            const double bt = b_of(rate, c, eps2, t);
            v += bt * bt * g2 * g2 / (2.0 * eps2 * c.rho2);
        }
        return v;
    };
    auto psi = [&](double t) { return rate.a(t) * bracket(t); };

    std::vector<double> I_psi(n);
    {
        const double t0 = nodes.front();
        const double f0 = psi(t0), fh = psi(0.5 * t0);
        double head;
        if (f0 > 0.0 && fh > 0.0) {
            const double p_hat = std::log2(f0 / fh);
            if (!(p_hat > -1.0 + 1e-6))
                throw numeric_error("schedule cost integrand is not integrable at t = 0 "
                                    "(fitted local exponent <= -1)");
            head = f0 * t0 / (p_hat + 1.0);
        } else {
            head = f0 * t0; // crude patch; only reachable with theta < 0
        }
        I_psi[0] = head;
        for (std::size_t i = 1; i < n; ++i)
            I_psi[i] = I_psi[i - 1] + adaptive_simpson(psi, nodes[i - 1], nodes[i], 1e-16, 1e-12);
    }

    std::vector<double> phi(n), dphi(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = nodes[i], a = rate.a(t);
        phi[i] = I_psi[i] / a;
        dphi[i] = bracket(t) - phi[i] * rate.da(t) / a;
        if (!std::isfinite(phi[i]) || !std::isfinite(alpha[i]))
            throw numeric_error("schedule tabulation produced a non-finite value");
    }
    s.phi_tab_ = HermiteSeries(nodes, phi, dphi);
    return s;
}

namespace {

Rate rate_of(const LiYauSchedule& s) {
    Rate r;
    r.spec = &s.spec();
    r.q_rho1 = s.constants().rho1;
    r.custom_a = nullptr;
    return r;
}

} // namespace

// The direct-formula accessors rebuild a Rate on the fly; for the Custom
// family they must reference the stored table, handled inline below.
double LiYauSchedule::a(double t) const {
    Rate r = rate_of(*this);
    r.custom_a = custom_a_.empty() ? nullptr : &custom_a_;
    r.p = custom_p_; r.t1 = custom_t1_; r.a1 = custom_a1_;
    return r.a(t);
}

double LiYauSchedule::da(double t) const {
    Rate r = rate_of(*this);
    r.custom_a = custom_a_.empty() ? nullptr : &custom_a_;
    r.p = custom_p_; r.t1 = custom_t1_; r.a1 = custom_a1_;
    return r.da(t);
}

double LiYauSchedule::Ia(double t) const {
    Rate r = rate_of(*this);
    r.custom_a = custom_a_.empty() ? nullptr : &custom_a_;
    r.p = custom_p_; r.t1 = custom_t1_; r.a1 = custom_a1_;
    return r.Ia(t);
}

double LiYauSchedule::b(double t) const {
    Rate r = rate_of(*this);
    r.custom_a = custom_a_.empty() ? nullptr : &custom_a_;
    r.p = custom_p_; r.t1 = custom_t1_; r.a1 = custom_a1_;
    return b_of(r, constants_, spec_.eps2, t);
}

double LiYauSchedule::eta(double t) const {
    Rate r = rate_of(*this);
    r.custom_a = custom_a_.empty() ? nullptr : &custom_a_;
    r.p = custom_p_; r.t1 = custom_t1_; r.a1 = custom_a1_;
    return eta_of(r, constants_, spec_.eps1, t);
}

double LiYauSchedule::alpha(double t) const { return alpha_tab_(t); }
double LiYauSchedule::phi(double t) const { return phi_tab_(t); }

ScheduleSample LiYauSchedule::sample(double t) const {
    ScheduleSample out;
    out.t = t;
    out.a = a(t);
    out.da = da(t);
    out.b = b(t);
    out.eta = eta(t);
    out.alpha = alpha_tab_(t);
    out.phi = phi_tab_(t);
    return out;
}

std::vector<ScheduleSample> LiYauSchedule::table() const {
    std::vector<ScheduleSample> out;
    out.reserve(nodes_.size());
    for (double t : nodes_) out.push_back(sample(t));
    return out;
}

std::pair<double, double> LiYauSchedule::alpha_range(double t_hi) const {
    if (!(t_hi > t_min()))
        throw contract_error("alpha_range needs t_hi above the tabulated start");
    t_hi = std::min(t_hi, t_max());
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < nodes_.size() && nodes_[i] <= t_hi; ++i) {
        const double v = alpha_tab_.values()[i];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double v = alpha_tab_(t_hi);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    return {lo, hi};
}

ClosedFormSchedule closed_form_schedule(const ScheduleSpec& spec, const CDConstants& constants,
                                        const PotentialBounds& vbounds) {
    spec.validate(constants, vbounds);
    if (spec.family == ScheduleFamily::Custom)
        throw config_error("tabulated rates have no closed-form schedule");

    ClosedFormSchedule cf;
    cf.family = spec.family;
    cf.constants = constants;
    cf.vbounds = vbounds;
    cf.gamma = spec.gamma;
    cf.beta = spec.beta;
    cf.eps1 = spec.eps1;
    cf.eps2 = spec.eps2;

    const CDConstants& c = constants;
    const double g = spec.gamma;

    if (spec.family == ScheduleFamily::PowerLaw) {
        const double e0 = spec.eps1 + (1.0 + g) * c.k / (g * c.rho2);
        cf.alpha_c0 = 1.0 + e0;
        cf.alpha_c1 = 2.0 * c.rho1 / (1.0 + g);
        cf.b_slope = 2.0 * (1.0 - spec.eps2) * c.rho2 / (g + 1.0);
        const double At = (1.0 + spec.eps1) * g + (1.0 + g) * c.k / c.rho2;
        cf.phi_m1 = c.d * At * At / (8.0 * (g - 1.0));
        cf.phi_poly[0] = -c.d * c.rho1 * At / (2.0 * g);
        cf.phi_poly[1] = c.d * c.rho1 * c.rho1 / (2.0 * (g + 1.0)) +
                         vbounds.theta * cf.alpha_c0 / (g + 1.0);
        cf.phi_poly[2] = -vbounds.theta * cf.alpha_c1 / (g + 2.0);
        cf.phi_poly[3] = 0.0;
        cf.phi_poly[4] = 0.0;
        if (vbounds.gamma1 > 0.0) {
            const double w = vbounds.gamma1 * vbounds.gamma1 / (spec.eps1 * g);
            cf.phi_poly[2] += w * e0 * e0 / (g + 2.0);
            cf.phi_poly[3] -= w * 2.0 * e0 * cf.alpha_c1 / (g + 3.0);
            cf.phi_poly[4] += w * cf.alpha_c1 * cf.alpha_c1 / (g + 4.0);
        }
        if (vbounds.gamma2 > 0.0) {
            const double om = 1.0 - spec.eps2;
            cf.phi_poly[3] += 2.0 * om * om * c.rho2 * vbounds.gamma2 * vbounds.gamma2 /
                              (spec.eps2 * (g + 1.0) * (g + 1.0) * (g + 3.0));
        }
        cf.has_phi = true;
    } else {
        if (!(g * c.rho1 > 0.0))
            throw config_error("exponential-family closed forms cover the aligned-sign "
                               "regime gamma * rho1 > 0; use the quadrature schedule "
                               "for the shrinking-exponent window");
        cf.has_phi = spec.potential_free();
        if (cf.has_phi && c.rho1 > 0.0) {
            const double g_min = 2.0 * c.rho2 / ((c.rho2 + c.k) * (1.0 + spec.beta));
            if (!(g >= g_min)) {
                std::ostringstream msg;
                msg << "exponential-family closed-form cost needs gamma >= "
                    << g_min << " when rho1 > 0 (got gamma = " << g << ")";
                throw config_error(msg.str());
            }
        }
    }
    return cf;
}

double ClosedFormSchedule::b_at(double t) const {
    if (family == ScheduleFamily::PowerLaw) return b_slope * t;
    const double q = gamma * constants.rho1;
    const double E = std::exp(q * t);
    return 2.0 * (1.0 - eps2) * constants.rho2 * (E - 1.0) / ((1.0 + beta) * q * E);
}

double ClosedFormSchedule::alpha_at(double t) const {
    if (family == ScheduleFamily::PowerLaw) return alpha_c0 - alpha_c1 * t;
    const CDConstants& c = constants;
    const double q = gamma * c.rho1;
    const double E = std::exp(q * t);
    return (1.0 + eps1) + (c.k / c.rho2) * ((E - 1.0) + double(beta + 1) / double(beta)) / E -
           (2.0 * c.rho1 / ((beta + 1) * q)) * (E - 1.0) / E;
}

double ClosedFormSchedule::phi_at(double t) const {
    if (!has_phi)
        throw contract_error("no closed-form cost phi for this family and relaxation "
                             "weights; use the quadrature schedule");
    if (family == ScheduleFamily::PowerLaw) {
        double v = phi_m1 / t;
        double tp = 1.0;
        for (double coeff : phi_poly) {
            v += coeff * tp;
            tp *= t;
        }
        return v;
    }
    const CDConstants& c = constants;
    const double q = gamma * c.rho1;
    const double E = std::exp(q * t);
    const double em = 1.0 / E;
    const double U = gamma * (c.rho2 + c.k) * (1.0 + beta) - 2.0 * c.rho2;
    const double S = beta * c.rho2 + c.k * (beta + 1);
    const double r22 = c.rho2 * c.rho2;
    return c.d * c.rho1 * U * U * (1.0 - em) / (8.0 * gamma * (beta + 1) * r22) +
           c.d * c.rho1 * gamma * S * S * em / (8.0 * r22 * (beta - 1) * (E - 1.0)) +
           c.d * c.rho1 * U * S * em / (4.0 * beta * r22);
}

namespace {

// f_t by the three-point formula exact for quadratics on a nonuniform stencil.
void centered_dt(const GridField& fm, const GridField& f0, const GridField& fp, double hm,
                 double hp, GridField& out) {
    const double denom = hp * hm * (hp + hm);
    const double cm = -hp * hp / denom, c0 = (hp * hp - hm * hm) / denom,
                 cp = hm * hm / denom;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = cm * fm[i] + c0 * f0[i] + cp * fp[i];
}

GridField log_state(const Trajectory& traj, std::size_t k) {
    const GridField& u = traj.states[k];
    if (!(u.min() > 0.0)) {
        std::ostringstream msg;
        msg << "non-positive state at stored time " << traj.times[k]
            << "; the differential Harnack expression needs log u";
        throw numeric_error(msg.str());
    }
    return map_field(u, [](double x) { return std::log(x); });
}

struct FAndMag {
    GridField F, mag, f;
};

// F = Gamma(f) + b GammaZ(f) - alpha (f_t + V) - phi at stored index k,
// with the per-cell magnitude sum for tolerance scaling.
FAndMag build_F(const Trajectory& traj, std::size_t k, const Potential& v,
                const LiYauSchedule& sched) {
    const double t = traj.times[k];
    GridField fm = log_state(traj, k - 1);
    GridField f0 = log_state(traj, k);
    GridField fp = log_state(traj, k + 1);
    GridField ft(*traj.space);
    centered_dt(fm, f0, fp, t - traj.times[k - 1], traj.times[k + 1] - t, ft);

    const ScheduleSample s = sched.sample(t);
    GridField G = gamma(f0);
    GridField GZ = gamma_Z(f0);

    FAndMag out{GridField(*traj.space), GridField(*traj.space), std::move(f0)};
    const bool has_v = !v.is_zero();
    const GridField* vf = nullptr;
    GridField vsample;
    if (has_v) {
        if (v.time_dependent()) {
            vsample = v.sample(t);
            vf = &vsample;
        } else {
            vf = &v.steady();
        }
    }
    for (std::size_t i = 0; i < out.F.size(); ++i) {
        const double vv = has_v ? (*vf)[i] : 0.0;
        out.F[i] = G[i] + s.b * GZ[i] - s.alpha * (ft[i] + vv) - s.phi;
        out.mag[i] = G[i] + s.b * GZ[i] + std::abs(s.alpha) * (std::abs(ft[i]) + std::abs(vv)) +
                     std::abs(s.phi);
    }
    return out;
}

void margin_preflight(const Trajectory& traj, const Potential& v, const LiYauSchedule& sched,
                      const char* op) {
    if (traj.space == nullptr || traj.size() < 3)
        throw contract_error(std::string(op) + " needs a trajectory with at least 3 stored states");
    if (!v.is_zero() && !(v.space() == *traj.space))
        throw contract_error(std::string(op) + ": potential and trajectory spaces differ");
    (void)sched;
}

bool in_sched(const LiYauSchedule& sched, double t) {
    return t >= sched.t_min() * (1.0 - 1e-12) && t <= sched.t_max() * (1.0 + 1e-12);
}

} // namespace

MarginSeries harnack_margin(const Trajectory& traj, const Potential& v,
                            const LiYauSchedule& sched) {
    margin_preflight(traj, v, sched, "harnack_margin");
    MarginSeries out;
    for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
        const double t = traj.times[k];
        if (!in_sched(sched, t)) continue;
        FAndMag fm = build_F(traj, k, v, sched);
        double best = -std::numeric_limits<double>::infinity();
        double mag = 0.0;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < fm.F.size(); ++i) {
            if (fm.F[i] > best) {
                best = fm.F[i];
                arg = i;
            }
            mag = std::max(mag, fm.mag[i]);
        }
        out.t.push_back(t);
        out.value.push_back(best);
        out.arg_cell.push_back(arg);
        out.scale.push_back(mag);
    }
    if (out.t.empty())
        throw contract_error("harnack_margin: no stored interior times inside the "
                             "schedule range");
    return out;
}

MarginSeries subsolution_margin(const Trajectory& traj, const Potential& v,
                                const LiYauSchedule& sched) {
    margin_preflight(traj, v, sched, "subsolution_margin");
    if (traj.size() < 5)
        throw contract_error("subsolution_margin needs at least 5 stored states");
    MarginSeries out;

    // Rolling window of F at k-1, k, k+1; each F needs its own time-centered
    // f_t, so eligible k run over 2 .. size-3 with all three times in range.
    std::size_t have = 0; // index whose window {have-1, have, have+1} is cached
    FAndMag Fm, F0, Fp;
    for (std::size_t k = 2; k + 2 < traj.size(); ++k) {
        if (!in_sched(sched, traj.times[k - 1]) || !in_sched(sched, traj.times[k]) ||
            !in_sched(sched, traj.times[k + 1]))
            continue;
        if (have == k - 1 && have != 0) {
            Fm = std::move(F0);
            F0 = std::move(Fp);
            Fp = build_F(traj, k + 1, v, sched);
        } else {
            Fm = build_F(traj, k - 1, v, sched);
            F0 = build_F(traj, k, v, sched);
            Fp = build_F(traj, k + 1, v, sched);
        }
        have = k;

        const double t = traj.times[k];
        GridField dF(*traj.space);
        centered_dt(Fm.F, F0.F, Fp.F, t - traj.times[k - 1], traj.times[k + 1] - t, dF);
        GridField LF = apply_L(F0.F);
        GridField GfF = gamma(F0.f, F0.F);
        const double drift = sched.da(t) / sched.a(t);

        double worst = std::numeric_limits<double>::infinity();
        double mag = 0.0;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < dF.size(); ++i) {
            const double g = LF[i] + 2.0 * GfF[i] - dF[i] - drift * F0.F[i];
            if (g < worst) {
                worst = g;
                arg = i;
            }
            mag = std::max(mag, std::abs(LF[i]) + 2.0 * std::abs(GfF[i]) + std::abs(dF[i]) +
                                    std::abs(drift * F0.F[i]));
        }
        out.t.push_back(t);
        out.value.push_back(worst);
        out.arg_cell.push_back(arg);
        out.scale.push_back(mag);
    }
    if (out.t.empty())
        throw contract_error("subsolution_margin: no stored interior times inside the "
                             "schedule range");
    return out;
}

StationaryFit stationary_gradient_fit(const GridField& u, const Potential& v,
                                      const CDConstants& constants, double res_tol) {
    constants.validate();
    if (constants.rho1 == 0.0)
        throw contract_error("the stationary gradient bound needs rho1 != 0");
    if (!(u.min() > 0.0))
        throw contract_error("the stationary gradient bound needs a positive state");
    if (!v.is_zero() && !(v.space() == u.space()))
        throw contract_error("stationary_gradient_fit: potential and state spaces differ");

    GridField Lu = apply_L(u);
    const bool has_v = !v.is_zero();
    const GridField* vf = has_v ? &v.steady() : nullptr;
    double res2 = 0.0;
    double vmax = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double vv = has_v ? (*vf)[i] : 0.0;
        const double r = Lu[i] - vv * u[i];
        res2 += r * r;
        vmax = std::max(vmax, std::abs(vv));
    }
    const double rel = std::sqrt(res2 * u.space().cell_weight()) / (u.l2() * (1.0 + vmax));
    if (rel > res_tol) {
        std::ostringstream msg;
        msg << "state is not stationary: relative residual |L u - V u| = " << rel
            << " exceeds " << res_tol;
        throw contract_error(msg.str());
    }

    GridField f = map_field(u, [](double x) { return std::log(x); });
    GridField G = gamma(f);
    GridField GZ = gamma_Z(f);
    const double cz = constants.rho2 / (4.0 * std::abs(constants.rho1));
    const double cv = 2.0 + constants.k / constants.rho2;
    StationaryFit fit;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double vv = has_v ? (*vf)[i] : 0.0;
        const double cand = G[i] + cz * GZ[i] - cv * vv;
        if (cand > best) {
            best = cand;
            fit.arg_cell = i;
        }
    }
    fit.C = best;
    return fit;
}

} // namespace srh
