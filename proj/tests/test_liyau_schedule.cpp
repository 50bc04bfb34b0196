#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "srh/errors.hpp"
#include "srh/heat_engine.hpp"
#include "srh/liyau_schedule.hpp"
#include "srh/quadrature.hpp"
#include "srh/rng.hpp"
#include "test_helpers.hpp"

using namespace srh;

namespace {

std::vector<double> log_points(double lo, double hi, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i)
        out.push_back(lo * std::pow(hi / lo, double(i) / double(n - 1)));
    return out;
}

ScheduleSpec power_spec(double gamma, double e1, double e2, double t_max = 5.0) {
    ScheduleSpec s;
    s.family = ScheduleFamily::PowerLaw;
    s.gamma = gamma;
    s.eps1 = e1;
    s.eps2 = e2;
    s.t_max = t_max;
    return s;
}

ScheduleSpec exp_spec(double gamma, int beta, double e1, double e2, double t_max) {
    ScheduleSpec s;
    s.family = ScheduleFamily::ExpFamily;
    s.gamma = gamma;
    s.beta = beta;
    s.eps1 = e1;
    s.eps2 = e2;
    s.t_max = t_max;
    return s;
}

// Hand-built trajectory of spatially constant states u(t) = amp(t).
Trajectory constant_trajectory(const ModelSpace& ms, double t0, double t1, double dt,
                               const std::function<double(double)>& amp) {
    Trajectory tr;
    tr.space = &ms;
    tr.dt = dt;
    tr.potential_is_zero = true;
    for (double t = t0; t <= t1 + 0.5 * dt; t += dt) {
        tr.times.push_back(t);
        tr.states.emplace_back(ms, amp(t));
    }
    tr.initial_mass = tr.states.front().integral();
    return tr;
}

} // namespace

TEST_CASE("arithmetic power-law instance matches both routes") {
    CDConstants c;
    c.rho1 = 0.0;
    c.rho2 = 0.5;
    c.k = 1.0;
    c.d = 2.0;
    PotentialBounds vb;
    ScheduleSpec spec = power_spec(2.0, 0.0, 0.0);

    auto cf = closed_form_schedule(spec, c, vb);
    REQUIRE(cf.has_phi);
    for (double t : log_points(0.01, 5.0, 9)) {
        CHECK(cf.b_at(t) == doctest::Approx(t / 3.0).epsilon(1e-14));
        CHECK(cf.alpha_at(t) == doctest::Approx(4.0).epsilon(1e-14));
        CHECK(cf.phi_at(t) == doctest::Approx(16.0 / t).epsilon(1e-14));
    }

    auto pts = log_points(0.01, 5.0, 21);
    auto sched = build_schedule(spec, c, vb, pts);
    for (double t : pts) {
        CHECK(sched.b(t) == doctest::Approx(t / 3.0).epsilon(1e-10));
        CHECK(sched.alpha(t) == doctest::Approx(4.0).epsilon(1e-10));
        CHECK(sched.phi(t) == doctest::Approx(16.0 / t).epsilon(1e-10));
    }
}

TEST_CASE("power-law schedules match closed forms for random tuples") {
    auto rng = make_stream(901, 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto pts = log_points(0.01, 5.0, 25);

    for (int trial = 0; trial < 3; ++trial) {
        CDConstants c;
        c.rho1 = -1.0 + 2.0 * unif(rng);
        c.rho2 = 0.3 + 1.7 * unif(rng);
        c.k = 2.0 * unif(rng);
        c.d = 2.0 + 2.5 * unif(rng);
        const double gamma = 1.3 + 1.7 * unif(rng);

        // Degenerate potential-free variant.
        {
            ScheduleSpec spec = power_spec(gamma, 0.0, 0.0);
            auto cf = closed_form_schedule(spec, c, {});
            auto sched = build_schedule(spec, c, {}, pts);
            for (double t : pts) {
                CHECK(sched.b(t) == doctest::Approx(cf.b_at(t)).epsilon(1e-8));
                CHECK(sched.alpha(t) == doctest::Approx(cf.alpha_at(t)).epsilon(1e-8));
                CHECK(sched.phi(t) == doctest::Approx(cf.phi_at(t)).epsilon(1e-8));
            }
        }
        // General relaxation weights with a nonzero potential budget.
        {
            ScheduleSpec spec = power_spec(gamma, 0.2 + 0.6 * unif(rng), 0.2 + 0.6 * unif(rng));
            PotentialBounds vb;
            vb.gamma1 = unif(rng);
            vb.gamma2 = unif(rng);
            vb.theta = -0.3 + 1.3 * unif(rng);
            auto cf = closed_form_schedule(spec, c, vb);
            auto sched = build_schedule(spec, c, vb, pts);
            for (double t : pts) {
                CHECK(sched.b(t) == doctest::Approx(cf.b_at(t)).epsilon(1e-8));
                CHECK(sched.alpha(t) == doctest::Approx(cf.alpha_at(t)).epsilon(1e-8));
                CHECK(sched.phi(t) == doctest::Approx(cf.phi_at(t)).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("relaxed exponential-family alpha matches the direct expression") {
    // Independent oracle for beta = 2, eps = 1/2: alpha(t) = 3/2 + k/rho2
    // - 2/(3 gamma) + (2/(3 gamma) + k/(2 rho2)) e^{-gamma rho1 t}.
    auto rng = make_stream(902, 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 4; ++trial) {
        CDConstants c;
        c.rho1 = (trial % 2 == 0 ? 1.0 : -1.0) * (0.2 + 0.8 * unif(rng));
        c.rho2 = 0.3 + 1.7 * unif(rng);
        c.k = 2.0 * unif(rng);
        c.d = 2.0 + 2.0 * unif(rng);
        double gamma = (0.4 + 1.2 * unif(rng)) * (c.rho1 > 0 ? 1.0 : -1.0);
        const double q = gamma * c.rho1;
        double t_hi = 5.0;
        if (q < 0.0) t_hi = 0.9 * std::log(3.0) / (-q);
        ScheduleSpec spec = exp_spec(gamma, 2, 0.5, 0.5, t_hi);
        auto cf = closed_form_schedule(spec, c, {});
        for (double t : log_points(0.01, t_hi, 13)) {
            const double oracle = 1.5 + c.k / c.rho2 - 2.0 / (3.0 * gamma) +
                                  (2.0 / (3.0 * gamma) + c.k / (2.0 * c.rho2)) *
                                      std::exp(-gamma * c.rho1 * t);
            CHECK(cf.alpha_at(t) == doctest::Approx(oracle).epsilon(1e-12));
        }
    }
}

TEST_CASE("exponential-family quadrature matches the closed forms") {
    auto rng = make_stream(903, 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    struct Branch {
        double sign;
        int beta;
        double e1, e2;
    };
    const Branch branches[] = {
        {+1.0, 2, 0.5, 0.5}, // relaxed weights, positive drift bound
        {-1.0, 2, 0.5, 0.5}, // relaxed weights, negative drift bound
        {+1.0, 4, 0.35, 0.6}, // higher even power
    };
    for (const Branch& br : branches) {
        CDConstants c;
        c.rho1 = br.sign * (0.3 + 0.7 * unif(rng));
        c.rho2 = 0.4 + 1.2 * unif(rng);
        c.k = 0.2 + 1.5 * unif(rng);
        c.d = 2.0 + 2.0 * unif(rng);
        double gamma = (0.5 + 1.0 * unif(rng)) * br.sign;
        const double q = gamma * c.rho1;
        double t_hi = 4.0;
        if (q < 0.0) t_hi = 0.85 * std::log(1.0 + br.beta) / (-q);
        ScheduleSpec spec = exp_spec(gamma, br.beta, br.e1, br.e2, t_hi);
        auto cf = closed_form_schedule(spec, c, {});
        auto pts = log_points(0.01, t_hi, 17);
        auto sched = build_schedule(spec, c, {}, pts);
        for (double t : pts) {
            CHECK(sched.b(t) == doctest::Approx(cf.b_at(t)).epsilon(1e-8));
            CHECK(sched.alpha(t) == doctest::Approx(cf.alpha_at(t)).epsilon(1e-8));
        }
    }
}

TEST_CASE("exponential-family degenerate cost matches the closed form") {
    auto rng = make_stream(904, 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        const double sign = (trial == 2) ? -1.0 : 1.0;
        const int beta = (trial == 1) ? 4 : 2;
        CDConstants c;
        c.rho1 = sign * (0.3 + 0.7 * unif(rng));
        c.rho2 = 0.4 + 1.2 * unif(rng);
        c.k = 0.2 + 1.5 * unif(rng);
        c.d = 2.0 + 2.0 * unif(rng);
        double gamma = sign * (0.6 + 1.0 * unif(rng));
        const double q = gamma * c.rho1;
        double t_hi = 4.0;
        if (q < 0.0) t_hi = 0.85 * std::log(1.0 + beta) / (-q);
        ScheduleSpec spec = exp_spec(gamma, beta, 0.0, 0.0, t_hi);
        auto cf = closed_form_schedule(spec, c, {});
        REQUIRE(cf.has_phi);
        auto pts = log_points(0.01, t_hi, 17);
        auto sched = build_schedule(spec, c, {}, pts);
        for (double t : pts) {
            CHECK(sched.alpha(t) == doctest::Approx(cf.alpha_at(t)).epsilon(1e-8));
            CHECK(sched.phi(t) == doctest::Approx(cf.phi_at(t)).epsilon(1e-8));
        }
    }
}

TEST_CASE("defining integral identities hold against fresh quadrature") {
    CDConstants c;
    c.rho1 = -0.4;
    c.rho2 = 0.7;
    c.k = 1.1;
    c.d = 2.5;
    ScheduleSpec spec = power_spec(1.7, 0.35, 0.55);
    PotentialBounds vb;
    vb.gamma1 = 0.8;
    vb.gamma2 = 0.5;
    vb.theta = 0.4;
    auto sched = build_schedule(spec, c, vb);

    auto a_fn = [&](double t) { return std::pow(t, spec.gamma); };
    auto pairs = log_points(0.02, 4.5, 7);
    for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
        const double t1 = pairs[i], t2 = pairs[i + 1];
        // d(ab)/dt = 2 (1-eps2) rho2 a, so a b increments by the fresh integral.
        const double lhs_b = sched.a(t2) * sched.b(t2) - sched.a(t1) * sched.b(t1);
        const double rhs_b = 2.0 * (1.0 - spec.eps2) * c.rho2 *
                             adaptive_simpson(a_fn, t1, t2, 1e-14, 1e-13);
        CHECK(lhs_b == doctest::Approx(rhs_b).epsilon(1e-9));

        // d(a alpha)/dt = (4/d) a eta.
        auto aeta = [&](double t) { return sched.a(t) * sched.eta(t); };
        const double lhs_a = sched.a(t2) * sched.alpha(t2) - sched.a(t1) * sched.alpha(t1);
        const double rhs_a = (4.0 / c.d) * adaptive_simpson(aeta, t1, t2, 1e-14, 1e-13);
        CHECK(lhs_a == doctest::Approx(rhs_a).epsilon(1e-8));

        // d(a phi)/dt = a * running cost bracket.
        auto apsi = [&](double t) {
            const double al = sched.alpha(t);
            const double bt = sched.b(t);
            const double et = sched.eta(t);
            const double am1 = al - 1.0;
            const double bracket = vb.gamma1 * vb.gamma1 * sched.a(t) * am1 * am1 /
                                       (spec.eps1 * sched.da(t)) +
                                   bt * bt * vb.gamma2 * vb.gamma2 / (2.0 * spec.eps2 * c.rho2) +
                                   vb.theta * al + 2.0 * et * et / c.d;
            return sched.a(t) * bracket;
        };
        const double lhs_p = sched.a(t2) * sched.phi(t2) - sched.a(t1) * sched.phi(t1);
        const double rhs_p = adaptive_simpson(apsi, t1, t2, 1e-14, 1e-13);
        CHECK(lhs_p == doctest::Approx(rhs_p).epsilon(1e-8));
    }

    // Differential form via Richardson extrapolated centered differences of
    // the tabulated alpha, at grid nodes away from the ends.
    for (double t : {0.3, 0.9, 2.4}) {
        const double h = 1e-3 * t;
        auto dnum = [&](double hh) {
            return (sched.alpha(t + hh) - sched.alpha(t - hh)) / (2.0 * hh);
        };
        const double der = (4.0 * dnum(h) - dnum(2.0 * h)) / 3.0;
        const double rhs = 4.0 * sched.eta(t) / c.d - sched.alpha(t) * sched.da(t) / sched.a(t);
        CHECK(der == doctest::Approx(rhs).epsilon(2e-7));
    }
}

TEST_CASE("alpha approaches its small-time limit") {
    CDConstants c;
    c.rho1 = 0.6;
    c.rho2 = 0.9;
    c.k = 1.2;
    c.d = 3.0;
    ScheduleSpec spec = power_spec(2.3, 0.4, 0.3);
    PotentialBounds vb;
    vb.gamma1 = 0.5;
    auto sched = build_schedule(spec, c, vb);
    const double c0 = (1.0 + spec.eps1) + (1.0 + spec.gamma) * c.k / (spec.gamma * c.rho2);
    CHECK(std::abs(sched.alpha(sched.t_min()) - c0) < 1e-6);
    auto range = sched.alpha_range(5.0);
    CHECK(range.second <= c0 + 1e-9); // rho1 > 0 makes alpha decreasing
    CHECK(range.first == doctest::Approx(sched.alpha(5.0)).epsilon(1e-12));
}

TEST_CASE("custom tabulated rate reproduces the power-law schedule") {
    CDConstants c;
    c.rho1 = 0.0;
    c.rho2 = 0.5;
    c.k = 1.0;
    c.d = 2.0;
    ScheduleSpec spec;
    spec.family = ScheduleFamily::Custom;
    spec.eps1 = 0.0;
    spec.eps2 = 0.0;
    spec.t_max = 5.0;
    const int nrows = 201;
    for (int i = 0; i < nrows; ++i) {
        const double t = 5.0 * double(i) / double(nrows - 1);
        spec.custom.t.push_back(t);
        spec.custom.a.push_back(t * t);
        spec.custom.da.push_back(2.0 * t);
    }
    auto pts = log_points(0.01, 5.0, 15);
    auto sched = build_schedule(spec, c, {}, pts);
    for (double t : pts) {
        CHECK(sched.b(t) == doctest::Approx(t / 3.0).epsilon(1e-8));
        CHECK(sched.alpha(t) == doctest::Approx(4.0).epsilon(1e-8));
        CHECK(sched.phi(t) == doctest::Approx(16.0 / t).epsilon(1e-8));
    }
}

TEST_CASE("inadmissible schedule requests are rejected") {
    CDConstants c;
    c.rho1 = 0.5;
    c.rho2 = 0.5;
    c.k = 1.0;
    c.d = 2.0;
    PotentialBounds vb;

    CHECK_THROWS_AS(build_schedule(power_spec(1.0, 0.0, 0.0), c, vb), config_error);
    CHECK_THROWS_AS(build_schedule(power_spec(0.5, 0.0, 0.0), c, vb), config_error);
    CHECK_THROWS_AS(build_schedule(power_spec(2.0, 0.0, 0.5), c, vb), config_error);
    CHECK_THROWS_AS(build_schedule(power_spec(2.0, 1.2, 0.5), c, vb), config_error);

    PotentialBounds nz;
    nz.gamma1 = 1.0;
    CHECK_THROWS_AS(build_schedule(power_spec(2.0, 0.0, 0.0), c, nz), config_error);

    CDConstants cinf = c;
    cinf.d = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(build_schedule(power_spec(2.0, 0.5, 0.5), cinf, vb), config_error);

    CDConstants c0 = c;
    c0.rho1 = 0.0;
    CHECK_THROWS_AS(build_schedule(exp_spec(1.0, 2, 0.5, 0.5, 1.0), c0, vb), config_error);
    CHECK_THROWS_AS(build_schedule(exp_spec(0.0, 2, 0.5, 0.5, 1.0), c, vb), config_error);
    CHECK_THROWS_AS(build_schedule(exp_spec(1.0, 3, 0.5, 0.5, 1.0), c, vb), config_error);

    // Shrinking exponent (gamma * rho1 < 0): admissible only below the
    // monotonicity horizon t*, and outside the closed-form regime entirely.
    const double t_star = std::log(3.0) / 0.5; // gamma = -1, rho1 = 0.5
    CHECK_THROWS_AS(build_schedule(exp_spec(-1.0, 2, 0.5, 0.5, 1.1 * t_star), c, vb),
                    config_error);
    CHECK_NOTHROW(build_schedule(exp_spec(-1.0, 2, 0.5, 0.5, 0.8 * t_star), c, vb));
    CHECK_THROWS_AS(closed_form_schedule(exp_spec(-1.0, 2, 0.5, 0.5, 1.0), c, vb),
                    config_error);

    // Custom tables: bad shapes and a non-integrable head.
    ScheduleSpec cs;
    cs.family = ScheduleFamily::Custom;
    cs.eps1 = cs.eps2 = 0.0;
    cs.t_max = 1.0;
    cs.custom.t = {0.0, 0.5};
    cs.custom.a = {0.0, 0.25};
    cs.custom.da = {0.0, 1.0};
    CHECK_THROWS_AS(build_schedule(cs, c, vb), config_error);
    cs.custom.t = {0.0, 0.5, 1.0};
    cs.custom.a = {0.0, 0.5, 1.0}; // linear: local exponent p = 1, not integrable
    cs.custom.da = {1.0, 1.0, 1.0};
    CHECK_THROWS_AS(build_schedule(cs, c, vb), config_error);
    cs.custom.a = {0.0, 0.25, 1.0};
    cs.custom.da = {0.0, 1.0, 2.0};
    cs.t_max = 2.0; // beyond the table
    CHECK_THROWS_AS(build_schedule(cs, c, vb), config_error);

    CHECK_THROWS_AS(closed_form_schedule(cs, c, vb), config_error);
}

TEST_CASE("schedule queries outside the tabulated range throw") {
    CDConstants c;
    c.rho2 = 0.5;
    c.k = 1.0;
    c.d = 2.0;
    auto sched = build_schedule(power_spec(2.0, 0.0, 0.0, 2.0), c, {});
    CHECK_THROWS_AS(sched.phi(0.0), contract_error);
    CHECK_THROWS_AS(sched.alpha(2.5), contract_error);
    CHECK_NOTHROW(sched.phi(2.0));
}

TEST_CASE("harnack margin of the constant solution is minus the cost") {
    ModelSpace ms(SpaceKind::FlatTorus3, 8, 8, 8);
    CDConstants c;
    c.rho2 = 0.5;
    c.k = 1.0;
    c.d = 2.0;
    auto traj = constant_trajectory(ms, 0.3, 0.5, 0.01, [](double) { return 1.0; });
    auto sched = build_schedule(power_spec(2.0, 0.0, 0.0, 1.0), c, {}, traj.times);
    auto margin = harnack_margin(traj, Potential::zero(ms), sched);
    REQUIRE(margin.t.size() == traj.times.size() - 2);
    for (std::size_t i = 0; i < margin.t.size(); ++i) {
        const double phi = sched.phi(margin.t[i]);
        CHECK(margin.value[i] == doctest::Approx(-phi).epsilon(1e-12));
        CHECK(margin.scale[i] == doctest::Approx(phi).epsilon(1e-12));
        CHECK(margin.value[i] < 0.0);
    }
}

TEST_CASE("margins of decaying constant solutions meet the closed forms") {
    ModelSpace ms(SpaceKind::FlatTorus3, 6, 6, 6);
    CDConstants c;
    c.rho2 = 0.5;
    c.k = 1.0;
    c.d = 2.0;
    const double decay = 0.35;
    auto traj =
        constant_trajectory(ms, 0.4, 0.44, 1e-3, [&](double t) { return std::exp(-decay * t); });
    traj.potential_is_zero = false;
    auto sched = build_schedule(power_spec(2.0, 0.0, 0.0, 1.0), c, {}, traj.times);
    auto vpot = Potential::constant(ms, decay);

    // f_t + V = 0 for u = e^{-V t}, so F = -phi exactly.
    auto margin = harnack_margin(traj, vpot, sched);
    for (std::size_t i = 0; i < margin.t.size(); ++i)
        CHECK(margin.value[i] == doctest::Approx(-sched.phi(margin.t[i])).epsilon(1e-10));

    // The subsolution defect of F = -phi reduces to the running cost with
    // the alpha and drift terms cancelled: 2 eta^2 / d.
    auto sub = subsolution_margin(traj, vpot, sched);
    REQUIRE(sub.t.size() >= 3);
    for (std::size_t i = 0; i < sub.t.size(); ++i) {
        const double eta = sched.eta(sub.t[i]);
        CHECK(sub.value[i] == doctest::Approx(2.0 * eta * eta / c.d).epsilon(1e-4));
        CHECK(sub.value[i] >= 0.0);
    }
}

TEST_CASE("stationary gradient fit handles exact and rejected inputs") {
    ModelSpace ms(SpaceKind::FlatTorus3, 8, 8, 8);
    CDConstants c;
    c.rho1 = -0.5;
    c.rho2 = 0.5;
    c.k = 1.0;
    c.d = 2.0;
    GridField u(ms, 2.0);

    auto fit = stationary_gradient_fit(u, Potential::zero(ms), c);
    CHECK(fit.C == doctest::Approx(0.0).epsilon(1e-12));

    CDConstants czero = c;
    czero.rho1 = 0.0;
    CHECK_THROWS_AS(stationary_gradient_fit(u, Potential::zero(ms), czero), contract_error);

    GridField bad(ms);
    bad.fill_from([](double x, double, double) { return 1.0 + 0.3 * std::sin(2.0 * M_PI * x); });
    CHECK_THROWS_AS(stationary_gradient_fit(bad, Potential::zero(ms), c), contract_error);
}
