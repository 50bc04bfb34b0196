#include "srh/heat_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "srh/errors.hpp"
#include "srh/field_synth.hpp"
#include "srh/forms.hpp"
#include "srh/rng.hpp"

namespace srh {

Potential Potential::zero(const ModelSpace& space) {
    Potential p;
    p.times_ = {0.0};
    p.fields_.emplace_back(space, 0.0);
    p.zero_ = true;
    return p;
}

Potential Potential::constant(const ModelSpace& space, double value) {
    if (value < 0.0) throw config_error("potential must be nonnegative");
    Potential p;
    p.times_ = {0.0};
    p.fields_.emplace_back(space, value);
    p.zero_ = (value == 0.0);
    return p;
}

Potential Potential::from_field(GridField v) {
    if (!v.has_space()) throw contract_error("potential field has no space");
    if (v.min() < 0.0) {
        std::ostringstream msg;
        msg << "potential must be nonnegative (min = " << v.min() << ")";
        throw config_error(msg.str());
    }
    Potential p;
    p.times_ = {0.0};
    p.zero_ = (v.linf() == 0.0);
    p.fields_.push_back(std::move(v));
    return p;
}

Potential Potential::time_varying(std::vector<double> times, std::vector<GridField> fields) {
    if (times.empty() || times.size() != fields.size())
        throw config_error("time-varying potential needs matching nonempty times and fields");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw config_error("time-varying potential times must be strictly increasing");
    bool all_zero = true;
    for (const auto& f : fields) {
        if (!f.has_space()) throw contract_error("potential field has no space");
        if (!(f.space() == fields.front().space()))
            throw contract_error("time-varying potential fields live on different spaces");
        if (f.min() < 0.0) throw config_error("potential must be nonnegative at all times");
        all_zero = all_zero && f.linf() == 0.0;
    }
    Potential p;
    p.times_ = std::move(times);
    p.fields_ = std::move(fields);
    p.zero_ = all_zero;
    return p;
}

const ModelSpace& Potential::space() const {
    if (fields_.empty()) throw contract_error("potential is empty");
    return fields_.front().space();
}

GridField Potential::sample(double t) const {
    if (fields_.empty()) throw contract_error("potential is empty");
    if (!time_dependent()) return fields_.front();
    if (t <= times_.front()) return fields_.front();
    if (t >= times_.back()) return fields_.back();
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
    GridField out = fields_[lo];
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (1.0 - w) * out[i] + w * fields_[hi][i];
    return out;
}

const GridField& Potential::steady() const {
    if (fields_.empty()) throw contract_error("potential is empty");
    if (time_dependent())
        throw contract_error("steady() called on a time-varying potential; use sample(t)");
    return fields_.front();
}

double Potential::value_at(double t, int i, int j, int l) const {
    if (fields_.empty()) throw contract_error("potential is empty");
    if (!time_dependent()) return fields_.front().at(i, j, l);
    if (t <= times_.front()) return fields_.front().at(i, j, l);
    if (t >= times_.back()) return fields_.back().at(i, j, l);
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
    return (1.0 - w) * fields_[lo].at(i, j, l) + w * fields_[hi].at(i, j, l);
}

PotentialBounds Potential::bounds() const {
    PotentialBounds b;
    if (zero_) return b;
    double g1sq = 0.0, g2sq = 0.0, th = -std::numeric_limits<double>::infinity();
    for (const auto& f : fields_) {
        g1sq = std::max(g1sq, gamma(f).max());
        g2sq = std::max(g2sq, gamma_Z(f).max());
        th = std::max(th, apply_L(f).max());
    }
    b.gamma1 = std::sqrt(std::max(0.0, g1sq));
    b.gamma2 = std::sqrt(std::max(0.0, g2sq));
    b.theta = th;
    return b;
}

PotentialBounds potential_bounds(const Potential& v) { return v.bounds(); }

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::CrankNicolson: return "crank_nicolson";
        case Scheme::BackwardEuler: return "backward_euler";
    }
    return "unknown";
}

std::size_t Trajectory::index_of(double t, double tol) const {
    if (times.empty()) throw contract_error("trajectory is empty");
    auto it = std::lower_bound(times.begin(), times.end(), t);
    std::size_t best = static_cast<std::size_t>(it - times.begin());
    if (best == times.size()) best -= 1;
    if (best > 0 && std::abs(times[best - 1] - t) < std::abs(times[best] - t)) best -= 1;
    const double err = std::abs(times[best] - t);
    if (err > tol * std::max(1.0, std::abs(t))) {
        std::ostringstream msg;
        msg << "no stored state near t = " << t << " (stored range [" << times.front() << ", "
            << times.back() << "], nearest " << times[best] << ")";
        throw contract_error(msg.str());
    }
    return best;
}

const GridField& Trajectory::at_time(double t, double tol) const {
    return states[index_of(t, tol)];
}

double Trajectory::store_dt() const {
    if (times.size() < 2) throw contract_error("trajectory stores fewer than 2 times");
    return times[1] - times[0];
}

namespace {

// Diagonal of -L for the Jacobi preconditioner; the mixed y-z stencil on the
// sheared quotient has zero diagonal so only the axis second differences
// contribute.
void neg_L_diag(const ModelSpace& ms, std::vector<double>& out) {
    out.assign(ms.ncells(), 0.0);
    const double cxx = 2.0 / (ms.hx() * ms.hx());
    const double cyy = 2.0 / (ms.hy() * ms.hy());
    const bool nil = ms.sheared();
    for (int i = 0; i < ms.nx(); ++i) {
        const double x = ms.x_of(i);
        const double czz = nil ? 2.0 * x * x / (ms.hz() * ms.hz()) : 0.0;
        const double d = cxx + cyy + czz;
        for (int j = 0; j < ms.ny(); ++j)
            for (int l = 0; l < ms.nz(); ++l)
                out[ms.index(i, j, l)] = d;
    }
}

// y = x - c (L x - V x)
struct ImplicitOp {
    double c = 0.0;
    const GridField* V = nullptr; // null for the zero potential

    void apply(const GridField& x, GridField& y) const {
        y = apply_L(x);
        if (V != nullptr) {
            const GridField& vv = *V;
            for (std::size_t i = 0; i < y.size(); ++i)
                y[i] = x[i] - c * (y[i] - vv[i] * x[i]);
        } else {
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] - c * y[i];
        }
    }
};

double dot(const GridField& a, const GridField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Jacobi-preconditioned conjugate gradient; x carries the warm start.
// Returns the iteration count.
int solve_spd(const ImplicitOp& A, const std::vector<double>& diag, const GridField& rhs,
              GridField& x, double rtol, int max_iters) {
    const ModelSpace& ms = rhs.space();
    GridField r(ms), z(ms), p(ms), Ap(ms);
    A.apply(x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
    const double rhs_norm = std::sqrt(dot(rhs, rhs));
    const double stop = rtol * (rhs_norm > 0.0 ? rhs_norm : 1.0);
    double rr = std::sqrt(dot(r, r));
    if (rr <= stop) return 0;
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iters; ++it) {
        A.apply(p, Ap);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0)) throw numeric_error("implicit operator lost positive definiteness");
        const double step = rz / pAp;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += step * p[i];
            r[i] -= step * Ap[i];
        }
        rr = std::sqrt(dot(r, r));
        if (rr <= stop) return it;
        for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] / diag[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
    }
    throw numeric_error("implicit solve failed to converge within the iteration budget");
}

struct Stepper {
    const ModelSpace* ms = nullptr;
    const Potential* v = nullptr;
    double rtol = 1e-12;
    int max_iters = 50000;
    int max_halvings = 12;
    std::vector<double> diag_base; // -L diagonal, potential-free part
    std::vector<double> diag;      // 1 + c (diag_base + V)
    double diag_c = -1.0;
    int cg_iters = 0;
    int substeps = 0;
    int clamped_cells = 0;

    void prepare(const ModelSpace& space, const Potential& pot) {
        ms = &space;
        v = &pot;
        neg_L_diag(space, diag_base);
        diag.resize(diag_base.size());
    }

    // One implicit step from t over dt; u is advanced in place, guess seeds
    // the solver. Recurses on halved substeps when positivity fails.
    void advance(GridField& u, double t, double dt, Scheme scheme, const GridField* guess,
                 int depth) {
        const double c = (scheme == Scheme::CrankNicolson) ? 0.5 * dt : dt;
        GridField v_start_store;
        const GridField* Vex = nullptr;
        if (!v->is_zero() && scheme == Scheme::CrankNicolson) {
            if (v->time_dependent()) {
                v_start_store = v->sample(t);
                Vex = &v_start_store;
            } else {
                Vex = &v->steady();
            }
        }
        GridField rhs(*ms);
        if (scheme == Scheme::CrankNicolson) {
            rhs = apply_L(u);
            if (Vex != nullptr)
                for (std::size_t i = 0; i < rhs.size(); ++i)
                    rhs[i] = u[i] + c * (rhs[i] - (*Vex)[i] * u[i]);
            else
                for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = u[i] + c * rhs[i];
        } else {
            rhs = u;
        }
        // The implicit side is evaluated at the step's end time.
        GridField v_end_store;
        const GridField* Vim = nullptr;
        if (!v->is_zero()) {
            if (v->time_dependent()) {
                v_end_store = v->sample(t + dt);
                Vim = &v_end_store;
            } else {
                Vim = &v->steady();
            }
        }
        ImplicitOp op;
        op.c = c;
        op.V = Vim;
        if (v->time_dependent() || c != diag_c) {
            for (std::size_t i = 0; i < diag.size(); ++i)
                diag[i] = 1.0 + c * (diag_base[i] + (Vim != nullptr ? (*Vim)[i] : 0.0));
            diag_c = c;
        }
        GridField next = (guess != nullptr) ? *guess : u;
        cg_iters += solve_spd(op, diag, rhs, next, rtol, max_iters);
        // Scheme oscillation undershoots at the scale of the peak and shrinks
        // under halving. Near-delta data additionally undershoots through its
        // sub-resolved exponential tail, where the stencil has order-one
        // relative error and any sign is within the data's accuracy; that
        // flux is dt-linear and sits orders below the peak. Reject only the
        // former; lift the harmless tail cells to a tiny positive floor so
        // logarithmic functionals stay finite, and restore the exact mass in
        // the conserved case.
        const double peak = next.linf();
        if (next.min() > -1e-4 * peak) {
            const double floor = 1e-15 * peak;
            int clamped = 0;
            for (std::size_t i = 0; i < next.size(); ++i)
                if (next[i] <= 0.0) {
                    next[i] = floor;
                    clamped += 1;
                }
            clamped_cells += clamped;
            if (clamped > 0 && v->is_zero()) {
                const double m_before = u.integral();
                const double m_after = next.integral();
                if (m_after > 0.0) next = (m_before / m_after) * next;
            }
            u = std::move(next);
            substeps += 1;
            return;
        }
        if (depth >= max_halvings) {
            std::ostringstream msg;
            msg << "state lost positivity at t = " << t << " even after " << max_halvings
                << " step halvings";
            throw numeric_error(msg.str());
        }
        advance(u, t, 0.5 * dt, scheme, nullptr, depth + 1);
        advance(u, t + 0.5 * dt, 0.5 * dt, scheme, nullptr, depth + 1);
    }
};

} // namespace

Trajectory evolve(const GridField& u0, const Potential& v, const EvolveOptions& opt) {
    if (!u0.has_space()) throw contract_error("evolve: initial state has no space");
    const ModelSpace& ms = u0.space();
    if (!v.is_zero() && !(v.space() == ms))
        throw contract_error("evolve: potential and state spaces differ");
    if (!(u0.min() > 0.0))
        throw contract_error("evolve needs a strictly positive initial state");
    if (!(opt.dt > 0.0) || !(opt.t_end > 0.0))
        throw config_error("evolve needs positive dt and t_end");
    const double steps_real = opt.t_end / opt.dt;
    const long long n_steps = std::llround(steps_real);
    if (n_steps < 1 || std::abs(steps_real - double(n_steps)) > 1e-9 * std::max(1.0, steps_real))
        throw config_error("t_end must be an integer multiple of dt");
    if (opt.store_every < 1 || n_steps % opt.store_every != 0)
        throw config_error("store_every must be positive and divide t_end / dt");

    Trajectory traj;
    traj.space = &ms;
    traj.dt = opt.dt;
    traj.scheme = opt.scheme;
    traj.potential_is_zero = v.is_zero();
    traj.initial_mass = u0.integral();
    traj.times.push_back(0.0);
    traj.states.push_back(u0);

    Stepper st;
    st.prepare(ms, v);
    st.rtol = opt.solver_rtol;
    st.max_iters = opt.solver_max_iters;
    st.max_halvings = opt.max_halvings;

    GridField u = u0;
    GridField u_prev; // previous macro state for the extrapolated warm start
    GridField guess(ms);
    for (long long k = 0; k < n_steps; ++k) {
        const double t = double(k) * opt.dt;
        const Scheme scheme =
            (k < opt.initial_be_steps) ? Scheme::BackwardEuler : opt.scheme;
        const GridField* g = nullptr;
        if (u_prev.has_space()) {
            for (std::size_t i = 0; i < guess.size(); ++i)
                guess[i] = 2.0 * u[i] - u_prev[i];
            g = &guess;
        }
        u_prev = u;
        st.cg_iters = 0;
        st.substeps = 0;
        st.clamped_cells = 0;
        st.advance(u, t, opt.dt, scheme, g, 0);
        StepMeta meta;
        meta.t_from = t;
        meta.t_to = t + opt.dt;
        meta.substeps = st.substeps;
        meta.cg_iters = st.cg_iters;
        meta.clamped = st.clamped_cells;
        traj.step_meta.push_back(meta);
        if ((k + 1) % opt.store_every == 0) {
            traj.times.push_back(double(k + 1) * opt.dt);
            traj.states.push_back(u);
        }
    }
    return traj;
}

Trajectory heat_kernel(const ModelSpace& space, int i0, int j0, int l0, double t,
                       const KernelOptions& opt) {
    if (i0 < 0 || i0 >= space.nx() || j0 < 0 || j0 >= space.ny() || l0 < 0 || l0 >= space.nz())
        throw contract_error("heat_kernel: source cell outside the grid");
    if (!(t > 0.0)) throw contract_error("heat_kernel needs t > 0");
    const double sx = opt.width_cells * space.hx();
    const double sy = opt.width_cells * space.hy();
    const double sz = opt.width_cells * space.hz();
    LatticeBump bump(space.kind(), space.x_of(i0), space.y_of(j0), space.z_of(l0), sx, sy, sz);
    GridField u0 = bump.sample(space);
    const double mass = u0.integral();
    if (!(mass > 0.0)) throw numeric_error("heat_kernel: bump mass vanished");
    u0 = (1.0 / mass) * u0;

    EvolveOptions eopt;
    eopt.t_end = t;
    eopt.dt = opt.dt;
    eopt.store_every = opt.store_every;
    eopt.scheme = Scheme::CrankNicolson;
    eopt.initial_be_steps = opt.initial_be_steps;
    eopt.solver_rtol = opt.solver_rtol;
    return evolve(u0, Potential::zero(space), eopt);
}

GroundState ground_state(const Potential& v, double res_tol, int max_iters) {
    const ModelSpace& ms = v.space();
    if (v.time_dependent())
        throw contract_error("ground_state needs a time-independent potential");

    Stepper st;
    st.prepare(ms, v);
    st.rtol = 1e-12;
    st.max_iters = 100000;

    const double tau = 1.0;
    ImplicitOp op;
    op.c = tau;
    op.V = v.is_zero() ? nullptr : &v.steady();
    std::vector<double> diag(st.diag_base.size());
    for (std::size_t i = 0; i < diag.size(); ++i)
        diag[i] = 1.0 + tau * (st.diag_base[i] + (op.V != nullptr ? (*op.V)[i] : 0.0));

    GroundState gs;
    GridField u(ms, 1.0);
    GridField Au(ms);
    int iters = 0;
    while (iters < max_iters) {
        GridField next = u;
        solve_spd(op, diag, u, next, 1e-12, 100000);
        const double nrm = std::sqrt(dot(next, next));
        if (!(nrm > 0.0)) throw numeric_error("ground_state iteration collapsed to zero");
        for (std::size_t i = 0; i < next.size(); ++i) next[i] /= nrm;
        u = std::move(next);
        ++iters;

        Au = apply_L(u);
        if (op.V != nullptr)
            for (std::size_t i = 0; i < Au.size(); ++i) Au[i] -= (*op.V)[i] * u[i];
        const double lam = dot(u, Au) / dot(u, u);
        double res2 = 0.0;
        for (std::size_t i = 0; i < Au.size(); ++i) {
            const double r = Au[i] - lam * u[i];
            res2 += r * r;
        }
        const double rel = std::sqrt(res2 / dot(u, u));
        if (rel <= res_tol) {
            gs.lam0 = lam;
            gs.residual = rel;
            break;
        }
        gs.lam0 = lam;
        gs.residual = rel;
    }
    gs.iterations = iters;
    if (gs.residual > res_tol)
        throw numeric_error("ground_state failed to reach the residual tolerance");
    const double umax = u.max();
    if (!(umax > 0.0)) throw numeric_error("ground_state produced a non-positive mode");
    for (std::size_t i = 0; i < u.size(); ++i) u[i] /= umax;
    gs.u = std::move(u);
    return gs;
}

double operator_norm_estimate(const Potential& v, int iters) {
    const ModelSpace& ms = v.space();
    auto rng = make_stream(0xA17, 0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    GridField u(ms);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = unif(rng);
    const GridField* V = v.is_zero() ? nullptr : &v.steady();
    double norm = 0.0;
    GridField Au(ms);
    for (int it = 0; it < iters; ++it) {
        Au = apply_L(u);
        if (V != nullptr)
            for (std::size_t i = 0; i < Au.size(); ++i)
                Au[i] = -Au[i] + (*V)[i] * u[i];
        else
            for (std::size_t i = 0; i < Au.size(); ++i) Au[i] = -Au[i];
        norm = std::sqrt(dot(Au, Au));
        if (!(norm > 0.0)) return 0.0;
        for (std::size_t i = 0; i < Au.size(); ++i) Au[i] /= norm;
        u = std::move(Au);
        Au = GridField(ms);
    }
    return norm;
}

} // namespace srh
