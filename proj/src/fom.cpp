#include "morrow/fom.hpp"

#include <algorithm>
#include <cmath>

namespace morrow {

LmmStepContext make_lmm_context(const LmmScheme& scheme, int n, double dt,
                                const std::vector<Vector>& states, double t0)
{
    LmmStepContext ctx;
    ctx.coeffs = scheme.coeffs(n);
    ctx.n = n;
    ctx.dt = dt;
    ctx.t0 = t0;
    const int k = ctx.coeffs.k();
    if (static_cast<int>(states.size()) < n || n < k)
        throw Error("make_lmm_context: not enough history for step " + std::to_string(n));
    for (int j = 1; j <= k; ++j)
        ctx.history.push_back(states[n - j]);
    return ctx;
}

static void check_context(const Model& model, const LmmStepContext& ctx)
{
    if (static_cast<int>(ctx.history.size()) != ctx.coeffs.k())
        throw DimensionError("LmmStepContext: history length must equal k");
    for (const auto& h : ctx.history)
        require_dim(h.size(), model.dim(), "LmmStepContext history");
}

Vector lmm_history_term(const Model& model, const LmmStepContext& ctx)
{
    check_context(model, ctx);
    Vector acc = Vector::Zero(model.dim());
    for (int j = 1; j <= ctx.coeffs.k(); ++j) {
        const Vector& x = ctx.history[j - 1];
        acc += ctx.coeffs.alpha[j] * x;
        if (ctx.coeffs.beta[j] != 0.0)
            acc -= ctx.dt * ctx.coeffs.beta[j] * model.velocity(x, ctx.time(ctx.n - j));
    }
    return acc;
}

namespace {

Vector residual_with_history(const Model& model, const LmmStepContext& ctx, const Vector& hist, const Vector& w)
{
    Vector r = ctx.coeffs.alpha[0] * w + hist;
    if (ctx.coeffs.beta[0] != 0.0)
        r -= ctx.dt * ctx.coeffs.beta[0] * model.velocity(w, ctx.time(ctx.n));
    return r;
}

} // namespace

Vector lmm_residual(const Model& model, const LmmStepContext& ctx, const Vector& w)
{
    require_dim(w.size(), model.dim(), "lmm_residual");
    return residual_with_history(model, ctx, lmm_history_term(model, ctx), w);
}

Matrix lmm_residual_jacobian(const Model& model, const LmmStepContext& ctx, const Vector& w)
{
    require_dim(w.size(), model.dim(), "lmm_residual_jacobian");
    Matrix jac = ctx.coeffs.alpha[0] * Matrix::Identity(model.dim(), model.dim());
    if (ctx.coeffs.beta[0] != 0.0)
        jac -= ctx.dt * ctx.coeffs.beta[0] * model.jacobian(w, ctx.time(ctx.n));
    return jac;
}

Vector newton_solve(const ResidualFn& r, const ResidualJacobianFn& jac, Vector w0,
                    const SolverOptions& opts, NewtonReport* report)
{
    Vector w = std::move(w0);
    Vector res = r(w);
    const double r0 = res.norm();
    const double tol = std::max(opts.newton_abs_tol, opts.newton_rel_tol * r0);
    double rn = r0;
    int it = 0;
    while (!(rn <= tol)) {
        if (it == opts.max_iters || !std::isfinite(rn))
            throw ConvergenceError("Newton failed to converge after " + std::to_string(it) +
                                       " iterations (residual norm " + std::to_string(rn) + ")",
                                   w, rn);
        Eigen::PartialPivLU<Matrix> lu(jac(w));
        w -= lu.solve(res);
        res = r(w);
        rn = res.norm();
        ++it;
    }
    if (report) {
        report->iterations = it;
        report->residual_norm = rn;
    }
    return w;
}

Vector solve_lmm_step(const Model& model, const LmmStepContext& ctx, const SolverOptions& opts,
                      NewtonReport* report)
{
    const Vector hist = lmm_history_term(model, ctx);
    const LmmCoeffs& c = ctx.coeffs;
    if (c.beta[0] == 0.0) {
        // residual affine in w with Jacobian alpha_0 I
        Vector w = -hist / c.alpha[0];
        if (report) {
            report->iterations = 0;
            report->residual_norm = residual_with_history(model, ctx, hist, w).norm();
        }
        return w;
    }
    auto res = [&](const Vector& w) { return residual_with_history(model, ctx, hist, w); };
    auto jac = [&](const Vector& w) { return lmm_residual_jacobian(model, ctx, w); };
    return newton_solve(res, jac, ctx.history.front(), opts, report);
}

Vector rk_stage_argument(const RkStageSet& set, int i)
{
    Vector x = set.base_state;
    for (int j = 0; j < set.tableau.s; ++j)
        if (set.tableau.a(i, j) != 0.0)
            x += set.dt * set.tableau.a(i, j) * set.stages[j];
    return x;
}

Vector rk_stage_residual(const Model& model, const RkStageSet& set, int i)
{
    if (i < 0 || i >= set.tableau.s)
        throw Error("rk_stage_residual: stage index out of range");
    if (static_cast<int>(set.stages.size()) != set.tableau.s)
        throw DimensionError("rk_stage_residual: stage count must equal s");
    require_dim(set.base_state.size(), model.dim(), "rk_stage_residual base state");
    return set.stages[i] - model.velocity(rk_stage_argument(set, i), set.t_prev + set.tableau.c(i) * set.dt);
}

RkStepResult solve_rk_step(const Model& model, const Vector& base_state, double t_prev,
                           const ButcherTableau& tableau, double dt, const SolverOptions& opts)
{
    require_dim(base_state.size(), model.dim(), "solve_rk_step");
    const int s = tableau.s;
    const int n = model.dim();
    const SchemeClass cls = classify(tableau);
    RkStageSet set{std::vector<Vector>(s, Vector::Zero(n)), base_state, t_prev, dt, tableau};
    RkStepResult out;

    if (cls.tag != SchemeTag::fully_implicit) {
        Vector guess = model.velocity(base_state, t_prev);
        for (int i = 0; i < s; ++i) {
            Vector known = base_state;
            for (int j = 0; j < i; ++j)
                known += dt * tableau.a(i, j) * set.stages[j];
            const double ti = t_prev + tableau.c(i) * dt;
            const double aii = tableau.a(i, i);
            if (aii == 0.0) {
                set.stages[i] = model.velocity(known, ti);
            } else {
                auto res = [&](const Vector& w) -> Vector { return w - model.velocity(known + dt * aii * w, ti); };
                auto jac = [&](const Vector& w) -> Matrix {
                    return Matrix::Identity(n, n) - dt * aii * model.jacobian(known + dt * aii * w, ti);
                };
                NewtonReport rep;
                set.stages[i] = newton_solve(res, jac, guess, opts, &rep);
                out.iterations += rep.iterations;
            }
            guess = set.stages[i];
        }
    } else {
        // coupled Newton on the stacked s*N system
        auto unpack = [&](const Vector& big) {
            for (int i = 0; i < s; ++i)
                set.stages[i] = big.segment(i * n, n);
        };
        auto res = [&](const Vector& big) -> Vector {
            unpack(big);
            Vector r(s * n);
            for (int i = 0; i < s; ++i)
                r.segment(i * n, n) = rk_stage_residual(model, set, i);
            return r;
        };
        auto jac = [&](const Vector& big) -> Matrix {
            unpack(big);
            Matrix j = Matrix::Identity(s * n, s * n);
            for (int i = 0; i < s; ++i) {
                Matrix ji = model.jacobian(rk_stage_argument(set, i), t_prev + tableau.c(i) * dt);
                for (int e = 0; e < s; ++e)
                    if (tableau.a(i, e) != 0.0)
                        j.block(i * n, e * n, n, n) -= dt * tableau.a(i, e) * ji;
            }
            return j;
        };
        Vector big(s * n);
        const Vector f0 = model.velocity(base_state, t_prev);
        for (int i = 0; i < s; ++i)
            big.segment(i * n, n) = f0;
        NewtonReport rep;
        big = newton_solve(res, jac, big, opts, &rep);
        unpack(big);
        out.iterations = rep.iterations;
    }

    out.next_state = base_state;
    for (int i = 0; i < s; ++i)
        out.next_state += dt * tableau.b(i) * set.stages[i];
    out.stages = std::move(set.stages);
    return out;
}

int step_count(double dt, double T)
{
    if (!(dt > 0.0) || !(T >= 0.0))
        throw Error("step_count: need dt > 0 and T >= 0");
    const double ratio = T / dt;
    const double steps = std::round(ratio);
    if (std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio))
        throw Error("T/dt must be integral (T=" + std::to_string(T) + ", dt=" + std::to_string(dt) + ")");
    return static_cast<int>(steps);
}

Trajectory integrate(const Model& model, const Scheme& scheme, double dt, double T,
                     const SolverOptions& opts, double t0)
{
    opts.validate();
    const int steps = step_count(dt, T);
    Trajectory traj;
    traj.dt = dt;
    traj.t0 = t0;
    traj.kind = TrajectoryKind::full;
    traj.states.reserve(steps + 1);
    traj.states.push_back(model.initial_state());

    for (int n = 1; n <= steps; ++n) {
        try {
            if (const auto* lmm = std::get_if<LmmScheme>(&scheme)) {
                LmmStepContext ctx = make_lmm_context(*lmm, n, dt, traj.states, t0);
                traj.states.push_back(solve_lmm_step(model, ctx, opts));
            } else {
                const auto& tab = std::get<ButcherTableau>(scheme);
                RkStepResult r = solve_rk_step(model, traj.states.back(), traj.time(n - 1), tab, dt, opts);
                traj.states.push_back(std::move(r.next_state));
                traj.stages.push_back(std::move(r.stages));
            }
        } catch (const ConvergenceError& e) {
            throw ConvergenceError(std::string(e.what()) + " at time index " + std::to_string(n),
                                   e.last_iterate, e.residual_norm, n);
        }
    }
    return traj;
}

} // namespace morrow
