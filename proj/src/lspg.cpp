#include "morrow/lspg.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace morrow {

namespace {

void check_rows(const std::vector<int>& rows, int n)
{
    std::set<int> seen;
    for (int r : rows) {
        if (r < 0 || r >= n)
            throw Error("WeightingOperator: sample index " + std::to_string(r) + " outside [0," + std::to_string(n) + ")");
        if (!seen.insert(r).second)
            throw Error("WeightingOperator: duplicate sample index " + std::to_string(r));
    }
    if (rows.empty())
        throw Error("WeightingOperator: empty sample set");
}

Matrix gather_rows(const Matrix& m, const std::vector<int>& rows)
{
    Matrix out(rows.size(), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<long>(i)) = m.row(rows[i]);
    return out;
}

} // namespace

WeightingOperator WeightingOperator::scaled_identity(int n, double gamma)
{
    if (n < 1)
        throw DimensionError("WeightingOperator: dimension must be positive");
    WeightingOperator w;
    w.kind_ = Kind::scaled_identity;
    w.n_ = n;
    w.gamma_ = gamma;
    return w;
}

WeightingOperator WeightingOperator::collocation(int n, std::vector<int> rows)
{
    check_rows(rows, n);
    WeightingOperator w;
    w.kind_ = Kind::collocation;
    w.n_ = n;
    w.rows_ = std::move(rows);
    return w;
}

WeightingOperator WeightingOperator::gappy_pod(std::vector<int> rows, const Matrix& residual_basis)
{
    const int n = static_cast<int>(residual_basis.rows());
    check_rows(rows, n);
    const long q = residual_basis.cols();
    if (static_cast<long>(rows.size()) < q)
        throw RankDeficiencyError("gappy POD weighting: fewer samples than residual basis columns", 0.0);
    Matrix zphi = gather_rows(residual_basis, rows);
    Eigen::JacobiSVD<Matrix> svd(zphi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double smin = s(q - 1);
    if (!(smin > 1e-12 * s(0)))
        throw RankDeficiencyError("gappy POD weighting: sampled residual basis is rank deficient (smallest singular value " +
                                      std::to_string(smin) + ")",
                                  smin);
    WeightingOperator w;
    w.kind_ = Kind::gappy_pod;
    w.n_ = n;
    w.rows_ = std::move(rows);
    w.mat_ = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
    return w;
}

WeightingOperator WeightingOperator::dense(Matrix m)
{
    if (m.rows() < 1 || m.cols() < 1)
        throw DimensionError("WeightingOperator: empty dense matrix");
    WeightingOperator w;
    w.kind_ = Kind::dense;
    w.n_ = static_cast<int>(m.cols());
    w.mat_ = std::move(m);
    return w;
}

int WeightingOperator::rows() const
{
    switch (kind_) {
    case Kind::scaled_identity: return n_;
    case Kind::collocation: return static_cast<int>(rows_.size());
    case Kind::gappy_pod:
    case Kind::dense: return static_cast<int>(mat_.rows());
    }
    return 0;
}

Matrix WeightingOperator::apply(const Matrix& m) const
{
    require_dim(m.rows(), n_, "WeightingOperator::apply");
    switch (kind_) {
    case Kind::scaled_identity: return gamma_ * m;
    case Kind::collocation: return gather_rows(m, rows_);
    case Kind::gappy_pod: return mat_ * gather_rows(m, rows_);
    case Kind::dense: return mat_ * m;
    }
    return m;
}

Vector WeightingOperator::apply(const Vector& v) const
{
    return apply(Matrix(v)).col(0);
}

Matrix WeightingOperator::apply_transpose(const Matrix& z) const
{
    require_dim(z.rows(), rows(), "WeightingOperator::apply_transpose");
    switch (kind_) {
    case Kind::scaled_identity: return gamma_ * z;
    case Kind::dense: return mat_.transpose() * z;
    case Kind::collocation:
    case Kind::gappy_pod: {
        Matrix sampled = kind_ == Kind::gappy_pod ? Matrix(mat_.transpose() * z) : z;
        Matrix out = Matrix::Zero(n_, z.cols());
        for (std::size_t i = 0; i < rows_.size(); ++i)
            out.row(rows_[i]) = sampled.row(static_cast<long>(i));
        return out;
    }
    }
    return z;
}

Vector WeightingOperator::apply_transpose(const Vector& z) const
{
    return apply_transpose(Matrix(z)).col(0);
}

Matrix WeightingOperator::to_dense() const
{
    return apply(Matrix(Matrix::Identity(n_, n_)));
}

const char* to_string(WeightingOperator::Kind k)
{
    switch (k) {
    case WeightingOperator::Kind::scaled_identity: return "scaled_identity";
    case WeightingOperator::Kind::collocation: return "collocation";
    case WeightingOperator::Kind::gappy_pod: return "gappy_pod";
    case WeightingOperator::Kind::dense: return "dense";
    }
    return "?";
}

namespace {

Vector weigh(const WeightingOperator& w, const Vector& r, int blocks)
{
    if (blocks == 1)
        return w.apply(r);
    const int n = w.cols(), z = w.rows();
    Vector out(blocks * z);
    for (int b = 0; b < blocks; ++b)
        out.segment(b * z, z) = w.apply(Vector(r.segment(b * n, n)));
    return out;
}

Matrix weigh(const WeightingOperator& w, const Matrix& m, int blocks)
{
    if (blocks == 1)
        return w.apply(m);
    const int n = w.cols(), z = w.rows();
    Matrix out(blocks * z, m.cols());
    for (int b = 0; b < blocks; ++b)
        out.middleRows(b * z, z) = w.apply(Matrix(m.middleRows(b * n, n)));
    return out;
}

} // namespace

Vector gauss_newton(const LeastSquaresProblem& prob, const WeightingOperator& w, Vector y0,
                    const SolverOptions& opts, GaussNewtonReport& report, const ResidualObserver& observer)
{
    constexpr double armijo_c = 1e-4;
    constexpr int max_backtracks = 30;

    Vector y = std::move(y0);
    Vector r = prob.residual(y);
    Vector wr = weigh(w, r, prob.blocks);
    double phi = wr.squaredNorm();
    report = GaussNewtonReport{};
    report.objective.push_back(phi);

    double tol = 0.0;
    bool stagnated = false;
    for (;;) {
        const Matrix jw = weigh(w, prob.jacobian(y), prob.blocks);
        const Vector g = jw.transpose() * wr;
        const double gn = g.norm();
        report.grad_norm = gn;
        if (report.iterations == 0)
            tol = std::max(opts.newton_abs_tol, opts.newton_rel_tol * gn);
        if (gn <= tol || stagnated) {
            report.converged = true;
            break;
        }
        if (report.iterations == opts.max_iters || !std::isfinite(phi))
            break;
        Eigen::ColPivHouseholderQR<Matrix> qr(jw);
        qr.setThreshold(1e-13);
        if (qr.rank() < jw.cols()) {
            Eigen::JacobiSVD<Matrix> svd(jw);
            const double smin = svd.singularValues()(svd.singularValues().size() - 1);
            throw RankDeficiencyError("Gauss-Newton: weighted Jacobian is rank deficient (smallest singular value " +
                                          std::to_string(smin) + ")",
                                      smin);
        }
        const Vector step = qr.solve(Vector(-wr));
        const double slope = g.dot(step);  // derivative of phi/2 along step
        if (step.norm() <= opts.stagnation_tol * (1.0 + y.norm()) || !(slope < 0.0)) {
            report.converged = true;
            break;
        }
        if (observer)
            observer(r);

        double alpha = 1.0;
        Vector y_new, r_new, wr_new;
        double phi_new = phi;
        bool accepted = false;
        for (int bt = 0; bt <= max_backtracks; ++bt) {
            y_new = y + alpha * step;
            r_new = prob.residual(y_new);
            wr_new = weigh(w, r_new, prob.blocks);
            phi_new = wr_new.squaredNorm();
            if (!opts.line_search || phi_new <= phi + 2.0 * armijo_c * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted)
            throw ConvergenceError("Gauss-Newton line search failed after 30 backtracks", y, std::sqrt(phi));
        stagnated = alpha * step.norm() <= opts.stagnation_tol * (1.0 + y.norm());
        y = std::move(y_new);
        r = std::move(r_new);
        wr = std::move(wr_new);
        phi = phi_new;
        report.objective.push_back(phi);
        ++report.iterations;
    }
    if (!report.converged)
        throw ConvergenceError("Gauss-Newton failed to converge after " + std::to_string(report.iterations) +
                                   " iterations (gradient norm " + std::to_string(report.grad_norm) + ")",
                               y, std::sqrt(phi));
    return y;
}

LmmStepContext lifted_lmm_context(const LmmScheme& scheme, int n, double dt, const TrialSubspace& sub,
                                  const std::vector<Vector>& rom_states, double t0)
{
    LmmStepContext ctx;
    ctx.coeffs = scheme.coeffs(n);
    ctx.n = n;
    ctx.dt = dt;
    ctx.t0 = t0;
    const int k = ctx.coeffs.k();
    if (static_cast<int>(rom_states.size()) < n || n < k)
        throw Error("lifted_lmm_context: not enough history for step " + std::to_string(n));
    for (int j = 1; j <= k; ++j)
        ctx.history.push_back(reconstruct(sub, rom_states[n - j]));
    return ctx;
}

double lspg_objective(const Model& model, const TrialSubspace& sub, const WeightingOperator& w,
                      const LmmStepContext& ctx, const Vector& yhat)
{
    return w.apply(lmm_residual(model, ctx, reconstruct(sub, yhat))).squaredNorm();
}

LspgStepResult solve_lspg_step_lmm(const Model& model, const TrialSubspace& sub, const WeightingOperator& w,
                                   const LmmStepContext& ctx, const SolverOptions& opts, const Vector& guess,
                                   const ResidualObserver& observer)
{
    require_dim(w.cols(), model.dim(), "solve_lspg_step_lmm weighting");
    const Matrix& phi = sub.basis();
    const Vector hist = lmm_history_term(model, ctx);
    const double a0 = ctx.coeffs.alpha[0], b0 = ctx.coeffs.beta[0];
    const double tn = ctx.time(ctx.n);
    LeastSquaresProblem prob;
    prob.residual = [&](const Vector& y) -> Vector {
        const Vector x = reconstruct(sub, y);
        Vector r = a0 * x + hist;
        if (b0 != 0.0)
            r -= ctx.dt * b0 * model.velocity(x, tn);
        return r;
    };
    prob.jacobian = [&](const Vector& y) -> Matrix {
        Matrix j = a0 * phi;
        if (b0 != 0.0)
            j -= ctx.dt * b0 * (model.jacobian(reconstruct(sub, y), tn) * phi);
        return j;
    };
    LspgStepResult out;
    Vector y0 = guess.size() ? guess : Vector(Vector::Zero(sub.reduced_dim()));
    out.yhat = gauss_newton(prob, w, std::move(y0), opts, out.report, observer);
    return out;
}

Matrix compute_test_basis(const Model& model, const TrialSubspace& sub, const WeightingOperator& w,
                          const LmmStepContext& ctx, const Vector& yhat)
{
    const Matrix jphi = lmm_residual_jacobian(model, ctx, reconstruct(sub, yhat)) * sub.basis();
    return w.apply_transpose(w.apply(jphi));
}

Vector lspg_stage_argument(const TrialSubspace& sub, const LspgStageContext& ctx, const Vector& yhat)
{
    Vector x = ctx.base_state;
    for (int j = 0; j < ctx.i; ++j)
        if (ctx.tableau.a(ctx.i, j) != 0.0)
            x += ctx.dt * ctx.tableau.a(ctx.i, j) * (sub.basis() * ctx.prev_stages[j]);
    const double aii = ctx.tableau.a(ctx.i, ctx.i);
    if (aii != 0.0)
        x += ctx.dt * aii * (sub.basis() * yhat);
    return x;
}

LspgStepResult solve_lspg_rk_stage(const Model& model, const TrialSubspace& sub, const WeightingOperator& w,
                                   const LspgStageContext& ctx, const SolverOptions& opts, const Vector& guess,
                                   const ResidualObserver& observer)
{
    if (classify(ctx.tableau).tag == SchemeTag::fully_implicit)
        throw HypothesisError("solve_lspg_rk_stage: tableau must be explicit or diagonally implicit");
    if (static_cast<int>(ctx.prev_stages.size()) < ctx.i)
        throw DimensionError("solve_lspg_rk_stage: missing earlier stages");
    const Matrix& phi = sub.basis();
    const double aii = ctx.tableau.a(ctx.i, ctx.i);
    const double ti = ctx.t_prev + ctx.tableau.c(ctx.i) * ctx.dt;
    LeastSquaresProblem prob;
    prob.residual = [&](const Vector& y) -> Vector {
        return phi * y - model.velocity(lspg_stage_argument(sub, ctx, y), ti);
    };
    prob.jacobian = [&](const Vector& y) -> Matrix {
        if (aii == 0.0)
            return phi;
        return phi - ctx.dt * aii * (model.jacobian(lspg_stage_argument(sub, ctx, y), ti) * phi);
    };
    LspgStepResult out;
    Vector y0 = guess.size() ? guess : Vector(phi.transpose() * model.velocity(ctx.base_state, ctx.t_prev));
    out.yhat = gauss_newton(prob, w, std::move(y0), opts, out.report, observer);
    return out;
}

Vector rom_stage_argument(const TrialSubspace& sub, const Vector& base_state, const std::vector<Vector>& stages,
                          const ButcherTableau& tableau, double dt, int i)
{
    Vector x = base_state;
    for (int j = 0; j < tableau.s; ++j)
        if (tableau.a(i, j) != 0.0)
            x += dt * tableau.a(i, j) * (sub.basis() * stages[j]);
    return x;
}

LspgCoupledResult solve_lspg_rk_coupled(const Model& model, const TrialSubspace& sub, const WeightingOperator& w,
                                        const Vector& base_state, double t_prev, const ButcherTableau& tableau,
                                        double dt, const SolverOptions& opts, const ResidualObserver& observer)
{
    const int s = tableau.s, n = model.dim(), p = sub.reduced_dim();
    const Matrix& phi = sub.basis();
    auto unpack = [&](const Vector& big) {
        std::vector<Vector> st(s);
        for (int i = 0; i < s; ++i)
            st[i] = big.segment(i * p, p);
        return st;
    };
    LeastSquaresProblem prob;
    prob.blocks = s;
    prob.residual = [&](const Vector& big) -> Vector {
        const auto st = unpack(big);
        Vector r(s * n);
        for (int i = 0; i < s; ++i)
            r.segment(i * n, n) = phi * st[i] - model.velocity(rom_stage_argument(sub, base_state, st, tableau, dt, i),
                                                               t_prev + tableau.c(i) * dt);
        return r;
    };
    prob.jacobian = [&](const Vector& big) -> Matrix {
        const auto st = unpack(big);
        Matrix j = Matrix::Zero(s * n, s * p);
        for (int i = 0; i < s; ++i) {
            const Matrix jphi = model.jacobian(rom_stage_argument(sub, base_state, st, tableau, dt, i),
                                               t_prev + tableau.c(i) * dt) * phi;
            for (int e = 0; e < s; ++e) {
                if (i == e)
                    j.block(i * n, e * p, n, p) += phi;
                if (tableau.a(i, e) != 0.0)
                    j.block(i * n, e * p, n, p) -= dt * tableau.a(i, e) * jphi;
            }
        }
        return j;
    };
    Vector big(s * p);
    const Vector g0 = phi.transpose() * model.velocity(base_state, t_prev);
    for (int i = 0; i < s; ++i)
        big.segment(i * p, p) = g0;
    LspgCoupledResult out;
    big = gauss_newton(prob, w, big, opts, out.report, observer);
    out.stages = unpack(big);
    return out;
}

Matrix rk_stage_test_basis(const Model& model, const TrialSubspace& sub, const WeightingOperator& w,
                           const Vector& base_state, const std::vector<Vector>& stages, const ButcherTableau& tableau,
                           double t_prev, double dt, int i, int e)
{
    const Matrix& phi = sub.basis();
    Matrix d = Matrix::Zero(phi.rows(), phi.cols());
    if (i == e)
        d += phi;
    if (tableau.a(i, e) != 0.0)
        d -= dt * tableau.a(i, e) *
             (model.jacobian(rom_stage_argument(sub, base_state, stages, tableau, dt, i), t_prev + tableau.c(i) * dt) * phi);
    return w.apply_transpose(w.apply(d));
}

namespace {

void merge_report(GaussNewtonReport& into, const GaussNewtonReport& stage, bool first)
{
    into.iterations += stage.iterations;
    into.converged = first ? stage.converged : (into.converged && stage.converged);
    into.grad_norm = std::max(into.grad_norm, stage.grad_norm);
    into.objective.insert(into.objective.end(), stage.objective.begin(), stage.objective.end());
}

} // namespace

LspgResult integrate_lspg(const Model& model, const TrialSubspace& sub, const WeightingOperator& w,
                          const Scheme& scheme, double dt, double T, const SolverOptions& opts, RkLspgMode mode,
                          const ResidualObserver& observer)
{
    opts.validate();
    require_dim(sub.full_dim(), model.dim(), "integrate_lspg");
    const int steps = step_count(dt, T);
    const int p = sub.reduced_dim();
    LspgResult res;
    Trajectory& traj = res.traj;
    traj.dt = dt;
    traj.kind = TrajectoryKind::lspg;
    traj.states.push_back(Vector::Zero(p));

    for (int n = 1; n <= steps; ++n) {
        try {
            if (const auto* lmm = std::get_if<LmmScheme>(&scheme)) {
                const LmmStepContext ctx = lifted_lmm_context(*lmm, n, dt, sub, traj.states);
                LspgStepResult r = solve_lspg_step_lmm(model, sub, w, ctx, opts, traj.states.back(), observer);
                traj.states.push_back(std::move(r.yhat));
                res.reports.push_back(std::move(r.report));
                continue;
            }
            const auto& tab = std::get<ButcherTableau>(scheme);
            const bool coupled = mode == RkLspgMode::coupled ||
                                 (mode == RkLspgMode::automatic && classify(tab).tag == SchemeTag::fully_implicit);
            const Vector base = reconstruct(sub, traj.states.back());
            const double t_prev = traj.time(n - 1);
            std::vector<Vector> stages;
            GaussNewtonReport merged;
            if (coupled) {
                LspgCoupledResult r = solve_lspg_rk_coupled(model, sub, w, base, t_prev, tab, dt, opts, observer);
                stages = std::move(r.stages);
                merged = std::move(r.report);
            } else {
                LspgStageContext ctx{base, {}, 0, t_prev, dt, tab};
                for (int i = 0; i < tab.s; ++i) {
                    ctx.i = i;
                    const Vector guess = i == 0 ? Vector() : stages.back();
                    LspgStepResult r = solve_lspg_rk_stage(model, sub, w, ctx, opts, guess, observer);
                    merge_report(merged, r.report, i == 0);
                    stages.push_back(r.yhat);
                    ctx.prev_stages.push_back(std::move(r.yhat));
                }
            }
            Vector next = traj.states.back();
            for (int i = 0; i < tab.s; ++i)
                next += dt * tab.b(i) * stages[i];
            traj.states.push_back(std::move(next));
            traj.stages.push_back(std::move(stages));
            res.reports.push_back(std::move(merged));
        } catch (const ConvergenceError& e) {
            throw ConvergenceError(std::string(e.what()) + " at time index " + std::to_string(n), e.last_iterate,
                                   e.residual_norm, n);
        }
    }
    return res;
}

} // namespace morrow
