#include "morrow/bounds.hpp"
#include "morrow/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace morrow {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();
const char* kappa_note = "valid modulo kappa under-estimation (kappa is a sampled local estimate)";

double spectral_norm(const Matrix& m)
{
    if (m.size() == 0)
        return 0.0;
    Eigen::BDCSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

std::vector<Vector> lifted_velocities(const Model& model, const TrialSubspace& sub, const Trajectory& rom)
{
    std::vector<Vector> f;
    f.reserve(rom.states.size());
    for (int j = 0; j <= rom.num_steps(); ++j)
        f.push_back(model.velocity(reconstruct(sub, rom.states[j]), rom.time(j)));
    return f;
}

double orthogonal_residual(const Matrix& phi, const Vector& v)
{
    return (v - phi * (phi.transpose() * v)).norm();
}

// (Psi^T Phi)^{-1} Psi^T v mapped back through Phi, with a singularity check
class ObliqueProjector {
public:
    ObliqueProjector(const Matrix& phi, const Matrix& psi) : phi_(phi), psi_(psi), lu_(psi.transpose() * phi)
    {
        Eigen::JacobiSVD<Matrix> svd(psi.transpose() * phi);
        const Vector& s = svd.singularValues();
        if (!(s(s.size() - 1) > 1e-13 * s(0)))
            throw HypothesisError("test basis product Psi^T Phi is singular");
    }
    Vector apply(const Vector& v) const { return phi_ * lu_.solve(Vector(psi_.transpose() * v)); }
    Vector complement(const Vector& v) const { return v - apply(v); }
    // Phi (Psi^T Phi)^{-1} z for z in R^p
    Vector lift(const Vector& z) const { return phi_ * lu_.solve(z); }
    double norm() const { return spectral_norm(lu_.solve(Matrix(psi_.transpose()))); }

private:
    const Matrix& phi_;
    Matrix psi_;
    Eigen::PartialPivLU<Matrix> lu_;
};

void check_lspg(const Trajectory& rom, const WeightingOperator* w)
{
    if (rom.kind == TrajectoryKind::lspg && !w)
        throw Error("LSPG bounds need the weighting operator of the run");
    if (rom.kind == TrajectoryKind::full)
        throw Error("bounds expect a ROM trajectory");
}

void fill_recursion_report(BoundReport& rep, const LmmLocalTerms& t, const std::vector<double>& b)
{
    const std::vector<double> src = t.source();
    for (int m = 1; m <= t.steps(); ++m) {
        rep.term_projection.push_back(t.proj[m - 1][0]);
        rep.coeff.push_back(t.gamma1[m - 1][0]);
        rep.local_bound.push_back(src[m - 1]);
        rep.per_step_bound.push_back(b[m]);
    }
    rep.global_bound = b.back();
}

} // namespace

double expm1_ratio(double x)
{
    return std::abs(x) < 1e-300 ? 1.0 : std::expm1(x) / x;
}

const char* to_string(BoundMode m)
{
    switch (m) {
    case BoundMode::aposteriori: return "aposteriori";
    case BoundMode::apriori: return "apriori";
    case BoundMode::simplified: return "simplified";
    case BoundMode::timestep_independent: return "timestep_independent";
    case BoundMode::residual_form: return "residual_form";
    }
    return "?";
}

LipschitzEstimate estimate_lipschitz(const Model& model, const std::vector<Vector>& samples,
                                     const std::vector<double>& times)
{
    if (samples.size() < 2)
        throw Error("estimate_lipschitz: need at least two samples");
    if (times.size() != samples.size())
        throw DimensionError("estimate_lipschitz: one time per sample required");
    LipschitzEstimate est;
    est.samples = static_cast<int>(samples.size());
    std::vector<Vector> f;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        f.push_back(model.velocity(samples[i], times[i]));
        est.jacobian_max = std::max(est.jacobian_max, spectral_norm(model.jacobian(samples[i], times[i])));
    }
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            const double dx = (samples[i] - samples[j]).norm();
            if (dx == 0.0)
                continue;
            // compare both states at the first sample's time
            const Vector fj = times[j] == times[i] ? f[j] : model.velocity(samples[j], times[i]);
            est.secant_max = std::max(est.secant_max, (f[i] - fj).norm() / dx);
        }
    est.kappa = std::max(est.secant_max, est.jacobian_max);
    return est;
}

std::vector<double> LmmLocalTerms::source() const
{
    std::vector<double> s(steps(), 0.0);
    for (int m = 0; m < steps(); ++m)
        for (std::size_t l = 0; l < proj[m].size(); ++l)
            s[m] += gamma1[m][l] * proj[m][l];
    return s;
}

void fill_coefficients(LmmLocalTerms& t)
{
    const int n = t.steps();
    if (static_cast<int>(t.proj.size()) != n)
        throw DimensionError("LmmLocalTerms: one projection row per step required");
    if (t.projector_norm.empty())
        t.projector_norm.assign(n, 1.0);
    t.h.assign(n, 0.0);
    t.gamma1.assign(n, {});
    t.gamma2.assign(n, {});
    for (int m = 0; m < n; ++m) {
        const LmmCoeffs& c = t.coeffs[m];
        const double scale = t.kappa * t.dt * t.projector_norm[m];
        const double h = std::abs(c.alpha[0]) - std::abs(c.beta[0]) * scale;
        if (!(h > 0.0))
            throw HypothesisError("time-step condition dt < |alpha_0| / (|beta_0| kappa" +
                                  std::string(t.apriori && t.kind == TrajectoryKind::lspg ? " ||P||" : "") +
                                  ") violated at step " + std::to_string(m + 1));
        t.h[m] = h;
        const int k = c.k();
        t.gamma1[m].assign(k + 1, 0.0);
        t.gamma2[m].assign(k + 1, 0.0);
        for (int l = 0; l <= k; ++l) {
            t.gamma1[m][l] = std::abs(c.beta[l]) * t.dt / h;
            if (l >= 1)
                t.gamma2[m][l] = (std::abs(c.alpha[l]) + std::abs(c.beta[l]) * scale) / h;
        }
        if (static_cast<int>(t.proj[m].size()) != k + 1)
            throw DimensionError("LmmLocalTerms: projection row length must be k+1");
    }
}

Matrix oblique_projector(const Matrix& phi, const Matrix& psi)
{
    Matrix m = psi.transpose() * phi;
    return phi * m.partialPivLu().solve(Matrix(psi.transpose()));
}

double oblique_projector_norm(const Matrix& phi, const Matrix& psi)
{
    return ObliqueProjector(phi, psi).norm();
}

LmmLocalTerms local_aposteriori_lmm(const Trajectory& rom, const Model& model, const TrialSubspace& sub,
                                    const LmmScheme& scheme, double kappa, const WeightingOperator* w)
{
    check_lspg(rom, w);
    LmmLocalTerms t;
    t.kind = rom.kind;
    t.dt = rom.dt;
    t.kappa = kappa;
    t.k = scheme.k();
    const Matrix& phi = sub.basis();
    const std::vector<Vector> f = lifted_velocities(model, sub, rom);
    std::vector<double> orth;
    if (rom.kind == TrajectoryKind::galerkin)
        for (const auto& v : f)
            orth.push_back(orthogonal_residual(phi, v));

    for (int m = 1; m <= rom.num_steps(); ++m) {
        const LmmStepContext ctx = lifted_lmm_context(scheme, m, rom.dt, sub, rom.states, rom.t0);
        const int k = ctx.coeffs.k();
        std::vector<double> row(k + 1);
        if (rom.kind == TrajectoryKind::galerkin) {
            for (int l = 0; l <= k; ++l)
                row[l] = orth[m - l];
        } else {
            const ObliqueProjector proj(phi, compute_test_basis(model, sub, *w, ctx, rom.states[m]));
            for (int l = 0; l <= k; ++l)
                row[l] = proj.complement(f[m - l]).norm();
        }
        t.coeffs.push_back(ctx.coeffs);
        t.proj.push_back(std::move(row));
        t.residual_norm.push_back(lmm_residual(model, ctx, reconstruct(sub, rom.states[m])).norm());
    }
    fill_coefficients(t);
    return t;
}

LmmLocalTerms local_apriori_lmm(const Trajectory& fom, const Trajectory& rom, const Model& model,
                                const TrialSubspace& sub, const LmmScheme& scheme, double kappa,
                                const WeightingOperator* w)
{
    check_lspg(rom, w);
    if (fom.num_steps() != rom.num_steps() || fom.dt != rom.dt)
        throw Error("a priori bounds need a FOM trajectory on the ROM time grid");
    LmmLocalTerms t;
    t.kind = rom.kind;
    t.apriori = true;
    t.dt = rom.dt;
    t.kappa = kappa;
    t.k = scheme.k();
    const Matrix& phi = sub.basis();
    std::vector<Vector> f;
    for (int j = 0; j <= fom.num_steps(); ++j)
        f.push_back(model.velocity(fom.states[j], fom.time(j)));

    for (int m = 1; m <= rom.num_steps(); ++m) {
        const LmmCoeffs& c = scheme.coeffs(m);
        const int k = c.k();
        std::vector<double> row(k + 1);
        double pn = 1.0;
        if (rom.kind == TrajectoryKind::galerkin) {
            for (int l = 0; l <= k; ++l)
                row[l] = orthogonal_residual(phi, f[m - l]);
        } else {
            const LmmStepContext ctx = lifted_lmm_context(scheme, m, rom.dt, sub, rom.states, rom.t0);
            const ObliqueProjector proj(phi, compute_test_basis(model, sub, *w, ctx, rom.states[m]));
            pn = proj.norm();
            for (int l = 0; l <= k; ++l)
                row[l] = proj.complement(f[m - l]).norm();
        }
        t.coeffs.push_back(c);
        t.proj.push_back(std::move(row));
        t.projector_norm.push_back(pn);
    }
    fill_coefficients(t);
    return t;
}

std::vector<double> local_bound_with_errors(const LmmLocalTerms& t, const std::vector<double>& errors)
{
    if (static_cast<int>(errors.size()) < t.steps() + 1)
        throw DimensionError("local_bound_with_errors: need errors for states 0..n");
    std::vector<double> out = t.source();
    for (int m = 1; m <= t.steps(); ++m)
        for (std::size_t l = 1; l < t.gamma2[m - 1].size(); ++l)
            out[m - 1] += t.gamma2[m - 1][l] * errors[m - l];
    return out;
}

BoundReport global_aposteriori_lmm(const LmmLocalTerms& t)
{
    if (t.gamma1.size() != t.proj.size())
        throw Error("global_aposteriori_lmm: coefficients missing (call fill_coefficients)");
    BoundReport rep;
    rep.mode = t.apriori ? BoundMode::apriori : BoundMode::aposteriori;
    rep.kind = t.kind;
    rep.kappa = t.kappa;
    rep.dt = t.dt;
    rep.notes.push_back(kappa_note);
    const std::vector<double> src = t.source();
    std::vector<double> b(t.steps() + 1, 0.0);
    for (int m = 1; m <= t.steps(); ++m) {
        double v = src[m - 1];
        for (std::size_t l = 1; l < t.gamma2[m - 1].size(); ++l)
            v += t.gamma2[m - 1][l] * b[m - l];
        b[m] = v;
    }
    fill_recursion_report(rep, t, b);
    return rep;
}

BoundReport simplified_global_bounds(const LmmLocalTerms& t, BoundMode mode, double eps)
{
    if (mode == BoundMode::aposteriori || mode == BoundMode::apriori)
        throw Error("simplified_global_bounds: mode must be simplified, timestep_independent or residual_form");
    if (!(eps > 0.0 && eps < 1.0))
        throw HypothesisError("simplified bounds require 0 < eps < 1");
    if (mode == BoundMode::residual_form) {
        if (t.apriori)
            throw HypothesisError("residual form applies to a posteriori terms only");
        for (int m = 0; m < t.steps(); ++m)
            for (int l = 1; l <= t.coeffs[m].k(); ++l)
                if (t.coeffs[m].beta[l] != 0.0)
                    throw HypothesisError("residual form requires beta_j = 0 for j >= 1 (violated at step " +
                                          std::to_string(m + 1) + ")");
    }
    BoundReport rep;
    rep.mode = mode;
    rep.kind = t.kind;
    rep.kappa = t.kappa;
    rep.dt = t.dt;
    rep.eps = eps;
    rep.notes.push_back(kappa_note);
    if (t.apriori)
        rep.notes.push_back("a priori terms evaluated at FOM states");

    const double kdt = t.kappa * t.dt;
    const int k = t.k;
    double h0_min = std::numeric_limits<double>::infinity();
    double g_max = -1.0;
    double a0s = 0, b0s = 0, p0s = 1, as = 0, bs = 0, ps = 1, bmax = 0;
    int ell_star = 0;
    std::vector<double> running_max(k + 1, 0.0);  // max_j proj[j][l] so far
    double residual_max = 0.0;
    const std::vector<double> src = t.source();

    for (int m = 1; m <= t.steps(); ++m) {
        const LmmCoeffs& c = t.coeffs[m - 1];
        const double pn = t.projector_norm[m - 1];
        const double h0 = std::abs(c.alpha[0]) - std::abs(c.beta[0]) * kdt * pn;
        if (h0 < h0_min) {
            h0_min = h0;
            a0s = std::abs(c.alpha[0]);
            b0s = std::abs(c.beta[0]);
            p0s = pn;
        }
        for (int l = 1; l <= c.k(); ++l) {
            const double g = std::abs(c.alpha[l]) + std::abs(c.beta[l]) * kdt * pn;
            if (g > g_max) {
                g_max = g;
                as = std::abs(c.alpha[l]);
                bs = std::abs(c.beta[l]);
                ps = pn;
            }
        }
        for (int l = 0; l <= c.k(); ++l)
            bmax = std::max(bmax, std::abs(c.beta[l]));
        // argmax over l of gamma1 * proj, lowest index on ties
        int lstar = 0;
        double best = -1.0;
        for (int l = 0; l <= c.k(); ++l) {
            const double v = t.gamma1[m - 1][l] * t.proj[m - 1][l];
            if (v > best) {
                best = v;
                lstar = l;
            }
        }
        ell_star = std::max(ell_star, lstar);
        for (int l = 0; l <= c.k(); ++l)
            running_max[l] = std::max(running_max[l], t.proj[m - 1][l]);
        if (mode == BoundMode::residual_form)
            residual_max = std::max(residual_max, bmax / std::abs(c.beta[0]) * t.residual_norm[m - 1]);

        if (as == 0.0 || a0s == 0.0)
            throw HypothesisError("simplified bounds need nonzero starred alpha coefficients");
        if (t.kappa * b0s * p0s > 0.0 && t.dt > a0s * (1.0 - eps) / (t.kappa * b0s * p0s) * (1.0 + 1e-12))
            throw HypothesisError("time-step cap dt <= |alpha_0*| (1 - eps) / (kappa |beta_0*|) violated at step " +
                                  std::to_string(m));
        const bool independent = std::abs(k * as - a0s) <= 1e-12 * a0s;
        if (mode == BoundMode::timestep_independent && !independent)
            throw HypothesisError("time-step-independent bound requires k |alpha*| = |alpha_0*|");

        const double tn = m * t.dt;
        const double rate = bs * ps / as + b0s * p0s / a0s;
        const double x = tn * t.kappa * rate / eps;
        const double bsum = k * bs * ps + b0s * p0s;
        double coeff = 0.0;
        if (independent) {
            // (exp(x) - 1) / (bsum kappa) written through expm1(x)/x so kappa -> 0 stays finite
            const double core = bsum > 0.0 ? expm1_ratio(x) * tn * rate / (eps * bsum) : 0.0;
            coeff = mode == BoundMode::residual_form ? (k + 1) * core / t.dt : (k + 1) * bmax * core;
        } else {
            const double ratio = std::pow(k * as / a0s, m);
            const double denom = (k * as - a0s) + bsum * kdt;
            const double core = ratio * std::expm1(x) / denom;
            coeff = mode == BoundMode::residual_form ? (k + 1) * core : (k + 1) * bmax * t.dt * core;
        }
        double term = 0.0;
        if (mode == BoundMode::residual_form) {
            term = residual_max;
        } else {
            for (int l = 0; l <= std::min(ell_star, k); ++l)
                term = std::max(term, running_max[l]);
        }
        rep.term_projection.push_back(term);
        rep.coeff.push_back(coeff);
        rep.local_bound.push_back(src[m - 1]);
        rep.per_step_bound.push_back(coeff * term);
    }
    rep.global_bound = rep.per_step_bound.empty() ? 0.0 : rep.per_step_bound.back();
    rep.alpha0_star = a0s;
    rep.beta0_star = b0s;
    rep.alpha_star = as;
    rep.beta_star = bs;
    rep.beta_max = bmax;
    rep.projector_norm0_star = p0s;
    rep.projector_norm_star = ps;
    rep.ell_star = ell_star;
    if (t.steps() > 0 && std::abs(k * as - a0s) > 1e-12 * a0s)
        rep.notes.push_back("closed form evaluated as stated; it is not a guaranteed bound when k|alpha*| != |alpha_0*|");
    return rep;
}

BoundReport backward_euler_aposteriori(const Trajectory& rom, const Model& model, const TrialSubspace& sub,
                                       double kappa, const WeightingOperator* w)
{
    check_lspg(rom, w);
    const double dt = rom.dt;
    const double h = 1.0 - kappa * dt;
    if (!(h > 0.0))
        throw HypothesisError("backward Euler bound requires dt < 1/kappa");
    const Matrix& phi = sub.basis();
    const LmmScheme be = make_lmm("backward_euler");
    std::vector<double> term(rom.num_steps() + 1, 0.0);
    for (int m = 1; m <= rom.num_steps(); ++m) {
        const Vector f = model.velocity(reconstruct(sub, rom.states[m]), rom.time(m));
        if (rom.kind == TrajectoryKind::galerkin) {
            term[m] = orthogonal_residual(phi, f);
        } else {
            const LmmStepContext ctx = lifted_lmm_context(be, m, dt, sub, rom.states, rom.t0);
            term[m] = ObliqueProjector(phi, compute_test_basis(model, sub, *w, ctx, rom.states[m])).complement(f).norm();
        }
    }
    BoundReport rep;
    rep.mode = BoundMode::aposteriori;
    rep.kind = rom.kind;
    rep.kappa = kappa;
    rep.dt = dt;
    rep.notes.push_back(kappa_note);
    for (int n = 1; n <= rom.num_steps(); ++n) {
        double sum = 0.0;
        for (int j = 0; j <= n - 1; ++j)
            sum += term[n - j] / std::pow(h, j + 1);
        rep.term_projection.push_back(term[n]);
        rep.coeff.push_back(dt / h);
        rep.local_bound.push_back(dt / h * term[n]);
        rep.per_step_bound.push_back(dt * sum);
    }
    rep.global_bound = rep.per_step_bound.empty() ? 0.0 : rep.per_step_bound.back();
    return rep;
}

AuxiliaryIncrementReport auxiliary_increment_bound(const Model& model, const Trajectory& lspg, const TrialSubspace& sub,
                                                   double dt, double kappa, const SolverOptions& opts)
{
    const double h = 1.0 - kappa * dt;
    if (!(h > 0.0))
        throw HypothesisError("auxiliary-increment bound requires dt < 1/kappa");
    if (std::abs(lspg.dt - dt) > 1e-15 * dt)
        throw Error("auxiliary_increment_bound: trajectory time step does not match dt");
    const Matrix& phi = sub.basis();
    const Vector& x0 = sub.reference();
    const LmmScheme be = make_lmm("backward_euler");
    AuxiliaryIncrementReport rep;
    rep.dt = dt;
    rep.kappa = kappa;
    rep.h = h;
    const int n = lspg.num_steps();
    for (int j = 1; j <= n; ++j) {
        // backward-Euler step in the full space started from the lifted ROM state j-1
        const Vector prev = reconstruct(sub, lspg.states[j - 1]);
        LmmStepContext ctx{be.coeffs(1), {prev}, j, dt, lspg.t0};
        Vector xfull;
        try {
            xfull = solve_lmm_step(model, ctx, opts);
        } catch (const ConvergenceError& e) {
            throw ConvergenceError(std::string("auxiliary step: ") + e.what() + " at step " + std::to_string(j),
                                   e.last_iterate, e.residual_norm, j);
        }
        const Vector xbar = xfull - x0;
        const Vector prev_c = phi * lspg.states[j - 1];
        const Vector dxbar = xbar - prev_c;
        const Vector dyphi = phi * (lspg.states[j] - lspg.states[j - 1]);
        const double mu = (dyphi - dxbar).norm();
        const double inc = dxbar.norm();
        const bool degenerate = !(inc > std::numeric_limits<double>::min());
        rep.mu.push_back(mu);
        rep.mu_bar.push_back(degenerate ? 0.0 : mu / inc);
        rep.degenerate.push_back(degenerate ? 1 : 0);
        rep.f_norm.push_back(model.velocity(xfull, lspg.time(j)).norm());
        rep.aux_states.push_back(xbar);
    }
    const double scale = 1.0 + kappa * dt;
    for (int m = 1; m <= n; ++m) {
        double ratio_form = 0.0, abs_form = 0.0;
        for (int j = 0; j <= m - 1; ++j) {
            const double hp = std::pow(h, j + 1);
            ratio_form += rep.mu_bar[m - j - 1] * rep.f_norm[m - j - 1] / hp;
            abs_form += rep.mu[m - j - 1] / hp;
        }
        rep.bound.push_back(dt * scale * ratio_form);
        rep.bound_absolute.push_back(scale * abs_form);
    }
    return rep;
}

namespace {

struct RkWeights {
    Matrix d;
    Vector w;  // sum_k |b_k| [D^{-1}]_{ki}
    double amplification;
};

RkWeights rk_weights(const Matrix& absa, const Vector& b, double kdt, const Vector& row_scale)
{
    const int s = static_cast<int>(absa.rows());
    Matrix scaled = row_scale.asDiagonal() * absa;
    const double rowsum = scaled.rowwise().sum().maxCoeff();
    if (!(kdt * rowsum < 1.0))
        throw HypothesisError("RK bound requires kappa dt max_i sum_j |a_ij| < 1 (D must be an M-matrix)");
    RkWeights out;
    out.d = Matrix::Identity(s, s) - kdt * scaled;
    const Matrix dinv = out.d.inverse();
    out.w = dinv.transpose() * b.cwiseAbs();
    out.amplification = 1.0 + kdt * out.w.sum();
    return out;
}

struct RkStepTerms {
    std::vector<double> proj;      // per stage
    std::vector<double> coupling;  // per stage (general mode)
    std::vector<double> pnorm;     // ||P_i|| (LSPG)
};

// Projection terms of one step. fstage supplies the vectors whose projection error is measured.
RkStepTerms rk_step_terms(const Model& model, const TrialSubspace& sub, const ButcherTableau& tab,
                          const Trajectory& rom, int n, const WeightingOperator* w, RkBoundMode mode,
                          const std::vector<Vector>& fstage, bool need_norm)
{
    const int s = tab.s;
    const Matrix& phi = sub.basis();
    RkStepTerms out;
    out.proj.assign(s, 0.0);
    out.coupling.assign(s, 0.0);
    out.pnorm.assign(s, 1.0);
    if (rom.kind == TrajectoryKind::galerkin) {
        for (int i = 0; i < s; ++i)
            out.proj[i] = orthogonal_residual(phi, fstage[i]);
        return out;
    }
    const Vector base = reconstruct(sub, rom.states[n - 1]);
    const std::vector<Vector>& st = rom.stages[n - 1];
    const double tp = rom.time(n - 1);
    std::vector<Vector> rom_res;
    if (mode == RkBoundMode::general)
        for (int e = 0; e < s; ++e)
            rom_res.push_back(phi * st[e] - model.velocity(rom_stage_argument(sub, base, st, tab, rom.dt, e),
                                                           tp + tab.c(e) * rom.dt));
    for (int i = 0; i < s; ++i) {
        const ObliqueProjector proj(phi, rk_stage_test_basis(model, sub, *w, base, st, tab, tp, rom.dt, i, i));
        out.proj[i] = proj.complement(fstage[i]).norm();
        if (need_norm)
            out.pnorm[i] = proj.norm();
        if (mode == RkBoundMode::general) {
            // stationarity for unknown i couples residual e through d r_e / d y_i
            Vector z = Vector::Zero(sub.reduced_dim());
            for (int e = 0; e < s; ++e)
                if (e != i && tab.a(e, i) != 0.0)
                    z += rk_stage_test_basis(model, sub, *w, base, st, tab, tp, rom.dt, e, i).transpose() * rom_res[e];
            out.coupling[i] = proj.lift(z).norm();
        }
    }
    return out;
}

void check_rk_trajectory(const Trajectory& rom, const ButcherTableau& tab)
{
    if (static_cast<int>(rom.stages.size()) != rom.num_steps())
        throw Error("RK bounds need stage values for every step");
    for (const auto& st : rom.stages)
        if (static_cast<int>(st.size()) != tab.s)
            throw DimensionError("RK bounds: stage count does not match the tableau");
}

BoundReport rk_recursion(const Trajectory& fom_or_null, bool apriori, const Trajectory& rom, const Model& model,
                         const TrialSubspace& sub, const ButcherTableau& tab, double kappa, RkBoundMode mode,
                         const WeightingOperator* w)
{
    check_lspg(rom, w);
    check_rk_trajectory(rom, tab);
    if (mode == RkBoundMode::stagewise && classify(tab).tag == SchemeTag::fully_implicit && rom.kind == TrajectoryKind::lspg)
        throw HypothesisError("stagewise RK bound needs an explicit or diagonally implicit tableau");
    const int s = tab.s;
    const double dt = rom.dt;
    const double kdt = kappa * dt;
    const Matrix absa = tab.a.cwiseAbs();
    const bool lspg_apriori = apriori && rom.kind == TrajectoryKind::lspg;
    const RkWeights base_weights = rk_weights(absa, tab.b, kdt, Vector::Ones(s));

    BoundReport rep;
    rep.mode = apriori ? BoundMode::apriori : BoundMode::aposteriori;
    rep.kind = rom.kind;
    rep.kappa = kappa;
    rep.dt = dt;
    rep.d = base_weights.d;
    rep.amplification = base_weights.amplification;
    rep.notes.push_back(kappa_note);
    double b = 0.0;
    for (int n = 1; n <= rom.num_steps(); ++n) {
        std::vector<Vector> fstage(s);
        const double tp = rom.time(n - 1);
        for (int i = 0; i < s; ++i) {
            Vector arg;
            if (apriori)
                arg = rk_stage_argument(RkStageSet{fom_or_null.stages[n - 1], fom_or_null.states[n - 1], tp, dt, tab}, i);
            else
                arg = rom_stage_argument(sub, reconstruct(sub, rom.states[n - 1]), rom.stages[n - 1], tab, dt, i);
            fstage[i] = model.velocity(arg, tp + tab.c(i) * dt);
        }
        const RkStepTerms terms = rk_step_terms(model, sub, tab, rom, n, w, mode, fstage, lspg_apriori);
        RkWeights wts = base_weights;
        if (lspg_apriori) {
            Vector scale(s);
            for (int i = 0; i < s; ++i)
                scale(i) = terms.pnorm[i];
            wts = rk_weights(absa, tab.b, kdt, scale);
        }
        double src = 0.0, tmax = 0.0;
        for (int i = 0; i < s; ++i) {
            src += wts.w(i) * (terms.proj[i] + terms.coupling[i]);
            tmax = std::max(tmax, terms.proj[i]);
        }
        b = wts.amplification * b + dt * src;
        rep.term_projection.push_back(tmax);
        rep.coeff.push_back(wts.amplification);
        rep.local_bound.push_back(dt * src);
        rep.per_step_bound.push_back(b);
    }
    rep.global_bound = b;
    return rep;
}

} // namespace

BoundReport rk_aposteriori_bound(const Trajectory& rom, const Model& model, const TrialSubspace& sub,
                                 const ButcherTableau& tableau, double kappa, RkBoundMode mode,
                                 const WeightingOperator* w)
{
    return rk_recursion(rom, false, rom, model, sub, tableau, kappa, mode, w);
}

BoundReport rk_apriori_bound(const Trajectory& fom, const Trajectory& rom, const Model& model,
                             const TrialSubspace& sub, const ButcherTableau& tableau, double kappa,
                             RkBoundMode mode, const WeightingOperator* w)
{
    if (fom.num_steps() != rom.num_steps() || fom.dt != rom.dt)
        throw Error("a priori bounds need a FOM trajectory on the ROM time grid");
    check_rk_trajectory(fom, tableau);
    return rk_recursion(fom, true, rom, model, sub, tableau, kappa, mode, w);
}

BoundReport rk_timestep_independent_apriori(const Trajectory& fom, const Trajectory& rom, const Model& model,
                                            const TrialSubspace& sub, const ButcherTableau& tab, double kappa,
                                            double omega, const WeightingOperator* w)
{
    if (!(omega > 0.0 && omega < 1.0))
        throw HypothesisError("time-step-independent RK bound requires 0 < omega < 1");
    if (rom.kind == TrajectoryKind::lspg && classify(tab).tag == SchemeTag::fully_implicit)
        throw HypothesisError("time-step-independent LSPG RK bound covers explicit and DIRK tableaus only");
    // the recursion supplies per-stage terms and projector norms
    const BoundReport base = rk_apriori_bound(fom, rom, model, sub, tab, kappa, RkBoundMode::stagewise, w);
    const int s = tab.s;
    const double dt = rom.dt;
    const Matrix absa = tab.a.cwiseAbs();
    double astar = spectral_norm(absa);
    if (rom.kind == TrajectoryKind::lspg) {
        // largest projector-weighted |A| over the run
        astar = 0.0;
        for (int n = 1; n <= rom.num_steps(); ++n) {
            const Vector b0 = reconstruct(sub, rom.states[n - 1]);
            Vector scale(s);
            for (int i = 0; i < s; ++i)
                scale(i) = oblique_projector_norm(
                    sub.basis(), rk_stage_test_basis(model, sub, *w, b0, rom.stages[n - 1], tab, rom.time(n - 1), dt, i, i));
            astar = std::max(astar, spectral_norm(scale.asDiagonal() * absa));
        }
    }
    if (kappa * astar > 0.0 && dt > (1.0 - omega) / (kappa * astar) * (1.0 + 1e-12))
        throw HypothesisError("time-step cap dt <= (1 - omega) / (kappa a*) violated");
    const double bstar = tab.b.cwiseAbs().maxCoeff();
    const double rate = bstar * std::pow(static_cast<double>(s), 1.5) / omega;
    BoundReport rep = base;
    rep.mode = BoundMode::timestep_independent;
    rep.eps = omega;
    double running = 0.0;
    for (int n = 1; n <= rom.num_steps(); ++n) {
        running = std::max(running, base.term_projection[n - 1]);
        const double tn = n * dt;
        const double coeff = expm1_ratio(tn * kappa * rate) * tn * rate;
        rep.term_projection[n - 1] = running;
        rep.coeff[n - 1] = coeff;
        rep.per_step_bound[n - 1] = coeff * running;
    }
    rep.global_bound = rep.per_step_bound.empty() ? 0.0 : rep.per_step_bound.back();
    return rep;
}

BoundReport apriori_bounds_lmm(const Trajectory& fom, const Trajectory& rom, const Model& model,
                               const TrialSubspace& sub, const LmmScheme& scheme, double kappa,
                               const WeightingOperator* w)
{
    return global_aposteriori_lmm(local_apriori_lmm(fom, rom, model, sub, scheme, kappa, w));
}

std::vector<double> rom_errors(const Trajectory& fom, const Trajectory& rom, const TrialSubspace& sub)
{
    if (fom.num_steps() != rom.num_steps())
        throw Error("rom_errors: trajectories differ in length");
    std::vector<double> e;
    for (int n = 0; n <= fom.num_steps(); ++n)
        e.push_back((fom.states[n] - reconstruct(sub, rom.states[n])).norm());
    return e;
}

} // namespace morrow
