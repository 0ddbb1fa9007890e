// Acceptance criteria, one PASS/FAIL line each. Optional argument: a single criterion number.
#include "support.hpp"

#include "morrow/analysis.hpp"
#include "morrow/benchmodels.hpp"
#include "morrow/bounds.hpp"
#include "morrow/fom.hpp"
#include "morrow/galerkin.hpp"
#include "morrow/hyperreduction.hpp"
#include "morrow/lspg.hpp"
#include "morrow/pod.hpp"
#include "morrow_cli/config.hpp"
#include "morrow_cli/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace morrow;
using testing_support::linear_model;
using testing_support::random_basis;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

const SolverOptions tight = SolverOptions::tight();

BenchmarkSpec burgers_spec(int n)
{
    BenchmarkSpec s;
    s.name = "burgers";
    s.n = n;
    s.viscosity = 0.01;
    s.initial_profile = "sine";
    return s;
}

// Burgers FOM, snapshots and a POD basis of dimension p (or the nu-selected one when p = 0).
struct BurgersBed {
    Model model;
    Trajectory fom;
    TrialSubspace sub{Matrix::Identity(1, 1), Vector::Zero(1)};

    BurgersBed(int n, int p, double nu = 1.0, double dt = 1e-3, double T = 0.1)
        : BurgersBed(burgers_spec(n), p, nu, dt, T)
    {
    }

    BurgersBed(const BenchmarkSpec& spec, int p, double nu, double dt, double T) : model(burgers1d(spec))
    {
        fom = integrate(model, make_scheme("bdf2"), dt, T, tight);
        PodResult pod = compute_pod(centered_snapshots(fom, model.initial_state()), nu,
                                    PodOptions{model.initial_state(), std::nullopt});
        if (p > pod.dim())
            throw Error("POD rank " + std::to_string(pod.dim()) + " below requested p = " + std::to_string(p));
        const int q = p > 0 ? p : pod.dim();
        sub = TrialSubspace(pod.basis.basis().leftCols(q), model.initial_state());
    }
};

// Linear test bed x' = A x with a stable, non-normal A; kappa = ||A||_2 exactly.
struct LinearBed {
    Matrix a;
    Model model;
    TrialSubspace sub;
    double kappa;

    LinearBed(int n, int p, std::uint64_t seed)
        : a(make_operator(n, seed)), model(linear_model(a, Rng(seed + 7).vector(n))),
          sub(random_basis(n, p, seed + 1), model.initial_state()), kappa(a.jacobiSvd().singularValues()(0))
    {
    }

    static Matrix make_operator(int n, std::uint64_t seed)
    {
        Rng rng(seed);
        const Matrix q = random_orthogonal(n, rng);
        Vector d(n);
        for (int i = 0; i < n; ++i)
            d(i) = -0.5 - 4.5 * i / (n - 1.0);
        const Matrix s = rng.matrix(n, n, -0.2, 0.2);
        return q * d.asDiagonal() * q.transpose() + (s - s.transpose());
    }
};

BenchmarkSpec gradient_spec(int n)
{
    BenchmarkSpec s;
    s.name = "gradient_flow";
    s.n = n;
    s.lambda_min = 1.0;
    s.lambda_max = 100.0;
    s.seed = 3;
    return s;
}

Outcome fom_bdf2_order()
{
    BenchmarkSpec spec;
    spec.name = "advection_diffusion";
    spec.n = 64;
    spec.viscosity = 0.01;
    spec.initial_profile = "gaussian";
    spec.forcing = "manufactured";
    const Model model = make_benchmark(spec);
    const double T = 0.5;
    const Vector exact = manufactured_solution(spec, T);
    std::vector<double> errors;
    for (double dt : {0.02, 0.01, 0.005, 0.0025}) {
        const Trajectory tr = integrate(model, make_scheme("bdf2"), dt, T, tight);
        errors.push_back((tr.states.back() - exact).norm() / exact.norm());
    }
    const RateEstimate r = observed_order(errors);
    return {std::abs(r.order - 2.0) <= 0.15, "observed order " + fmt(r.order) + " (target 2.0 +- 0.15)"};
}

Outcome galerkin_bdf2_order()
{
    BenchmarkSpec spec = burgers_spec(128);
    spec.initial_profile = "step";
    spec.left_value = 1.0;
    spec.viscosity = 0.005;
    const BurgersBed bed(spec, 0, 1.0 - 1e-6, 1e-3, 0.1);
    const double T = 0.04;
    const LmmScheme bdf2 = make_lmm("bdf2");
    const Trajectory ref = integrate_galerkin(bed.model, bed.sub, bdf2, 4e-3 / 128, T, tight);
    std::vector<double> errors;
    for (double dt : {4e-3, 2e-3, 1e-3, 5e-4}) {
        const Trajectory g = integrate_galerkin(bed.model, bed.sub, bdf2, dt, T, tight);
        errors.push_back((g.states.back() - ref.states.back()).norm());
    }
    const RateEstimate r = observed_order(errors);
    return {std::abs(r.order - 2.0) <= 0.2,
            "p = " + std::to_string(bed.sub.reduced_dim()) + ", observed order " + fmt(r.order) +
                " (target 2.0 +- 0.2)"};
}

Outcome explicit_equivalence()
{
    const BurgersBed bed(128, 10);
    const WeightingOperator w = WeightingOperator::scaled_identity(bed.model.dim());
    double worst = 0.0;
    std::string detail;
    for (const char* name : {"forward_euler", "rk4"}) {
        const Scheme s = make_scheme(name, std::string(name) == "rk4" ? "rk" : "lmm");
        const Trajectory g = integrate_galerkin(bed.model, bed.sub, s, 1e-3, 0.1, tight);
        const Trajectory p = integrate_lspg(bed.model, bed.sub, w, s, 1e-3, 0.1, tight).traj;
        const double gap = compare_trajectories(g, p, &bed.sub);
        worst = std::max(worst, gap);
        detail += std::string(detail.empty() ? "" : ", ") + name + " " + fmt(gap);
    }
    return {worst <= 1e-10, "p = 10, max difference " + detail + " (tol 1e-10)"};
}

Outcome limiting_equivalence()
{
    const BurgersBed bed(128, 10);
    const WeightingOperator w = WeightingOperator::scaled_identity(bed.model.dim());
    const LmmScheme be = make_lmm("backward_euler");
    const double t = 0.04;
    std::vector<double> gaps;
    for (double dt : {8e-3, 4e-3, 2e-3, 1e-3, 5e-4}) {
        const Trajectory g = integrate_galerkin(bed.model, bed.sub, be, dt, t, tight);
        const Trajectory p = integrate_lspg(bed.model, bed.sub, w, be, dt, t, tight).traj;
        gaps.push_back((bed.sub.basis() * (g.states.back() - p.states.back())).norm());
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < gaps.size(); ++i)
        decreasing = decreasing && gaps[i] < gaps[i - 1];
    const double ratio = gaps.back() / gaps.front();
    std::string seq;
    for (double g : gaps)
        seq += (seq.empty() ? "" : " ") + fmt(g);
    return {decreasing && ratio <= 1e-2,
            "gaps at t = 0.04: " + seq + "; ratio " + fmt(ratio) + (decreasing ? "" : ", not decreasing")};
}

Outcome spd_equivalence()
{
    const BenchmarkSpec spec = gradient_spec(48);
    const Model model = make_benchmark(spec);
    const Trajectory fom = integrate(model, make_scheme("bdf2"), 1e-3, 0.1, tight);
    const PodResult pod = compute_pod(centered_snapshots(fom, model.initial_state()), 1.0,
                                      PodOptions{model.initial_state(), std::nullopt});
    const TrialSubspace sub(pod.basis.basis().leftCols(std::min(6, pod.dim())), model.initial_state());
    const int n = model.dim();
    const double dt = 2e-3;
    const Matrix a = gradient_flow_matrix(spec);
    const Matrix m = (Matrix::Identity(n, n) + dt * a).inverse();
    const Eigen::LLT<Matrix> llt(0.5 * (m + m.transpose()));
    const WeightingOperator w = WeightingOperator::dense(llt.matrixL().transpose());
    const LmmScheme be = make_lmm("backward_euler");
    const Trajectory g = integrate_galerkin(model, sub, be, dt, 0.1, tight);
    const Trajectory p = integrate_lspg(model, sub, w, be, dt, 0.1, tight).traj;
    const double gap = compare_trajectories(g, p, &sub);
    return {gap <= 1e-9, "max per-step difference " + fmt(gap) + " (tol 1e-9)"};
}

Outcome commutativity()
{
    const BurgersBed bed(64, 6);
    const GalerkinModel gm = make_galerkin_model(bed.model, bed.sub);
    const Matrix& phi = bed.sub.basis();
    const int p = bed.sub.reduced_dim();
    Rng rng(2024);
    double lmm_worst = 0.0, rk_worst = 0.0;
    for (const char* name : {"backward_euler", "bdf2"}) {
        const LmmScheme scheme = make_lmm(name);
        for (int draw = 0; draw < 100; ++draw) {
            const int n = 1 + draw % 3;
            std::vector<Vector> hist;
            for (int j = 0; j < n; ++j)
                hist.push_back(rng.vector(p, -0.5, 0.5));
            const Vector w = rng.vector(p, -0.5, 0.5);
            const Vector lhs = galerkin_reduced_residual_lmm(gm, make_lmm_context(scheme, n, 1e-3, hist), w);
            const Vector rhs = phi.transpose() *
                               lmm_residual(bed.model, lifted_lmm_context(scheme, n, 1e-3, bed.sub, hist),
                                            reconstruct(bed.sub, w));
            lmm_worst = std::max(lmm_worst, (lhs - rhs).norm());
        }
    }
    for (const char* name : {"rk4", "sdirk2"}) {
        const ButcherTableau tab = make_butcher(name);
        for (int draw = 0; draw < 100; ++draw) {
            std::vector<Vector> red, full;
            for (int i = 0; i < tab.s; ++i) {
                red.push_back(rng.vector(p, -0.5, 0.5));
                full.push_back(phi * red.back());
            }
            const Vector base = rng.vector(p, -0.5, 0.5);
            const RkStageSet rs{red, base, 0.0, 1e-3, tab};
            const RkStageSet fs{full, reconstruct(bed.sub, base), 0.0, 1e-3, tab};
            for (int i = 0; i < tab.s; ++i) {
                const Vector lhs = galerkin_reduced_residual_rk(gm, rs, i);
                const Vector rhs = phi.transpose() * rk_stage_residual(bed.model, fs, i);
                rk_worst = std::max(rk_worst, (lhs - rhs).norm());
            }
        }
    }
    return {std::max(lmm_worst, rk_worst) <= 1e-12,
            "max difference LMM " + fmt(lmm_worst) + ", RK " + fmt(rk_worst) + " (tol 1e-12)"};
}

Outcome bound_soundness()
{
    const LinearBed bed(24, 5, 11);
    const int n = bed.model.dim();
    const double dt = 0.02, T = 0.6;
    const WeightingOperator w = WeightingOperator::scaled_identity(n);
    double worst = 0.0;  // max error / bound over every bound family and step
    int checks = 0;
    const auto check = [&](const std::vector<double>& err, const std::vector<double>& bound, int offset) {
        for (std::size_t m = 1; m < err.size(); ++m) {
            worst = std::max(worst, err[m] / bound[m - 1 + offset]);
            ++checks;
        }
    };
    for (const char* name : {"backward_euler", "bdf2"}) {
        const LmmScheme scheme = make_lmm(name);
        const Trajectory fom = integrate(bed.model, scheme, dt, T, tight);
        const Trajectory g = integrate_galerkin(bed.model, bed.sub, scheme, dt, T, tight);
        const Trajectory p = integrate_lspg(bed.model, bed.sub, w, scheme, dt, T, tight).traj;
        for (const Trajectory* rom : {&g, &p}) {
            const std::vector<double> err = rom_errors(fom, *rom, bed.sub);
            const LmmLocalTerms post = local_aposteriori_lmm(*rom, bed.model, bed.sub, scheme, bed.kappa, &w);
            check(err, local_bound_with_errors(post, err), 0);
            check(err, global_aposteriori_lmm(post).per_step_bound, 0);
            check(err, simplified_global_bounds(post, BoundMode::simplified).per_step_bound, 0);
            if (std::string(name) == "backward_euler") {
                check(err, simplified_global_bounds(post, BoundMode::timestep_independent).per_step_bound, 0);
                check(err, backward_euler_aposteriori(*rom, bed.model, bed.sub, bed.kappa, &w).per_step_bound, 0);
            }
        }
    }
    for (const char* name : {"explicit_euler", "rk4", "sdirk2"}) {
        const ButcherTableau tab = make_butcher(name);
        const Trajectory fom = integrate(bed.model, tab, dt, T, tight);
        const Trajectory g = integrate_galerkin(bed.model, bed.sub, tab, dt, T, tight);
        const Trajectory p = integrate_lspg(bed.model, bed.sub, w, tab, dt, T, tight).traj;
        for (const Trajectory* rom : {&g, &p}) {
            const std::vector<double> err = rom_errors(fom, *rom, bed.sub);
            for (RkBoundMode mode : {RkBoundMode::general, RkBoundMode::stagewise})
                check(err, rk_aposteriori_bound(*rom, bed.model, bed.sub, tab, bed.kappa, mode, &w).per_step_bound,
                      0);
        }
    }
    return {worst <= 1.0 + 1e-9, std::to_string(checks) + " step checks, kappa dt = " + fmt(bed.kappa * dt) +
                                     ", max error/bound " + fmt(worst)};
}

// Path-sum oracle over compositions of the step gap with parts in 1..k.
double enumerated_bound(const LmmLocalTerms& t, int n)
{
    const auto g2 = [&](int step, int l) {
        const auto& g = t.gamma2[step - 1];
        return l < static_cast<int>(g.size()) ? g[l] : 0.0;
    };
    std::function<double(int, int)> paths = [&](int step, int left) -> double {
        if (left == 0)
            return 1.0;
        double s = 0.0;
        for (int eta = 1; eta <= std::min(t.k, left); ++eta)
            s += g2(step, eta) * paths(step - eta, left - eta);
        return s;
    };
    double sum = 0.0;
    for (int m = 1; m <= n; ++m)
        for (int l = 0; l < static_cast<int>(t.proj[m - 1].size()); ++l)
            sum += (m == n ? 1.0 : 0.0) * t.gamma1[m - 1][l] * t.proj[m - 1][l] +
                   (m < n ? paths(n, n - m) : 0.0) * t.gamma1[m - 1][l] * t.proj[m - 1][l];
    return sum;
}

Outcome global_bound_oracle()
{
    double worst = 0.0;
    int cases = 0;
    const LmmScheme bdf2 = make_lmm("bdf2");
    for (int n = 1; n <= 6; ++n)
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            Rng rng(1000 + 31 * n + seed);
            LmmLocalTerms t;
            t.dt = 0.05;
            t.kappa = rng.uniform(0.5, 4.0);
            t.k = bdf2.k();
            for (int m = 1; m <= n; ++m) {
                t.coeffs.push_back(bdf2.coeffs(m));
                std::vector<double> row;
                for (int l = 0; l <= t.coeffs.back().k(); ++l)
                    row.push_back(rng.uniform(0.1, 2.0));
                t.proj.push_back(row);
            }
            fill_coefficients(t);
            const BoundReport rep = global_aposteriori_lmm(t);
            for (int m = 1; m <= n; ++m) {
                const double oracle = enumerated_bound(t, m);
                worst = std::max(worst, std::abs(rep.per_step_bound[m - 1] - oracle) / std::max(1.0, oracle));
                ++cases;
            }
        }
    return {worst <= 1e-12, std::to_string(cases) + " comparisons, max relative difference " + fmt(worst)};
}

Outcome lspg_beats_galerkin()
{
    const BenchmarkSpec spec = gradient_spec(40);
    const Model model = make_benchmark(spec);
    const Matrix a = gradient_flow_matrix(spec);
    const double kappa = a.jacobiSvd().singularValues()(0);
    const double dt = 2e-3, T = 0.06;
    const Trajectory train = integrate(model, make_scheme("bdf2"), dt, T, tight);
    const PodResult pod = compute_pod(centered_snapshots(train, model.initial_state()), 1.0,
                                      PodOptions{model.initial_state(), std::nullopt});
    const TrialSubspace sub(pod.basis.basis().leftCols(std::min(4, pod.dim())), model.initial_state());
    const WeightingOperator w = WeightingOperator::scaled_identity(model.dim());
    int steps = 0, violations = 0;
    double min_margin = 1e300;
    for (const char* name : {"backward_euler", "bdf2"}) {
        const LmmScheme scheme = make_lmm(name);
        const Trajectory fom = integrate(model, scheme, dt, T, tight);
        const Trajectory g = integrate_galerkin(model, sub, scheme, dt, T, tight);
        const std::vector<double> err = rom_errors(fom, g, sub);
        for (int n = 1; n <= g.num_steps(); ++n) {
            // one LSPG step from the Galerkin history
            const LmmStepContext ctx = lifted_lmm_context(scheme, n, dt, sub, g.states);
            const Vector y = solve_lspg_step_lmm(model, sub, w, ctx, tight, g.states[n]).yhat;
            Trajectory gal = g, lspg = g;
            gal.states.resize(n + 1);
            lspg.states.resize(n + 1);
            lspg.states[n] = y;
            lspg.kind = TrajectoryKind::lspg;
            std::vector<double> e(err.begin(), err.begin() + n + 1);
            const double bg =
                local_bound_with_errors(local_aposteriori_lmm(gal, model, sub, scheme, kappa, &w), e).back();
            const double bl =
                local_bound_with_errors(local_aposteriori_lmm(lspg, model, sub, scheme, kappa, &w), e).back();
            ++steps;
            if (bl > bg * (1.0 + 1e-10))
                ++violations;
            min_margin = std::min(min_margin, (bg - bl) / bg);
        }
    }
    return {violations == 0, std::to_string(steps) + " matched steps, " + std::to_string(violations) +
                                 " violations, min relative margin " + fmt(min_margin)};
}

Outcome oblique_identity()
{
    double worst = 0.0;
    int steps = 0;
    const auto run = [&](const Model& model, const TrialSubspace& sub, double kappa, double dt, double T) {
        const WeightingOperator w = WeightingOperator::scaled_identity(model.dim());
        for (const char* name : {"backward_euler", "bdf2"}) {
            const LmmScheme scheme = make_lmm(name);
            const Trajectory p = integrate_lspg(model, sub, w, scheme, dt, T, tight).traj;
            const LmmLocalTerms t = local_aposteriori_lmm(p, model, sub, scheme, kappa, &w);
            for (int m = 1; m <= t.steps(); ++m) {
                // discrete residual recomputed from scratch at the ROM state
                const LmmStepContext ctx = lifted_lmm_context(scheme, m, dt, sub, p.states);
                const double res = lmm_residual(model, ctx, reconstruct(sub, p.states[m])).norm();
                const double lhs = std::abs(t.coeffs[m - 1].beta[0]) * dt * t.proj[m - 1][0];
                worst = std::max(worst, std::abs(lhs - res) / std::max(1.0, res));
                ++steps;
            }
        }
    };
    const LinearBed lin(24, 5, 11);
    run(lin.model, lin.sub, lin.kappa, 0.02, 0.4);
    const BurgersBed bur(64, 6);
    run(bur.model, bur.sub, 50.0, 1e-3, 0.05);
    return {worst <= 1e-9, std::to_string(steps) + " steps (linear and Burgers), max difference " + fmt(worst)};
}

Outcome pod_oracle()
{
    int mismatches = 0, checks = 0;
    double worst_orth = 0.0, worst_span = 0.0;
    bool monotone = true;
    const std::vector<double> nus{0.0, 0.5, 0.9, 0.99, 0.999, 0.9999, 1.0 - 1e-8};
    for (std::uint64_t set = 0; set < 20; ++set) {
        Rng rng(500 + set);
        const int n = 12 + static_cast<int>(rng.uniform() * 30);
        const int m = 6 + static_cast<int>(rng.uniform() * 20);
        const int r = std::min(n, m);
        // decaying singular spectrum with random singular vectors
        Vector sigma(r);
        for (int i = 0; i < r; ++i)
            sigma(i) = std::pow(10.0, -4.0 * i / r) * rng.uniform(0.9, 1.1);
        std::sort(sigma.data(), sigma.data() + r, std::greater<double>());
        SnapshotSet s;
        s.vectors = random_basis(n, r, 900 + set) * sigma.asDiagonal() * random_basis(m, r, 950 + set).transpose();
        s.centered = true;

        Matrix normalized = s.vectors;
        for (int j = 0; j < m; ++j)
            normalized.col(j).normalize();
        const Eigen::JacobiSVD<Matrix> svd(normalized, Eigen::ComputeThinU);
        const Vector sv = svd.singularValues();
        const double total = sv.squaredNorm();
        int prev = 0;
        for (double nu : nus) {
            int oracle = 1;
            double acc = sv(0) * sv(0);
            while (acc < nu * total && oracle < sv.size()) {
                acc += sv(oracle) * sv(oracle);
                ++oracle;
            }
            const PodResult pod = compute_pod(s, nu);
            ++checks;
            if (pod.dim() != oracle)
                ++mismatches;
            monotone = monotone && pod.dim() >= prev;
            prev = pod.dim();
            worst_orth = std::max(worst_orth, check_orthonormality(pod.basis));
            const Matrix& phi = pod.basis.basis();
            const Eigen::Index q = phi.cols();
            // the truncated subspace is only well defined across a singular-value gap
            if (q < sv.size() && sv(q - 1) - sv(q) > 1e-6 * sv(0)) {
                const Matrix u = svd.matrixU().leftCols(q);
                worst_span = std::max(worst_span, (phi * phi.transpose() - u * u.transpose()).norm());
            }
        }
    }
    const bool pass = mismatches == 0 && monotone && worst_orth <= 1e-12 && worst_span <= 1e-8;
    return {pass, std::to_string(checks) + " selections, " + std::to_string(mismatches) + " mismatches, orthonormality " +
                      fmt(worst_orth) + ", subspace gap " + fmt(worst_span) + (monotone ? ", monotone" : ", not monotone")};
}

Outcome gnat_identity()
{
    const BurgersBed bed(64, 6);
    const LmmScheme bdf2 = make_lmm("bdf2");
    const double dt = 1e-3, T = 0.1;
    const WeightingOperator plain = WeightingOperator::scaled_identity(bed.model.dim());
    const Trajectory ref = integrate_lspg(bed.model, bed.sub, plain, bdf2, dt, T, tight).traj;
    const ResidualSnapshotSet snaps = collect_residual_snapshots(bed.model, bed.sub, bdf2, dt, T, tight);
    const Matrix rb = build_residual_basis(snaps, 1.0);
    std::vector<int> all(bed.model.dim());
    for (int i = 0; i < bed.model.dim(); ++i)
        all[i] = i;
    const WeightingOperator g = gnat_weighting(SampleSet(all, bed.model.dim()), rb);
    const Trajectory gt = integrate_lspg(bed.model, bed.sub, g, bdf2, dt, T, tight).traj;
    const double gap = compare_trajectories(ref, gt, &bed.sub);
    return {gap <= 1e-6, "residual basis " + std::to_string(rb.cols()) + " vectors, max difference " + fmt(gap) +
                             " (tol 1e-6)"};
}

Outcome auxiliary_increments()
{
    const LinearBed bed(24, 5, 11);
    const int n = bed.model.dim();
    const double T = 0.8;
    const WeightingOperator w = WeightingOperator::scaled_identity(n);
    const LmmScheme be = make_lmm("backward_euler");
    double worst_mu = 0.0, worst_ratio = 0.0;
    int admissible = 0;
    std::string curve;
    double best_dt = 0.0, best_err = 1e300;
    for (double dt : {0.4, 0.2, 0.1, 0.05, 0.025}) {
        const Trajectory p = integrate_lspg(bed.model, bed.sub, w, be, dt, T, tight).traj;
        const Trajectory fom = integrate(bed.model, be, dt, T, tight);
        const std::vector<double> err = rom_errors(fom, p, bed.sub);
        if (err.back() < best_err) {
            best_err = err.back();
            best_dt = dt;
        }
        if (!(bed.kappa * dt < 1.0)) {
            curve += " " + fmt(dt) + ":inadmissible";
            continue;
        }
        ++admissible;
        const AuxiliaryIncrementReport rep = auxiliary_increment_bound(bed.model, p, bed.sub, dt, bed.kappa, tight);
        // independent oracle: the backward-Euler step of a linear model is one linear solve
        const Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(n, n) - dt * bed.a);
        for (int j = 1; j <= p.num_steps(); ++j) {
            const Vector prev = reconstruct(bed.sub, p.states[j - 1]);
            const Vector inc = lu.solve(prev) - prev;
            const double mu = (bed.sub.basis() * (p.states[j] - p.states[j - 1]) - inc).norm();
            worst_mu = std::max(worst_mu, std::abs(rep.mu[j - 1] - mu) / std::max(1.0, mu));
            worst_ratio = std::max(worst_ratio, err[j] / rep.bound_absolute[j - 1]);
        }
        curve += " " + fmt(dt) + ":" + fmt(rep.bound_absolute.back());
    }
    return {worst_mu <= 1e-9 && worst_ratio <= 1.0 + 1e-9 && admissible > 0,
            "mu vs oracle " + fmt(worst_mu) + ", max error/bound " + fmt(worst_ratio) + ", bound at T by dt" + curve +
                "; smallest final error at dt " + fmt(best_dt) + " (exploratory)"};
}

Outcome spectral_trend()
{
    // orthogonal spatial modes with decreasing amplitude and increasing frequency
    const int n = 40, samples = 512, modes = 5;
    const double dt = 1.0 / samples;
    const int cycles[modes] = {2, 5, 11, 23, 47};
    const Matrix u = random_basis(n, modes, 77);
    Rng rng(78);
    const Vector x0 = rng.vector(n);
    // whole periods over the window keep the temporal coefficients orthogonal
    SnapshotSet snaps;
    snaps.vectors.resize(n, samples);
    snaps.centered = true;
    for (int k = 0; k < samples; ++k) {
        Vector x = Vector::Zero(n);
        for (int i = 0; i < modes; ++i)
            x += std::pow(0.5, i) * std::sin(2.0 * M_PI * cycles[i] * k * dt + 0.3 + i) * u.col(i);
        snaps.vectors.col(k) = x;
    }
    const PodResult pod = compute_pod(snaps, 1.0 - 1e-10, PodOptions{x0, std::nullopt});
    if (pod.dim() != modes)
        return {false, "POD found " + std::to_string(pod.dim()) + " modes, expected 5"};
    const Matrix coords = snaps.vectors.transpose() * pod.basis.basis();
    const SpectralReport rep = spectral_analysis(coords, dt);
    bool non_increasing = true;
    std::string taus;
    for (int i = 0; i < modes; ++i) {
        taus += (i ? " " : "") + fmt(rep.modes[i].tau95);
        if (i > 0)
            non_increasing = non_increasing && rep.modes[i].tau95 <= rep.modes[i - 1].tau95;
    }
    return {non_increasing, "tau95 by mode: " + taus};
}

// CSV text with walltime columns removed.
std::string strip_timing(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::string line, out;
    std::vector<bool> keep;
    bool header = true;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (header) {
            for (const auto& c : cells)
                keep.push_back(c.find("walltime") == std::string::npos && c.find("wall_time") == std::string::npos);
            header = false;
        }
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (i >= keep.size() || keep[i])
                out += cells[i] + ',';
        out += '\n';
    }
    return out;
}

Outcome determinism()
{
    namespace fs = std::filesystem;
    const std::string yaml = R"(model:
  name: burgers
  n: 64
  viscosity: 0.01
  initial_profile: random
scheme: bdf2
dt: 2.0e-3
T: 0.04
stages: [fom, snapshots, pod, rom, sweep, bounds, spectral]
pod:
  nu: 0.99999
rom:
  kind: gnat
  gnat:
    nu_r: 0.999999
    samples: 30
sweep:
  dt: [8.0e-3, 4.0e-3, 2.0e-3]
  parallel: 3
output:
  plots: true
seed: 42
)";
    const fs::path root = fs::temp_directory_path() / "morrow_acceptance_determinism";
    fs::remove_all(root);
    std::ostringstream log;
    for (const char* run : {"a", "b"}) {
        cli::ExperimentConfig cfg = cli::parse_config(yaml);
        cfg.out = (root / run).string();
        const cli::RunOutcome o = cli::run_pipeline(cfg, {"run", "", yaml}, log);
        if (o.exit_code != 0)
            return {false, "pipeline failed: " + o.message};
    }
    int files = 0, differing = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
        if (!e.is_regular_file() || e.path().filename() == "manifest.json")
            continue;
        const fs::path rel = fs::relative(e.path(), root / "a");
        ++files;
        if (!fs::exists(root / "b" / rel) || strip_timing(e.path()) != strip_timing(root / "b" / rel))
            ++differing;
    }
    fs::remove_all(root);
    return {files > 0 && differing == 0,
            std::to_string(files) + " artifacts compared, " + std::to_string(differing) + " differ"};
}

struct Criterion {
    int id;
    const char* name;
    double time_limit_s;  // 0 when unbounded
    Outcome (*run)();
};

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> criteria{
        {1, "FOM BDF2 order", 10.0, fom_bdf2_order},
        {2, "Galerkin ROM BDF2 order", 30.0, galerkin_bdf2_order},
        {3, "explicit equivalence", 5.0, explicit_equivalence},
        {4, "limiting equivalence", 60.0, limiting_equivalence},
        {5, "SPD equivalence", 5.0, spd_equivalence},
        {6, "commutativity", 0.0, commutativity},
        {7, "bound soundness", 60.0, bound_soundness},
        {8, "global-bound oracle", 0.0, global_bound_oracle},
        {9, "LSPG local bound below Galerkin", 0.0, lspg_beats_galerkin},
        {10, "oblique-projection residual identity", 0.0, oblique_identity},
        {11, "POD oracle", 0.0, pod_oracle},
        {12, "GNAT identity", 0.0, gnat_identity},
        {13, "auxiliary-increment bound", 0.0, auxiliary_increments},
        {14, "spectral trend", 0.0, spectral_trend},
        {15, "determinism", 0.0, determinism},
    };
    const int only = argc > 1 ? std::atoi(argv[1]) : 0;
    int failed = 0;
    for (const Criterion& c : criteria) {
        if (only && c.id != only)
            continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.time_limit_s > 0.0 && secs > c.time_limit_s) {
            o.pass = false;
            o.detail += "; over the " + fmt(c.time_limit_s) + " s budget";
        }
        if (!o.pass)
            ++failed;
        std::printf("%s %2d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
