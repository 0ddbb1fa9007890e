#include "morrow_cli/verify.hpp"

#include "morrow/analysis.hpp"
#include "morrow/benchmodels.hpp"
#include "morrow/bounds.hpp"
#include "morrow/fom.hpp"
#include "morrow/galerkin.hpp"
#include "morrow/io.hpp"
#include "morrow/lspg.hpp"
#include "morrow/pod.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace morrow::cli {

namespace {

VerifyRow row(std::string property, std::string detail, double value, double tol, bool pass)
{
    return {std::move(property), std::move(detail), value, tol, pass ? "PASS" : "FAIL"};
}

struct Bed {
    BenchmarkSpec spec;
    Model model;
    TrialSubspace sub;
};

Bed make_bed(const VerifyOptions& o)
{
    BenchmarkSpec spec;
    spec.name = o.model;
    spec.n = o.n;
    spec.seed = o.seed;
    if (o.model == "burgers") {
        spec.initial_profile = "sine";
        spec.viscosity = 0.01;
    }
    if (o.model == "advection_diffusion") {
        spec.initial_profile = "gaussian";
        spec.viscosity = 0.01;
    }
    Model model = make_benchmark(spec);
    const Trajectory fom = integrate(model, make_scheme("bdf2"), 1e-3, 0.05, SolverOptions::tight());
    PodResult pod = compute_pod(centered_snapshots(fom, model.initial_state()), 1.0, {model.initial_state(), {}});
    const int p = std::min(6, pod.dim());
    return {spec, model, TrialSubspace(pod.basis.basis().leftCols(p), model.initial_state())};
}

double commutativity_lmm(const Bed& b, std::uint64_t seed)
{
    const GalerkinModel gm = make_galerkin_model(b.model, b.sub);
    const Matrix& phi = b.sub.basis();
    const int p = b.sub.reduced_dim();
    const LmmScheme bdf2 = make_lmm("bdf2");
    Rng rng(seed);
    double worst = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        const std::vector<Vector> hist{rng.vector(p, -0.5, 0.5), rng.vector(p, -0.5, 0.5)};
        const Vector w = rng.vector(p, -0.5, 0.5);
        const int n = 1 + draw % 2;
        const Vector lhs = galerkin_reduced_residual_lmm(gm, make_lmm_context(bdf2, n, 1e-3, hist), w);
        const Vector rhs =
            phi.transpose() * lmm_residual(b.model, lifted_lmm_context(bdf2, n, 1e-3, b.sub, hist), reconstruct(b.sub, w));
        worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
    }
    return worst;
}

double commutativity_rk(const Bed& b, std::uint64_t seed)
{
    const GalerkinModel gm = make_galerkin_model(b.model, b.sub);
    const Matrix& phi = b.sub.basis();
    const int p = b.sub.reduced_dim();
    const ButcherTableau tab = make_butcher("rk4");
    Rng rng(seed);
    double worst = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        std::vector<Vector> red, full;
        for (int i = 0; i < tab.s; ++i) {
            red.push_back(rng.vector(p, -0.5, 0.5));
            full.push_back(phi * red.back());
        }
        const Vector base = rng.vector(p, -0.5, 0.5);
        const RkStageSet rs{red, base, 0.0, 1e-3, tab};
        const RkStageSet fs{full, reconstruct(b.sub, base), 0.0, 1e-3, tab};
        for (int i = 0; i < tab.s; ++i) {
            const Vector lhs = galerkin_reduced_residual_rk(gm, rs, i);
            const Vector rhs = phi.transpose() * rk_stage_residual(b.model, fs, i);
            worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
        }
    }
    return worst;
}

double galerkin_lspg_gap(const Bed& b, const Scheme& scheme, double dt, double T, const WeightingOperator& w)
{
    const SolverOptions o = SolverOptions::tight();
    const Trajectory g = integrate_galerkin(b.model, b.sub, scheme, dt, T, o);
    const Trajectory p = integrate_lspg(b.model, b.sub, w, scheme, dt, T, o).traj;
    return compare_trajectories(g, p, &b.sub);
}

} // namespace

std::vector<VerifyRow> run_verify(const VerifyOptions& opts)
{
    const Bed bed = make_bed(opts);
    const int n = bed.model.dim();
    const WeightingOperator identity = WeightingOperator::scaled_identity(n);
    std::vector<VerifyRow> rows;

    const double c_lmm = commutativity_lmm(bed, opts.seed + 1);
    rows.push_back(row("commutativity", "bdf2, 100 draws", c_lmm, 1e-12, c_lmm <= 1e-12));
    const double c_rk = commutativity_rk(bed, opts.seed + 2);
    rows.push_back(row("commutativity", "rk4, 100 draws", c_rk, 1e-12, c_rk <= 1e-12));

    for (const char* name : {"forward_euler", "rk4"}) {
        const Scheme s = make_scheme(name, std::string(name) == "rk4" ? "rk" : "lmm");
        const double gap = galerkin_lspg_gap(bed, s, 1e-3, 0.05, identity);
        rows.push_back(row("explicit equivalence", std::string(name) + ", W = I", gap, 1e-10, gap <= 1e-10));
    }

    {
        const LmmScheme be = make_lmm("backward_euler");
        std::vector<double> gaps;
        std::ostringstream detail;
        detail << "backward_euler, dt";
        for (double dt : {8e-3, 4e-3, 2e-3, 1e-3, 5e-4}) {
            gaps.push_back(galerkin_lspg_gap(bed, be, dt, 0.04, identity));
            detail << ' ' << io::format_double(dt);
        }
        bool decreasing = true;
        for (std::size_t i = 1; i < gaps.size(); ++i)
            decreasing = decreasing && gaps[i] < gaps[i - 1];
        const double ratio = gaps.front() > 0.0 ? gaps.back() / gaps.front() : 0.0;
        detail << " (value: last/first gap)";
        rows.push_back(row("limiting equivalence", detail.str(), ratio, 1.0, decreasing));
    }

    if (opts.model == "gradient_flow") {
        const double dt = 1e-3;
        const Matrix a = gradient_flow_matrix(bed.spec);
        const Matrix m = (Matrix::Identity(n, n) + dt * a).inverse();
        const Eigen::LLT<Matrix> llt(0.5 * (m + m.transpose()));
        const WeightingOperator w = WeightingOperator::dense(llt.matrixL().transpose());
        const double gap = galerkin_lspg_gap(bed, make_lmm("backward_euler"), dt, 0.05, w);
        rows.push_back(row("SPD equivalence", "backward_euler, W = chol((I + dt A)^-1)", gap, 1e-9, gap <= 1e-9));
    } else {
        rows.push_back({"SPD equivalence", "needs the gradient_flow model", 0.0, 1e-9, "SKIP"});
    }

    {
        const double dt = 1e-3, T = 0.05;
        const SolverOptions o = SolverOptions::tight();
        for (const char* name : {"backward_euler", "bdf2"}) {
            const LmmScheme scheme = make_lmm(name);
            const Trajectory fom = integrate(bed.model, scheme, dt, T, o);
            for (const char* kind : {"galerkin", "lspg"}) {
                const Trajectory rom = std::string(kind) == "galerkin"
                                           ? integrate_galerkin(bed.model, bed.sub, scheme, dt, T, o)
                                           : integrate_lspg(bed.model, bed.sub, identity, scheme, dt, T, o).traj;
                std::vector<Vector> xs;
                std::vector<double> ts;
                for (int k = 0; k <= fom.num_steps(); k += 5) {
                    xs.push_back(fom.states[k]);
                    xs.push_back(reconstruct(bed.sub, rom.states[k]));
                    ts.push_back(fom.time(k));
                    ts.push_back(fom.time(k));
                }
                const double kappa = estimate_lipschitz(bed.model, xs, ts).kappa;
                const std::vector<double> err = rom_errors(fom, rom, bed.sub);
                const BoundReport rep =
                    global_aposteriori_lmm(local_aposteriori_lmm(rom, bed.model, bed.sub, scheme, kappa, &identity));
                double worst = 0.0;
                for (int k = 1; k <= rom.num_steps(); ++k)
                    worst = std::max(worst, err[k] / rep.per_step_bound[k - 1]);
                rows.push_back(row("bound soundness", std::string(name) + ", " + kind + ", value: max error/bound",
                                   worst, 1.0, worst <= 1.0));
            }
        }
    }
    return rows;
}

void print_verify_table(std::ostream& os, const std::vector<VerifyRow>& rows)
{
    std::size_t wp = 8, wd = 6;
    for (const auto& r : rows) {
        wp = std::max(wp, r.property.size());
        wd = std::max(wd, r.detail.size());
    }
    os << std::left << std::setw(static_cast<int>(wp)) << "property" << "  " << std::setw(static_cast<int>(wd))
       << "detail" << "  " << std::setw(12) << "value" << "  " << std::setw(8) << "tol" << "  result\n";
    for (const auto& r : rows) {
        std::ostringstream v, t;
        v << std::setprecision(3) << r.value;
        t << std::setprecision(3) << r.tolerance;
        os << std::left << std::setw(static_cast<int>(wp)) << r.property << "  " << std::setw(static_cast<int>(wd))
           << r.detail << "  " << std::setw(12) << v.str() << "  " << std::setw(8) << t.str() << "  " << r.result
           << '\n';
    }
}

std::string verify_csv(const std::vector<VerifyRow>& rows)
{
    std::ostringstream os;
    io::CsvWriter w(os);
    w.header({"property", "detail", "value", "tolerance", "result"});
    for (const auto& r : rows) {
        std::string d = r.detail;
        std::replace(d.begin(), d.end(), ',', ';');
        w.field(r.property).field(d).field(r.value).field(r.tolerance).field(r.result);
        w.end_row();
    }
    return os.str();
}

} // namespace morrow::cli
