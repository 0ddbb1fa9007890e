#include "morrow_cli/pipeline.hpp"
#include "morrow_cli/artifacts.hpp"

#include "morrow/analysis.hpp"
#include "morrow/bounds.hpp"
#include "morrow/fom.hpp"
#include "morrow/galerkin.hpp"
#include "morrow/hyperreduction.hpp"
#include "morrow/io.hpp"
#include "morrow/lspg.hpp"
#include "morrow/pod.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace morrow::cli {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class F>
std::string render(F&& f)
{
    std::ostringstream os;
    f(os);
    return os.str();
}

RkLspgMode rk_mode(const std::string& s)
{
    if (s == "stagewise")
        return RkLspgMode::stagewise;
    if (s == "coupled")
        return RkLspgMode::coupled;
    return RkLspgMode::automatic;
}

BoundMode bound_mode(const std::string& s)
{
    if (s == "apriori")
        return BoundMode::apriori;
    if (s == "simplified")
        return BoundMode::simplified;
    if (s == "timestep_independent")
        return BoundMode::timestep_independent;
    if (s == "residual_form")
        return BoundMode::residual_form;
    return BoundMode::aposteriori;
}

std::string pad(int i, int width = 2)
{
    std::ostringstream os;
    os << std::setw(width) << std::setfill('0') << i;
    return os.str();
}

struct RomRun {
    Trajectory traj;
    std::vector<GaussNewtonReport> reports;
    std::optional<WeightingOperator> weighting;
    std::optional<SampleSet> samples;
    bool stable = true;
    std::string failure;

    const WeightingOperator* w() const { return weighting ? &*weighting : nullptr; }
};

class Pipeline {
public:
    Pipeline(const ExperimentConfig& cfg, ArtifactStore& store, std::ostream& log)
        : cfg_(cfg), store_(store), log_(log), model_(make_benchmark(cfg.model)), scheme_(make_scheme(cfg.scheme))
    {
    }

    void run(const std::string& stage)
    {
        if (stage == "fom")
            stage_fom();
        else if (stage == "snapshots")
            stage_snapshots();
        else if (stage == "pod")
            stage_pod();
        else if (stage == "rom")
            stage_rom();
        else if (stage == "sweep")
            stage_sweep();
        else if (stage == "bounds")
            stage_bounds();
        else if (stage == "spectral")
            stage_spectral();
        else
            throw ConfigError("unknown stage '" + stage + "'");
    }

private:
    void note(const std::string& msg)
    {
        std::lock_guard<std::mutex> lock(log_mu_);
        log_ << "  " << msg << '\n';
    }

    void plot(const std::string& name, const PlotSpec& spec, const std::vector<PlotSeries>& series)
    {
        if (cfg_.plots)
            store_.write("plots/" + name + ".svg", render_svg(spec, series));
    }

    const TrialSubspace& sub() const
    {
        if (!pod_)
            throw Error("no POD basis available");
        return pod_->basis;
    }

    // --- stages ---

    void stage_fom()
    {
        fom_ = integrate(model_, scheme_, cfg_.fom_dt(), cfg_.T, cfg_.solver);
        store_.write("fom/trajectory.csv", render([&](std::ostream& os) { io::write_trajectory(os, *fom_); }));
        note("fom: " + std::to_string(fom_->num_steps()) + " steps of " + io::format_double(fom_->dt));
    }

    void stage_snapshots()
    {
        if (fom_->num_steps() < 1)
            throw Error("snapshots need at least one FOM step (T > 0)");
        snaps_ = centered_snapshots(*fom_, model_.initial_state(), cfg_.pod.stride);
        store_.write("snapshots/snapshots.csv", render([&](std::ostream& os) { io::write_snapshots(os, *snaps_); }));
        note("snapshots: " + std::to_string(snaps_->vectors.cols()));
    }

    void stage_pod()
    {
        SnapshotSet snaps;
        if (!cfg_.pod.snapshots.empty()) {
            std::ifstream in(cfg_.pod.snapshots);
            if (!in)
                throw ConfigError("cannot open snapshot file '" + cfg_.pod.snapshots + "'");
            snaps = io::read_snapshots(in);
        } else {
            snaps = *snaps_;
        }
        PodOptions opts;
        if (snaps.vectors.rows() == model_.dim())
            opts.reference = model_.initial_state();
        const double nu = cfg_.pod.p > 0 ? 1.0 : cfg_.pod.nu;
        PodResult pod = compute_pod(snaps, nu, opts);
        if (cfg_.pod.p > 0) {
            if (cfg_.pod.p > pod.dim())
                throw HypothesisError("pod.p = " + std::to_string(cfg_.pod.p) + " exceeds the snapshot rank " +
                                      std::to_string(pod.dim()));
            pod.basis = TrialSubspace(pod.basis.basis().leftCols(cfg_.pod.p), pod.basis.reference());
        }
        pod_ = std::move(pod);
        store_.write("pod/basis.csv", render([&](std::ostream& os) { io::write_matrix(os, pod_->basis.basis(), "phi_"); }));
        store_.write("pod/singular_values.csv", render([&](std::ostream& os) { io::write_singular_values(os, *pod_); }));
        note("pod: p = " + std::to_string(pod_->dim()));
        PlotSeries s{"sigma", {}, {}};
        for (long k = 0; k < pod_->singular_values.size(); ++k) {
            s.x.push_back(static_cast<double>(k + 1));
            s.y.push_back(pod_->singular_values(k));
        }
        plot("singular_values", {"POD singular values", "index", "sigma", false, true}, {s});
    }

    WeightingOperator weighting_for(double dt, std::optional<SampleSet>& samples) const
    {
        const int n = model_.dim();
        if (cfg_.rom.kind == "gnat") {
            const ResidualSnapshotSet res =
                collect_residual_snapshots(model_, sub(), scheme_, dt, cfg_.T, cfg_.solver);
            const Matrix basis = build_residual_basis(res, cfg_.rom.gnat.nu_r);
            std::vector<int> all(n);
            for (int i = 0; i < n; ++i)
                all[i] = i;
            samples = cfg_.rom.gnat.samples > 0 ? select_samples(basis, cfg_.rom.gnat.samples) : SampleSet(all, n);
            return gnat_weighting(*samples, basis);
        }
        if (cfg_.rom.weighting == "scaled")
            return WeightingOperator::scaled_identity(n, cfg_.rom.gamma);
        if (cfg_.rom.weighting == "collocation")
            return WeightingOperator::collocation(n, cfg_.rom.rows);
        return WeightingOperator::scaled_identity(n, 1.0);
    }

    RomRun simulate(double dt) const
    {
        RomRun r;
        if (cfg_.rom.kind == "galerkin") {
            r.traj = integrate_galerkin(model_, sub(), scheme_, dt, cfg_.T, cfg_.solver);
        } else {
            r.weighting = weighting_for(dt, r.samples);
            LspgResult res = integrate_lspg(model_, sub(), *r.weighting, scheme_, dt, cfg_.T, cfg_.solver,
                                            rk_mode(cfg_.rom.rk_mode));
            r.traj = std::move(res.traj);
            r.reports = std::move(res.reports);
        }
        const double x0 = model_.initial_state().norm();
        const double cap = x0 > 0.0 ? 1e6 * x0 : std::numeric_limits<double>::infinity();
        for (const auto& y : r.traj.states) {
            const double nrm = reconstruct(sub(), y).norm();
            if (!std::isfinite(nrm) || nrm > cap) {
                r.stable = false;
                r.failure = "state norm exceeded 1e6 times the initial norm";
                break;
            }
        }
        return r;
    }

    double probe_error(const Trajectory& rom) const
    {
        const int idx = cfg_.probe_index();
        return trajectory_error(probe_series(rom, idx, &sub()), probe_series(*fom_, idx));
    }

    void write_rom_files(const std::string& dir, const RomRun& r)
    {
        store_.write(dir + "/trajectory.csv", render([&](std::ostream& os) { io::write_trajectory(os, r.traj); }));
        if (!r.reports.empty())
            store_.write(dir + "/gauss_newton.csv",
                         render([&](std::ostream& os) { io::write_gauss_newton(os, r.reports); }));
        if (r.samples)
            store_.write(dir + "/samples.txt", render([&](std::ostream& os) { write_samples(os, *r.samples); }));
    }

    void stage_rom()
    {
        const auto t0 = Clock::now();
        rom_ = simulate(cfg_.dt);
        const double wall = seconds_since(t0);
        write_rom_files("rom", *rom_);
        SweepResult s;
        s.dt = {cfg_.dt};
        s.error = {probe_error(rom_->traj)};
        s.walltime = {wall};
        s.bound = {nan_value};
        s.stable = {static_cast<char>(rom_->stable ? 1 : 0)};
        store_.write("rom/summary.csv", render([&](std::ostream& os) { io::write_sweep(os, s); }));
        note("rom (" + cfg_.rom.kind + "): error " + io::format_double(s.error[0]) +
             (rom_->stable ? "" : ", unstable: " + rom_->failure));

        const int idx = cfg_.probe_index();
        const Series a = probe_series(rom_->traj, idx, &sub()), b = probe_series(*fom_, idx);
        plot("probe", {"probe component " + std::to_string(idx), "t", "x", false, false},
             {{"fom", b.t, b.v}, {cfg_.rom.kind, a.t, a.v}});
    }

    const Trajectory& fom_at(double dt)
    {
        if (std::abs(dt - fom_->dt) <= 1e-14 * dt)
            return *fom_;
        if (!fom_dt_ || std::abs(fom_dt_->dt - dt) > 1e-14 * dt)
            fom_dt_ = integrate(model_, scheme_, dt, cfg_.T, cfg_.solver);
        return *fom_dt_;
    }

    const LipschitzEstimate& kappa()
    {
        if (kappa_)
            return *kappa_;
        LipschitzEstimate est;
        if (cfg_.bounds.kappa) {
            est.kappa = *cfg_.bounds.kappa;
        } else {
            std::vector<Vector> xs;
            std::vector<double> ts;
            const int want = std::max(2, cfg_.bounds.kappa_samples);
            auto take = [&](const Trajectory& t, bool lifted) {
                const int n = t.num_steps();
                const int count = std::min(n + 1, want);
                for (int k = 0; k < count; ++k) {
                    const int idx = count == 1 ? 0 : static_cast<int>(std::lround(static_cast<double>(k) * n / (count - 1)));
                    xs.push_back(lifted ? reconstruct(sub(), t.states[idx]) : t.states[idx]);
                    ts.push_back(t.time(idx));
                }
            };
            take(*fom_, false);
            if (rom_)
                take(rom_->traj, true);
            est = estimate_lipschitz(model_, xs, ts);
        }
        kappa_ = est;
        store_.write("bounds/kappa.csv", render([&](std::ostream& os) {
                         io::CsvWriter w(os);
                         w.header({"kappa", "secant_max", "jacobian_max", "samples", "override"});
                         w.field(est.kappa).field(est.secant_max).field(est.jacobian_max).field(est.samples);
                         w.field(cfg_.bounds.kappa ? 1 : 0);
                         w.end_row();
                     }));
        note("kappa = " + io::format_double(est.kappa) + (cfg_.bounds.kappa ? " (override)" : " (sampled estimate)"));
        return *kappa_;
    }

    double final_bound(const RomRun& r, double kappa) const
    {
        try {
            if (const auto* lmm = std::get_if<LmmScheme>(&scheme_))
                return global_aposteriori_lmm(local_aposteriori_lmm(r.traj, model_, sub(), *lmm, kappa, r.w()))
                    .global_bound;
            return rk_aposteriori_bound(r.traj, model_, sub(), std::get<ButcherTableau>(scheme_), kappa,
                                        RkBoundMode::general, r.w())
                .global_bound;
        } catch (const HypothesisError&) {
            return nan_value;
        }
    }

    void stage_sweep()
    {
        const double kap = kappa().kappa;
        const int n = static_cast<int>(cfg_.sweep_dt.size());
        SweepResult res;
        res.dt = cfg_.sweep_dt;
        res.error.assign(n, nan_value);
        res.walltime.assign(n, 0.0);
        res.bound.assign(n, nan_value);
        res.stable.assign(n, 0);
        std::vector<std::exception_ptr> errors(n);
        std::atomic<int> next{0};
        auto worker = [&] {
            for (;;) {
                const int i = next++;
                if (i >= n)
                    return;
                try {
                    sweep_point(i, kap, res);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        const int threads = std::min(cfg_.parallel, n);
        std::vector<std::thread> pool;
        for (int t = 1; t < threads; ++t)
            pool.emplace_back(worker);
        worker();
        for (auto& th : pool)
            th.join();
        for (const auto& e : errors)
            if (e)
                std::rethrow_exception(e);
        store_.write("sweep/sweep.csv", render([&](std::ostream& os) { io::write_sweep(os, res); }));
        PlotSeries err{"error", res.dt, res.error}, bnd{"bound", res.dt, res.bound};
        plot("sweep", {"error vs time step (" + cfg_.rom.kind + ")", "dt", "error", true, true}, {err, bnd});
        sweep_ = std::move(res);
    }

    void sweep_point(int i, double kap, SweepResult& res)
    {
        const double dt = cfg_.sweep_dt[i];
        const std::string dir = "sweep/point_" + pad(i);
        const auto t0 = Clock::now();
        RomRun r;
        try {
            r = simulate(dt);
        } catch (const ConvergenceError& e) {
            r.stable = false;
            r.failure = e.what();
        } catch (const RankDeficiencyError& e) {
            r.stable = false;
            r.failure = e.what();
        }
        res.walltime[i] = seconds_since(t0);
        res.stable[i] = r.stable ? 1 : 0;
        if (!r.traj.states.empty()) {
            write_rom_files(dir, r);
            res.error[i] = probe_error(r.traj);
            if (r.stable)
                res.bound[i] = final_bound(r, kap);
        }
        std::ostringstream msg;
        msg << "sweep dt=" << io::format_double(dt) << " error=" << io::format_double(res.error[i])
            << (r.stable ? "" : " unstable: " + r.failure);
        note(msg.str());
    }

    void stage_bounds()
    {
        const LipschitzEstimate& est = kappa();
        const double kap = est.kappa;
        const RomRun& r = *rom_;
        const Trajectory& fom = fom_at(cfg_.dt);
        const std::vector<double> err = rom_errors(fom, r.traj, sub());
        store_.write("bounds/errors.csv", render([&](std::ostream& os) { io::write_errors(os, r.traj, err); }));
        std::ostringstream notes;
        std::vector<PlotSeries> series;
        {
            PlotSeries e{"error", {}, {}};
            for (int n = 1; n < static_cast<int>(err.size()); ++n) {
                e.x.push_back(r.traj.time(n));
                e.y.push_back(err[n]);
            }
            series.push_back(e);
        }
        auto emit = [&](const std::string& name, const BoundReport& rep) {
            store_.write("bounds/" + name + ".csv", render([&](std::ostream& os) { io::write_bound_report(os, rep); }));
            for (const auto& s : rep.notes)
                notes << name << ": " << s << '\n';
            PlotSeries p{name, {}, {}};
            for (std::size_t n = 0; n < rep.per_step_bound.size(); ++n) {
                p.x.push_back(r.traj.time(static_cast<int>(n + 1)));
                p.y.push_back(rep.per_step_bound[n]);
            }
            series.push_back(p);
        };
        auto attempt = [&](const std::string& name, const auto& fn) {
            try {
                emit(name, fn());
            } catch (const HypothesisError& e) {
                notes << name << ": not evaluated: " << e.what() << '\n';
                note("bound " + name + " skipped: " + e.what());
            }
        };

        if (const auto* lmm = std::get_if<LmmScheme>(&scheme_)) {
            std::optional<LmmLocalTerms> post;
            try {
                post = local_aposteriori_lmm(r.traj, model_, sub(), *lmm, kap, r.w());
            } catch (const HypothesisError& e) {
                notes << "aposteriori: not evaluated: " << e.what() << '\n';
            }
            for (const auto& m : cfg_.bounds.modes) {
                const BoundMode mode = bound_mode(m);
                if (mode == BoundMode::apriori) {
                    attempt(m, [&] { return apriori_bounds_lmm(fom, r.traj, model_, sub(), *lmm, kap, r.w()); });
                } else if (post) {
                    if (mode == BoundMode::aposteriori)
                        attempt(m, [&] { return global_aposteriori_lmm(*post); });
                    else
                        attempt(m, [&] { return simplified_global_bounds(*post, mode, cfg_.bounds.eps); });
                }
            }
            if (lmm->name() == "backward_euler")
                attempt("backward_euler", [&] { return backward_euler_aposteriori(r.traj, model_, sub(), kap, r.w()); });
            if (cfg_.bounds.auxiliary && lmm->name() == "backward_euler" && cfg_.rom.kind != "galerkin") {
                try {
                    const AuxiliaryIncrementReport aux =
                        auxiliary_increment_bound(model_, r.traj, sub(), cfg_.dt, kap, cfg_.solver);
                    store_.write("bounds/auxiliary.csv", render([&](std::ostream& os) { io::write_aux_report(os, aux); }));
                } catch (const HypothesisError& e) {
                    notes << "auxiliary: not evaluated: " << e.what() << '\n';
                }
            }
        } else {
            const ButcherTableau& tab = std::get<ButcherTableau>(scheme_);
            for (const auto& m : cfg_.bounds.modes) {
                const BoundMode mode = bound_mode(m);
                if (mode == BoundMode::aposteriori)
                    attempt(m, [&] {
                        return rk_aposteriori_bound(r.traj, model_, sub(), tab, kap, RkBoundMode::general, r.w());
                    });
                else if (mode == BoundMode::apriori)
                    attempt(m, [&] {
                        return rk_apriori_bound(fom, r.traj, model_, sub(), tab, kap, RkBoundMode::general, r.w());
                    });
                else if (mode == BoundMode::timestep_independent)
                    attempt(m, [&] {
                        return rk_timestep_independent_apriori(fom, r.traj, model_, sub(), tab, kap,
                                                               cfg_.bounds.omega, r.w());
                    });
                else
                    notes << m << ": not defined for Runge-Kutta schemes\n";
            }
        }
        store_.write("bounds/notes.txt", notes.str());
        plot("bounds", {"error and bounds", "t", "norm", false, true}, series);
    }

    void stage_spectral()
    {
        const Matrix& phi = sub().basis();
        const int p = cfg_.spectral.modes > 0 ? std::min(cfg_.spectral.modes, static_cast<int>(phi.cols()))
                                              : static_cast<int>(phi.cols());
        const Trajectory& fom = *fom_;
        const Vector& x0 = model_.initial_state();
        Matrix coords(fom.num_steps() + 1, p);
        for (int n = 0; n <= fom.num_steps(); ++n)
            coords.row(n) = (phi.leftCols(p).transpose() * (fom.states[n] - x0)).transpose();
        const SpectralReport rep = spectral_analysis(coords, fom.dt);
        store_.write("spectral/psd.csv", render([&](std::ostream& os) { io::write_spectrum(os, rep); }));
        store_.write("spectral/tau95.csv", render([&](std::ostream& os) { io::write_tau95(os, rep); }));
        const IncrementProjectionReport inc =
            relative_increment_projection_error(fom, TrialSubspace(phi.leftCols(p), x0));
        store_.write("spectral/increment_projection.csv", render([&](std::ostream& os) {
                         io::CsvWriter w(os);
                         w.header({"k", "ratio", "zero_increment"});
                         for (std::size_t k = 0; k < inc.ratio.size(); ++k) {
                             w.field(static_cast<long long>(k + 1)).field(inc.ratio[k]).field(inc.zero_increment[k]);
                             w.end_row();
                         }
                     }));
        note("spectral: max increment projection error " + io::format_double(inc.max_ratio));
        PlotSeries t{"tau95", {}, {}};
        for (int m = 0; m < p; ++m)
            if (rep.modes[m].defined) {
                t.x.push_back(m + 1);
                t.y.push_back(rep.modes[m].tau95);
            }
        plot("tau95", {"characteristic time per mode", "mode", "tau95", false, true}, {t});
    }

    const ExperimentConfig& cfg_;
    ArtifactStore& store_;
    std::ostream& log_;
    std::mutex log_mu_;
    Model model_;
    Scheme scheme_;
    std::optional<Trajectory> fom_;
    std::optional<Trajectory> fom_dt_;
    std::optional<SnapshotSet> snaps_;
    std::optional<PodResult> pod_;
    std::optional<RomRun> rom_;
    std::optional<LipschitzEstimate> kappa_;
    std::optional<SweepResult> sweep_;
};

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DimensionError*>(&e))
        return exit_usage;
    return exit_numerical;
}

} // namespace

std::vector<std::string> resolve_stages(const ExperimentConfig& cfg)
{
    std::set<std::string> want(cfg.stages.begin(), cfg.stages.end());
    const bool file_snapshots = !cfg.pod.snapshots.empty();
    for (int pass = 0; pass < 3; ++pass) {
        if (want.count("bounds"))
            want.insert("rom");
        for (const char* s : {"rom", "sweep", "spectral", "bounds"})
            if (want.count(s)) {
                want.insert("pod");
                want.insert("fom");
            }
        if (want.count("pod") && !file_snapshots)
            want.insert("snapshots");
        if (want.count("snapshots"))
            want.insert("fom");
    }
    std::vector<std::string> out;
    for (const auto& s : stage_order())
        if (want.count(s))
            out.push_back(s);
    return out;
}

RunOutcome run_pipeline(const ExperimentConfig& cfg, const RunRequest& req, std::ostream& log)
{
    ArtifactStore store(cfg.out);
    ArtifactStore::Meta meta;
    meta.command = req.command;
    meta.config_path = req.config_path;
    meta.config_text = req.config_text;
    meta.seed = cfg.seed;
    meta.parallel = cfg.parallel;
    RunOutcome outcome;
    std::optional<Pipeline> pipe;
    try {
        pipe.emplace(cfg, store, log);
    } catch (const std::exception& e) {
        outcome = {exit_code_for(e), "setup", e.what()};
    }
    if (pipe) {
        for (const auto& stage : resolve_stages(cfg)) {
            log << "[" << stage << "]\n";
            const auto t0 = Clock::now();
            try {
                pipe->run(stage);
                store.add_stage({stage, "ok", seconds_since(t0), ""});
            } catch (const std::exception& e) {
                store.add_stage({stage, "failed", seconds_since(t0), e.what()});
                outcome = {exit_code_for(e), stage, e.what()};
                break;
            }
        }
    }
    if (outcome.exit_code != exit_ok) {
        meta.status = "failed";
        meta.failed_stage = outcome.failed_stage;
        meta.error = outcome.message;
        log << "stage '" << outcome.failed_stage << "' failed: " << outcome.message << '\n';
    }
    store.write_manifest(meta);
    return outcome;
}

} // namespace morrow::cli
