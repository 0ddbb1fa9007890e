#include "morrow/galerkin.hpp"

namespace morrow {

GalerkinModel make_galerkin_model(const Model& model, const TrialSubspace& sub)
{
    require_dim(sub.full_dim(), model.dim(), "make_galerkin_model");
    if (check_orthonormality(sub) > 1e-10)
        throw HypothesisError("make_galerkin_model: trial basis is not orthonormal");
    const Matrix phi = sub.basis();
    const Vector x0 = sub.reference();
    const int p = sub.reduced_dim();
    Model reduced(
        p,
        [model, phi, x0](const Vector& y, double t) -> Vector {
            return phi.transpose() * model.velocity(x0 + phi * y, t);
        },
        [model, phi, x0](const Vector& y, double t) -> Matrix {
            return phi.transpose() * (model.jacobian(x0 + phi * y, t) * phi);
        },
        Vector::Zero(p));
    return GalerkinModel{std::move(reduced), model, sub};
}

Vector galerkin_reduced_residual_lmm(const GalerkinModel& gm, const LmmStepContext& ctx, const Vector& what)
{
    return lmm_residual(gm.reduced, ctx, what);
}

Vector galerkin_reduced_residual_rk(const GalerkinModel& gm, const RkStageSet& stages, int i)
{
    return rk_stage_residual(gm.reduced, stages, i);
}

Trajectory integrate_galerkin(const Model& model, const TrialSubspace& sub, const Scheme& scheme, double dt,
                              double T, const SolverOptions& opts)
{
    GalerkinModel gm = make_galerkin_model(model, sub);
    Trajectory traj = integrate(gm.reduced, scheme, dt, T, opts);
    traj.kind = TrajectoryKind::galerkin;
    return traj;
}

Trajectory lift(const Trajectory& rom, const TrialSubspace& sub)
{
    Trajectory out;
    out.dt = rom.dt;
    out.t0 = rom.t0;
    out.kind = rom.kind;
    out.states.reserve(rom.states.size());
    for (const auto& y : rom.states)
        out.states.push_back(reconstruct(sub, y));
    for (const auto& step : rom.stages) {
        std::vector<Vector> lifted;
        for (const auto& w : step)
            lifted.push_back(sub.basis() * w);
        out.stages.push_back(std::move(lifted));
    }
    return out;
}

} // namespace morrow
