#pragma once

#include "morrow/core.hpp"
#include "morrow/fom.hpp"
#include "morrow/schemes.hpp"

namespace morrow {

// Reduced model y' = Phi^T f(x0 + Phi y, t), y(0) = 0.
struct GalerkinModel {
    Model reduced;
    Model parent;
    TrialSubspace sub;

    operator const Model&() const { return reduced; }
};

GalerkinModel make_galerkin_model(const Model& model, const TrialSubspace& sub);

Vector galerkin_reduced_residual_lmm(const GalerkinModel& gm, const LmmStepContext& ctx, const Vector& what);
Vector galerkin_reduced_residual_rk(const GalerkinModel& gm, const RkStageSet& stages, int i);

Trajectory integrate_galerkin(const Model& model, const TrialSubspace& sub, const Scheme& scheme, double dt,
                              double T, const SolverOptions& opts);

// Lift a reduced trajectory to the full space through x0 + Phi y.
Trajectory lift(const Trajectory& rom, const TrialSubspace& sub);

} // namespace morrow
