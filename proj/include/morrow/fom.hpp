#pragma once

#include "morrow/core.hpp"
#include "morrow/schemes.hpp"

#include <functional>
#include <vector>

namespace morrow {

// Data for the residual of LMM step n. history[j-1] holds x^{n-j}.
struct LmmStepContext {
    LmmCoeffs coeffs;
    std::vector<Vector> history;
    int n = 1;
    double dt = 0.0;
    double t0 = 0.0;

    double time(int m) const { return t0 + m * dt; }
};

// states holds x^0..x^{n-1} (at least the last k entries are used).
LmmStepContext make_lmm_context(const LmmScheme& scheme, int n, double dt,
                                const std::vector<Vector>& states, double t0 = 0.0);

// sum_j alpha_j x^{n-j} - dt sum_j beta_j f(x^{n-j}), j >= 1
Vector lmm_history_term(const Model& model, const LmmStepContext& ctx);
Vector lmm_residual(const Model& model, const LmmStepContext& ctx, const Vector& w);
Matrix lmm_residual_jacobian(const Model& model, const LmmStepContext& ctx, const Vector& w);

struct NewtonReport {
    int iterations = 0;
    double residual_norm = 0.0;
};

using ResidualFn = std::function<Vector(const Vector&)>;
using ResidualJacobianFn = std::function<Matrix(const Vector&)>;

// Newton with dense LU; stops when ||r|| <= max(abs_tol, rel_tol*||r(w0)||).
Vector newton_solve(const ResidualFn& r, const ResidualJacobianFn& jac, Vector w0,
                    const SolverOptions& opts, NewtonReport* report = nullptr);

Vector solve_lmm_step(const Model& model, const LmmStepContext& ctx, const SolverOptions& opts,
                      NewtonReport* report = nullptr);

// Stage velocities of one RK step (0-based stage indices).
struct RkStageSet {
    std::vector<Vector> stages;
    Vector base_state;
    double t_prev = 0.0;
    double dt = 0.0;
    ButcherTableau tableau;
};

// x^{n-1} + dt sum_j a_ij w_j
Vector rk_stage_argument(const RkStageSet& set, int i);
Vector rk_stage_residual(const Model& model, const RkStageSet& set, int i);

struct RkStepResult {
    std::vector<Vector> stages;
    Vector next_state;
    int iterations = 0;
};

RkStepResult solve_rk_step(const Model& model, const Vector& base_state, double t_prev,
                           const ButcherTableau& tableau, double dt, const SolverOptions& opts);

// Number of steps T/dt; throws unless integral to 1e-9 relative.
int step_count(double dt, double T);

Trajectory integrate(const Model& model, const Scheme& scheme, double dt, double T,
                     const SolverOptions& opts, double t0 = 0.0);

} // namespace morrow
