#pragma once

#include "morrow/core.hpp"
#include "morrow/fom.hpp"
#include "morrow/schemes.hpp"

#include <functional>
#include <vector>

namespace morrow {

// Constant weighting matrix A of the LSPG objective ||A r||^2.
class WeightingOperator {
public:
    enum class Kind { scaled_identity, collocation, gappy_pod, dense };

    static WeightingOperator scaled_identity(int n, double gamma = 1.0);
    static WeightingOperator collocation(int n, std::vector<int> rows);
    // (Z Phi_r)^+ Z; rows may come in any order. Throws RankDeficiencyError.
    static WeightingOperator gappy_pod(std::vector<int> rows, const Matrix& residual_basis);
    static WeightingOperator dense(Matrix w);

    Kind kind() const { return kind_; }
    int rows() const;
    int cols() const { return n_; }
    double gamma() const { return gamma_; }
    const std::vector<int>& sample_rows() const { return rows_; }

    Vector apply(const Vector& v) const;
    Matrix apply(const Matrix& m) const;
    Vector apply_transpose(const Vector& z) const;
    Matrix apply_transpose(const Matrix& z) const;
    Matrix to_dense() const;

private:
    Kind kind_ = Kind::scaled_identity;
    int n_ = 0;
    double gamma_ = 1.0;
    std::vector<int> rows_;
    Matrix mat_;  // pseudo-inverse for gappy_pod, full matrix for dense
};

const char* to_string(WeightingOperator::Kind k);

struct GaussNewtonReport {
    int iterations = 0;
    std::vector<double> objective;  // ||W r||^2 per iterate, starting with the initial guess
    bool converged = false;
    double grad_norm = 0.0;
};

// Receives the unweighted residual at each Gauss-Newton linearization point.
using ResidualObserver = std::function<void(const Vector&)>;

struct LeastSquaresProblem {
    std::function<Vector(const Vector&)> residual;  // stacked unweighted residual
    std::function<Matrix(const Vector&)> jacobian;  // its derivative w.r.t. the unknowns
    int blocks = 1;                                 // W applies per block of the stack
};

// Gauss-Newton with Armijo backtracking (c = 1e-4, halving, <= 30 backtracks), QR subproblems.
Vector gauss_newton(const LeastSquaresProblem& prob, const WeightingOperator& w, Vector y0,
                    const SolverOptions& opts, GaussNewtonReport& report,
                    const ResidualObserver& observer = nullptr);

// Context with history lifted to x0 + Phi y for the reduced states y^0..y^{n-1}.
LmmStepContext lifted_lmm_context(const LmmScheme& scheme, int n, double dt, const TrialSubspace& sub,
                                  const std::vector<Vector>& rom_states, double t0 = 0.0);

double lspg_objective(const Model& model, const TrialSubspace& sub, const WeightingOperator& w,
                      const LmmStepContext& ctx, const Vector& yhat);

struct LspgStepResult {
    Vector yhat;
    GaussNewtonReport report;
};

// ctx carries full-space history; guess defaults to zero when empty.
LspgStepResult solve_lspg_step_lmm(const Model& model, const TrialSubspace& sub, const WeightingOperator& w,
                                   const LmmStepContext& ctx, const SolverOptions& opts,
                                   const Vector& guess = Vector(), const ResidualObserver& observer = nullptr);

// Psi = W^T W (alpha_0 I - dt beta_0 J) Phi at x0 + Phi yhat.
Matrix compute_test_basis(const Model& model, const TrialSubspace& sub, const WeightingOperator& w,
                          const LmmStepContext& ctx, const Vector& yhat);

// Stage i of a stagewise RK LSPG step; prev_stages holds reduced velocities of stages < i.
struct LspgStageContext {
    Vector base_state;  // full-space x^{n-1}
    std::vector<Vector> prev_stages;
    int i = 0;
    double t_prev = 0.0;
    double dt = 0.0;
    ButcherTableau tableau;
};

Vector lspg_stage_argument(const TrialSubspace& sub, const LspgStageContext& ctx, const Vector& yhat);

LspgStepResult solve_lspg_rk_stage(const Model& model, const TrialSubspace& sub, const WeightingOperator& w,
                                   const LspgStageContext& ctx, const SolverOptions& opts,
                                   const Vector& guess = Vector(), const ResidualObserver& observer = nullptr);

struct LspgCoupledResult {
    std::vector<Vector> stages;
    GaussNewtonReport report;
};

LspgCoupledResult solve_lspg_rk_coupled(const Model& model, const TrialSubspace& sub, const WeightingOperator& w,
                                        const Vector& base_state, double t_prev, const ButcherTableau& tableau,
                                        double dt, const SolverOptions& opts,
                                        const ResidualObserver& observer = nullptr);

// Full-space argument x^{n-1} + dt sum_j a_ij Phi w_j of stage i for reduced stages.
Vector rom_stage_argument(const TrialSubspace& sub, const Vector& base_state, const std::vector<Vector>& stages,
                          const ButcherTableau& tableau, double dt, int i);

// Psi_ie = W^T W (delta_ie I - dt a_ie J_i) Phi with J_i at the stage argument.
Matrix rk_stage_test_basis(const Model& model, const TrialSubspace& sub, const WeightingOperator& w,
                           const Vector& base_state, const std::vector<Vector>& stages, const ButcherTableau& tableau,
                           double t_prev, double dt, int i, int e);

enum class RkLspgMode { automatic, stagewise, coupled };

struct LspgResult {
    Trajectory traj;
    std::vector<GaussNewtonReport> reports;  // one per step
};

LspgResult integrate_lspg(const Model& model, const TrialSubspace& sub, const WeightingOperator& w,
                          const Scheme& scheme, double dt, double T, const SolverOptions& opts,
                          RkLspgMode mode = RkLspgMode::automatic, const ResidualObserver& observer = nullptr);

} // namespace morrow
