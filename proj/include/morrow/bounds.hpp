#pragma once

#include "morrow/core.hpp"
#include "morrow/fom.hpp"
#include "morrow/lspg.hpp"
#include "morrow/schemes.hpp"

#include <string>
#include <vector>

namespace morrow {

struct LipschitzEstimate {
    double kappa = 0.0;
    double secant_max = 0.0;
    double jacobian_max = 0.0;
    int samples = 0;
};

// Sampled local estimate: secant quotients over all sample pairs and ||J||_2 at every sample.
LipschitzEstimate estimate_lipschitz(const Model& model, const std::vector<Vector>& samples,
                                     const std::vector<double>& times);

enum class BoundMode { aposteriori, apriori, simplified, timestep_independent, residual_form };
const char* to_string(BoundMode m);

// Per-step projection terms of the LMM bounds for one ROM run.
// Step m (1-based) lives at index m-1; proj[m-1][l] is the projection error of f at state m-l.
struct LmmLocalTerms {
    TrajectoryKind kind = TrajectoryKind::galerkin;
    bool apriori = false;
    double dt = 0.0;
    double kappa = 0.0;
    int k = 1;
    std::vector<LmmCoeffs> coeffs;
    std::vector<std::vector<double>> proj;
    std::vector<double> projector_norm;  // ||P^m||_2 for a priori LSPG, else 1
    std::vector<double> residual_norm;   // ||rbar^m|| at the ROM state (a posteriori only)
    // derived by fill_coefficients
    std::vector<double> h;
    std::vector<std::vector<double>> gamma1;
    std::vector<std::vector<double>> gamma2;

    int steps() const { return static_cast<int>(coeffs.size()); }
    // sum_l gamma1 * proj at every step
    std::vector<double> source() const;
};

// h^m = |alpha_0| - |beta_0| kappa dt ||P^m||, gamma1 = |beta_l| dt / h, gamma2 = (|alpha_l| + |beta_l| kappa dt ||P^m||) / h.
void fill_coefficients(LmmLocalTerms& terms);

// Projection norms of an oblique projector Phi (Psi^T Phi)^{-1} Psi^T.
Matrix oblique_projector(const Matrix& phi, const Matrix& psi);
double oblique_projector_norm(const Matrix& phi, const Matrix& psi);

LmmLocalTerms local_aposteriori_lmm(const Trajectory& rom, const Model& model, const TrialSubspace& sub,
                                    const LmmScheme& scheme, double kappa, const WeightingOperator* w = nullptr);

// Terms evaluated at FOM states; LSPG projectors still come from the ROM run.
LmmLocalTerms local_apriori_lmm(const Trajectory& fom, const Trajectory& rom, const Model& model,
                                const TrialSubspace& sub, const LmmScheme& scheme, double kappa,
                                const WeightingOperator* w = nullptr);

// Local bound at every step given measured previous errors ||dx^0..dx^n||.
std::vector<double> local_bound_with_errors(const LmmLocalTerms& terms, const std::vector<double>& errors);

struct BoundReport {
    BoundMode mode = BoundMode::aposteriori;
    TrajectoryKind kind = TrajectoryKind::galerkin;
    double kappa = 0.0;
    double dt = 0.0;
    // one entry per step n = 1..N at index n-1
    std::vector<double> term_projection;
    std::vector<double> coeff;
    std::vector<double> local_bound;
    std::vector<double> per_step_bound;
    double global_bound = 0.0;
    // audit constants (NaN when not applicable)
    double alpha0_star = 0.0, beta0_star = 0.0, alpha_star = 0.0, beta_star = 0.0, beta_max = 0.0;
    double projector_norm0_star = 1.0, projector_norm_star = 1.0;
    double eps = 0.0;
    int ell_star = 0;
    Matrix d;       // RK only
    double amplification = 0.0;
    std::vector<std::string> notes;
};

// Forward recursion B^n = sum_l gamma1 proj + sum_{l>=1} gamma2 B^{n-l}, B^0 = 0.
BoundReport global_aposteriori_lmm(const LmmLocalTerms& terms);

BoundReport simplified_global_bounds(const LmmLocalTerms& terms, BoundMode mode, double eps = 0.5);

// dt sum_{j<n} h^{-(j+1)} ||(I - Proj) f(state n-j)|| with h = 1 - kappa dt.
BoundReport backward_euler_aposteriori(const Trajectory& rom, const Model& model, const TrialSubspace& sub,
                                       double kappa, const WeightingOperator* w = nullptr);

struct AuxiliaryIncrementReport {
    double dt = 0.0;
    double kappa = 0.0;
    double h = 0.0;
    // step j = 1..n at index j-1
    std::vector<double> mu;
    std::vector<double> mu_bar;
    std::vector<char> degenerate;
    std::vector<double> f_norm;         // ||f(x0 + xbar^j)||
    std::vector<double> bound;          // increment-ratio form
    std::vector<double> bound_absolute; // absolute-increment form
    std::vector<Vector> aux_states;     // centered xbar^j
};

AuxiliaryIncrementReport auxiliary_increment_bound(const Model& model, const Trajectory& lspg, const TrialSubspace& sub,
                                                   double dt, double kappa, const SolverOptions& opts);

enum class RkBoundMode { general, stagewise };

BoundReport rk_aposteriori_bound(const Trajectory& rom, const Model& model, const TrialSubspace& sub,
                                 const ButcherTableau& tableau, double kappa, RkBoundMode mode,
                                 const WeightingOperator* w = nullptr);

BoundReport rk_apriori_bound(const Trajectory& fom, const Trajectory& rom, const Model& model,
                             const TrialSubspace& sub, const ButcherTableau& tableau, double kappa,
                             RkBoundMode mode, const WeightingOperator* w = nullptr);

// (exp(t kappa b* s^{3/2} / omega) - 1) / kappa times the max a priori stage projection term.
BoundReport rk_timestep_independent_apriori(const Trajectory& fom, const Trajectory& rom, const Model& model,
                                            const TrialSubspace& sub, const ButcherTableau& tableau, double kappa,
                                            double omega = 0.5, const WeightingOperator* w = nullptr);

// Convenience entry point for the a priori LMM recursion.
BoundReport apriori_bounds_lmm(const Trajectory& fom, const Trajectory& rom, const Model& model,
                               const TrialSubspace& sub, const LmmScheme& scheme, double kappa,
                               const WeightingOperator* w = nullptr);

// ||dx^n|| for every n: (x_fom^n - x0) - Phi y^n.
std::vector<double> rom_errors(const Trajectory& fom, const Trajectory& rom, const TrialSubspace& sub);

// expm1(x)/x with the x -> 0 limit.
double expm1_ratio(double x);

} // namespace morrow
