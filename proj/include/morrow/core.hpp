#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace morrow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using VelocityFn = std::function<Vector(const Vector&, double)>;
using JacobianFn = std::function<Matrix(const Vector&, double)>;

// Error hierarchy. Every failure raised by the library derives from Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// A precondition stated by a theorem or algorithm does not hold.
class HypothesisError : public Error {
public:
    using Error::Error;
};

class RankDeficiencyError : public Error {
public:
    RankDeficiencyError(const std::string& what, double smallest_sv)
        : Error(what), smallest_singular_value(smallest_sv) {}
    double smallest_singular_value;
};

// Newton / Gauss-Newton did not converge. step is the time index when known.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, Vector last, double resnorm, int step = -1)
        : Error(what), last_iterate(std::move(last)), residual_norm(resnorm), step(step) {}
    Vector last_iterate;
    double residual_norm;
    int step;
};

void require_dim(long got, long expected, const char* what);

// The full-order model dx/dt = f(x,t).
class Model {
public:
    Model(int dim, VelocityFn velocity, JacobianFn jacobian, Vector initial_state);

    int dim() const { return dim_; }
    Vector velocity(const Vector& x, double t) const;
    Matrix jacobian(const Vector& x, double t) const;
    const Vector& initial_state() const { return x0_; }

private:
    int dim_;
    VelocityFn f_;
    JacobianFn jac_;
    Vector x0_;
};

// Affine trial subspace x0 + range(basis).
class TrialSubspace {
public:
    TrialSubspace(Matrix basis, Vector reference);

    const Matrix& basis() const { return basis_; }
    const Vector& reference() const { return ref_; }
    int full_dim() const { return static_cast<int>(basis_.rows()); }
    int reduced_dim() const { return static_cast<int>(basis_.cols()); }

private:
    Matrix basis_;
    Vector ref_;
};

enum class TrajectoryKind { full, galerkin, lspg };
const char* to_string(TrajectoryKind k);

struct Trajectory {
    double dt = 0.0;
    double t0 = 0.0;
    TrajectoryKind kind = TrajectoryKind::full;
    std::vector<Vector> states;
    // Runge-Kutta runs only: stage velocities of step n stored at stages[n-1].
    std::vector<std::vector<Vector>> stages;

    int num_steps() const { return static_cast<int>(states.size()) - 1; }
    double time(int n) const { return t0 + n * dt; }
};

struct SolverOptions {
    double newton_abs_tol = 1e-10;
    double newton_rel_tol = 1e-3;
    int max_iters = 50;
    double fd_step = 1e-6;
    // Gauss-Newton stops once its step is below stagnation_tol * (1 + ||y||).
    double stagnation_tol = 1e-12;
    bool line_search = true;

    void validate() const;
    // Tight profile used by equivalence checks.
    static SolverOptions tight();
};

Vector reconstruct(const TrialSubspace& sub, const Vector& yhat);
double check_orthonormality(const TrialSubspace& sub);

// Central-difference Jacobian with per-component step fd_step*(1+|x_i|).
Matrix fd_jacobian(const Model& model, const Vector& x, double t, double fd_step = 1e-6);
double jacobian_fd_check(const Model& model, const Vector& x, double t, double fd_step = 1e-6);

} // namespace morrow
