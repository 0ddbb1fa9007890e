#include "morrow/core.hpp"

#include <algorithm>
#include <cmath>

namespace morrow {

void require_dim(long got, long expected, const char* what)
{
    if (got != expected)
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                             ", got " + std::to_string(got));
}

Model::Model(int dim, VelocityFn velocity, JacobianFn jacobian, Vector initial_state)
    : dim_(dim), f_(std::move(velocity)), jac_(std::move(jacobian)), x0_(std::move(initial_state))
{
    if (dim_ < 1)
        throw DimensionError("Model: dimension must be positive");
    if (!f_ || !jac_)
        throw Error("Model: velocity and jacobian must be callable");
    require_dim(x0_.size(), dim_, "Model initial state");
}

Vector Model::velocity(const Vector& x, double t) const
{
    require_dim(x.size(), dim_, "Model::velocity");
    return f_(x, t);
}

Matrix Model::jacobian(const Vector& x, double t) const
{
    require_dim(x.size(), dim_, "Model::jacobian");
    return jac_(x, t);
}

TrialSubspace::TrialSubspace(Matrix basis, Vector reference)
    : basis_(std::move(basis)), ref_(std::move(reference))
{
    if (basis_.cols() < 1 || basis_.cols() > basis_.rows())
        throw DimensionError("TrialSubspace: need 1 <= p <= N");
    require_dim(ref_.size(), basis_.rows(), "TrialSubspace reference");
}

const char* to_string(TrajectoryKind k)
{
    switch (k) {
    case TrajectoryKind::full: return "full";
    case TrajectoryKind::galerkin: return "galerkin";
    case TrajectoryKind::lspg: return "lspg";
    }
    return "?";
}

void SolverOptions::validate() const
{
    if (!(newton_abs_tol > 0) || !(newton_rel_tol > 0) || !(fd_step > 0) || !(stagnation_tol > 0))
        throw Error("SolverOptions: tolerances must be positive");
    if (max_iters < 1)
        throw Error("SolverOptions: max_iters must be >= 1");
}

SolverOptions SolverOptions::tight()
{
    SolverOptions o;
    o.newton_abs_tol = 1e-12;
    o.newton_rel_tol = 1e-13;
    o.max_iters = 100;
    return o;
}

Vector reconstruct(const TrialSubspace& sub, const Vector& yhat)
{
    require_dim(yhat.size(), sub.reduced_dim(), "reconstruct");
    return sub.reference() + sub.basis() * yhat;
}

double check_orthonormality(const TrialSubspace& sub)
{
    const Matrix& phi = sub.basis();
    Matrix g = phi.transpose() * phi;
    g -= Matrix::Identity(g.rows(), g.cols());
    return g.cwiseAbs().maxCoeff();
}

Matrix fd_jacobian(const Model& model, const Vector& x, double t, double fd_step)
{
    const int n = model.dim();
    Matrix jac(n, n);
    Vector xp = x;
    for (int j = 0; j < n; ++j) {
        const double h = fd_step * (1.0 + std::abs(x(j)));
        const double hi = x(j) + h, lo = x(j) - h;
        xp(j) = hi;
        Vector fp = model.velocity(xp, t);
        xp(j) = lo;
        Vector fm = model.velocity(xp, t);
        xp(j) = x(j);
        // divide by the representable span, not 2h
        jac.col(j) = (fp - fm) / (hi - lo);
    }
    return jac;
}

double jacobian_fd_check(const Model& model, const Vector& x, double t, double fd_step)
{
    Matrix ref = fd_jacobian(model, x, t, fd_step);
    Matrix jac = model.jacobian(x, t);
    // entries near zero are measured against a floor tied to the largest entry
    const double floor = std::max(1e-3 * ref.cwiseAbs().maxCoeff(), 1e-300);
    double worst = 0.0;
    for (int j = 0; j < ref.cols(); ++j)
        for (int i = 0; i < ref.rows(); ++i) {
            const double denom = std::max(std::abs(ref(i, j)), floor);
            worst = std::max(worst, std::abs(jac(i, j) - ref(i, j)) / denom);
        }
    return worst;
}

} // namespace morrow
