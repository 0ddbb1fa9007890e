#include "doctest.h"
#include "support.hpp"

#include "morrow/benchmodels.hpp"
#include "morrow/fom.hpp"
#include "morrow/schemes.hpp"

#include <cmath>

using namespace morrow;
using testing_support::linear_model;
using testing_support::random_basis;

TEST_SUITE("core")
{
    TEST_CASE("reconstruct")
    {
        TrialSubspace id(Matrix::Identity(2, 2), Vector::Zero(2));
        CHECK((reconstruct(id, Vector::LinSpaced(2, 1, 2)) - Vector::LinSpaced(2, 1, 2)).norm() == 0.0);

        const Vector x0 = Vector::Ones(4);
        TrialSubspace sub(Matrix::Identity(4, 2), x0);
        CHECK(reconstruct(sub, Vector::Zero(2)) == x0);
        Vector y(2);
        y << 2, 3;
        Vector expected(4);
        expected << 3, 4, 1, 1;
        CHECK(reconstruct(sub, y) == expected);
        CHECK_THROWS_AS(reconstruct(sub, Vector::Zero(3)), DimensionError);
    }

    TEST_CASE("reconstruct inverts projection on the subspace and is affine")
    {
        const Matrix phi = random_basis(12, 4, 3);
        Rng rng(5);
        const Vector x0 = rng.vector(12);
        TrialSubspace sub(phi, x0);
        const Vector y = rng.vector(4);
        const Vector x = x0 + phi * y;
        CHECK((reconstruct(sub, phi.transpose() * (x - x0)) - x).norm() <= 1e-10);

        const Vector y1 = rng.vector(4), y2 = rng.vector(4);
        const double a = 0.7, b = -1.3;
        const Vector lhs = reconstruct(sub, a * y1 + b * y2) - x0;
        const Vector rhs = a * (reconstruct(sub, y1) - x0) + b * (reconstruct(sub, y2) - x0);
        CHECK((lhs - rhs).norm() <= 1e-12);
    }

    TEST_CASE("check_orthonormality")
    {
        CHECK(check_orthonormality(TrialSubspace(Matrix::Identity(5, 3), Vector::Zero(5))) == 0.0);
        Matrix dup(2, 2);
        dup << 1, 1, 0, 0;
        CHECK(check_orthonormality(TrialSubspace(dup, Vector::Zero(2))) == doctest::Approx(1.0));
        CHECK(check_orthonormality(TrialSubspace(random_basis(10, 3, 11), Vector::Zero(10))) <= 1e-12);
    }

    TEST_CASE("subspace dimension limits")
    {
        CHECK_THROWS_AS(TrialSubspace(Matrix::Zero(3, 0), Vector::Zero(3)), DimensionError);
        CHECK_THROWS_AS(TrialSubspace(Matrix::Zero(3, 4), Vector::Zero(3)), DimensionError);
    }

    TEST_CASE("jacobian_fd_check")
    {
        Rng rng(1);
        const Matrix a = rng.matrix(6, 6);
        const Model lin = linear_model(a, Vector::Zero(6));
        const Vector x = rng.vector(6);
        // no truncation error for a linear map, so a wide step isolates roundoff
        CHECK(jacobian_fd_check(lin, x, 0.0, 1e-3) <= 1e-10);
        CHECK(jacobian_fd_check(lin, x, 0.0) <= 1e-8);

        const Model burgers = burgers1d(testing_support::small_burgers(32));
        CHECK(jacobian_fd_check(burgers, rng.vector(32), 0.0) <= 1e-5);

        const Model wrong(
            6, [a](const Vector& x, double) -> Vector { return a * x; },
            [a](const Vector&, double) -> Matrix { return 2.0 * a; }, Vector::Zero(6));
        CHECK(jacobian_fd_check(wrong, rng.vector(6), 0.0) == doctest::Approx(1.0).epsilon(1e-6));
    }

    TEST_CASE("solver options validation")
    {
        SolverOptions o;
        CHECK(o.newton_rel_tol == 1e-3);
        CHECK_NOTHROW(o.validate());
        o.max_iters = 0;
        CHECK_THROWS_AS(o.validate(), Error);
        o = SolverOptions{};
        o.newton_abs_tol = 0.0;
        CHECK_THROWS_AS(o.validate(), Error);
    }
}

TEST_SUITE("schemes")
{
    TEST_CASE("lmm coefficient tables")
    {
        const LmmScheme be = make_lmm("backward_euler");
        CHECK(be.k() == 1);
        const LmmCoeffs& c = be.coeffs(5);
        CHECK(c.alpha == std::vector<double>{1, -1});
        CHECK(c.beta == std::vector<double>{1, 0});

        const LmmScheme fe = make_lmm("forward_euler");
        CHECK(fe.coeffs(1).alpha == std::vector<double>{1, -1});
        CHECK(fe.coeffs(1).beta == std::vector<double>{0, 1});

        const LmmScheme bdf2 = make_lmm("bdf2");
        CHECK(bdf2.k() == 2);
        CHECK(bdf2.coeffs(1).k() == 1);  // backward-Euler startup
        const LmmCoeffs& s = bdf2.coeffs(2);
        CHECK(s.alpha[0] == 1.0);
        CHECK(s.alpha[1] == doctest::Approx(-4.0 / 3.0));
        CHECK(s.alpha[2] == doctest::Approx(1.0 / 3.0));
        CHECK(s.beta[0] == doctest::Approx(2.0 / 3.0));
        CHECK(s.beta[1] == 0.0);
        CHECK(s.beta[2] == 0.0);
        CHECK_THROWS_AS(make_lmm("adams"), Error);
    }

    TEST_CASE("lmm consistency at every index")
    {
        for (const char* name : {"backward_euler", "forward_euler", "bdf2"}) {
            const LmmScheme s = make_lmm(name);
            for (int n = 1; n <= 100; ++n) {
                const auto& c = s.coeffs(n);
                double sum = 0.0;
                for (double a : c.alpha)
                    sum += a;
                CHECK(std::abs(sum) <= 1e-14);
                CHECK(c.alpha[0] != 0.0);
            }
        }
    }

    TEST_CASE("butcher tableaus")
    {
        const ButcherTableau ee = make_butcher("explicit_euler");
        CHECK(ee.s == 1);
        CHECK(ee.a(0, 0) == 0.0);
        CHECK(ee.b(0) == 1.0);
        const ButcherTableau mid = make_butcher("implicit_midpoint");
        CHECK(mid.a(0, 0) == 0.5);
        CHECK(mid.c(0) == 0.5);

        const ButcherTableau sd = make_butcher("sdirk2");
        const double g = 1.0 - 1.0 / std::sqrt(2.0);
        CHECK(sd.a(0, 0) == doctest::Approx(g));
        CHECK(sd.a(1, 0) == doctest::Approx(1.0 - g));
        // order conditions
        CHECK(std::abs(sd.b.sum() - 1.0) <= 1e-14);
        CHECK(std::abs(sd.b.dot(sd.c) - 0.5) <= 1e-14);

        for (const char* name : {"explicit_euler", "rk4", "implicit_midpoint", "backward_euler", "sdirk2", "gauss2"}) {
            const ButcherTableau t = make_butcher(name);
            CHECK(std::abs(t.b.sum() - 1.0) <= 1e-14);
            CHECK((t.a.rowwise().sum() - t.c).cwiseAbs().maxCoeff() <= 1e-14);
        }
        CHECK_THROWS_AS(make_butcher("rk45"), Error);
    }

    TEST_CASE("classify")
    {
        CHECK(classify(make_butcher("rk4")).tag == SchemeTag::explicit_rk);
        CHECK(classify(make_butcher("explicit_euler")).tag == SchemeTag::explicit_rk);
        const SchemeClass sd = classify(make_butcher("sdirk2"));
        CHECK(sd.tag == SchemeTag::sdirk);
        CHECK(sd.diagonal_value == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)));
        const SchemeClass mid = classify(make_butcher("implicit_midpoint"));
        CHECK(mid.tag == SchemeTag::sdirk);
        CHECK(mid.diagonal_value == 0.5);
        CHECK(classify(make_butcher("gauss2")).tag == SchemeTag::fully_implicit);

        ButcherTableau dirk = make_butcher("sdirk2");
        dirk.a(1, 1) = 0.4;
        dirk.c(1) = dirk.a.row(1).sum();
        CHECK(classify(dirk).tag == SchemeTag::dirk);
    }
}

TEST_SUITE("fom")
{
    TEST_CASE("lmm residual hand evaluation")
    {
        const Model m = testing_support::scalar_decay();
        const LmmScheme be = make_lmm("backward_euler");
        const LmmStepContext ctx = make_lmm_context(be, 1, 0.1, {Vector::Ones(1)});
        CHECK(lmm_residual(m, ctx, Vector::Ones(1))(0) == doctest::Approx(0.1));

        const Vector w = solve_lmm_step(m, ctx, SolverOptions::tight());
        CHECK(std::abs(w(0) - 1.0 / 1.1) <= 1e-12);
        CHECK(std::abs(lmm_residual(m, ctx, w)(0)) <= 1e-12);

        const LmmStepContext zero = make_lmm_context(be, 1, 0.0, {Vector::Constant(1, 0.3)});
        CHECK(lmm_residual(m, zero, Vector::Constant(1, 0.3))(0) == 0.0);
    }

    TEST_CASE("lmm residual jacobian")
    {
        Rng rng(2);
        const Matrix a = rng.matrix(5, 5);
        const Model lin = linear_model(a, Vector::Zero(5));
        const LmmStepContext ex = make_lmm_context(make_lmm("forward_euler"), 1, 0.1, {rng.vector(5)});
        CHECK(lmm_residual_jacobian(lin, ex, rng.vector(5)) == Matrix::Identity(5, 5));

        const LmmStepContext be = make_lmm_context(make_lmm("backward_euler"), 1, 0.1, {rng.vector(5)});
        CHECK((lmm_residual_jacobian(lin, be, rng.vector(5)) - (Matrix::Identity(5, 5) - 0.1 * a)).norm() <= 1e-14);

        // finite-difference oracle on a nonlinear model with BDF2 history
        const Model burgers = burgers1d(testing_support::small_burgers(16));
        const LmmScheme bdf2 = make_lmm("bdf2");
        const std::vector<Vector> hist{rng.vector(16), rng.vector(16)};
        const LmmStepContext ctx = make_lmm_context(bdf2, 2, 0.01, hist);
        const Vector w = rng.vector(16);
        const Matrix jac = lmm_residual_jacobian(burgers, ctx, w);
        Matrix fd(16, 16);
        for (int j = 0; j < 16; ++j) {
            const double h = 1e-6 * (1 + std::abs(w(j)));
            Vector wp = w, wm = w;
            wp(j) += h;
            wm(j) -= h;
            fd.col(j) = (lmm_residual(burgers, ctx, wp) - lmm_residual(burgers, ctx, wm)) / (2 * h);
        }
        CHECK((jac - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff() <= 1e-5);
    }

    TEST_CASE("forward Euler is a direct update")
    {
        const Model m = testing_support::scalar_decay();
        const Trajectory tr = integrate(m, make_scheme("forward_euler"), 0.1, 0.3, SolverOptions{});
        CHECK(tr.num_steps() == 3);
        CHECK(tr.states[3](0) == doctest::Approx(std::pow(0.9, 3)).epsilon(1e-14));
    }

    TEST_CASE("BDF2 on a scalar ODE matches a hand recursion")
    {
        const Model m = testing_support::scalar_decay();
        const double dt = 0.05;
        const Trajectory tr = integrate(m, make_scheme("bdf2"), dt, 0.5, SolverOptions::tight());
        // startup BE, then (1 + 2dt/3) x^n = 4/3 x^{n-1} - 1/3 x^{n-2}
        std::vector<double> x{1.0, 1.0 / (1.0 + dt)};
        for (int n = 2; n <= 10; ++n)
            x.push_back((4.0 / 3.0 * x[n - 1] - 1.0 / 3.0 * x[n - 2]) / (1.0 + 2.0 * dt / 3.0));
        for (int n = 0; n <= 10; ++n)
            CHECK(std::abs(tr.states[n](0) - x[n]) <= 1e-12);
    }

    TEST_CASE("RK steps")
    {
        const Model m = testing_support::scalar_decay();
        const double dt = 0.1;
        // rk4 one step: stability polynomial
        const Trajectory rk4 = integrate(m, make_scheme("rk4", "rk"), dt, dt, SolverOptions{});
        const double z = -dt;
        CHECK(rk4.states[1](0) == doctest::Approx(1 + z + z * z / 2 + z * z * z / 6 + z * z * z * z / 24).epsilon(1e-14));
        CHECK(rk4.stages.size() == 1);
        CHECK(rk4.stages[0].size() == 4);

        const Trajectory mid = integrate(m, make_scheme("implicit_midpoint", "rk"), dt, dt, SolverOptions::tight());
        CHECK(std::abs(mid.states[1](0) - (1 + z / 2) / (1 - z / 2)) <= 1e-12);

        const Trajectory g2 = integrate(m, make_scheme("gauss2", "rk"), dt, dt, SolverOptions::tight());
        const double pade = (1 + z / 2 + z * z / 12) / (1 - z / 2 + z * z / 12);
        CHECK(std::abs(g2.states[1](0) - pade) <= 1e-12);

        const Trajectory sd = integrate(m, make_scheme("sdirk2", "rk"), dt, dt, SolverOptions::tight());
        for (int i = 0; i < 2; ++i) {
            RkStageSet set{sd.stages[0], m.initial_state(), 0.0, dt, make_butcher("sdirk2")};
            CHECK(rk_stage_residual(m, set, i).norm() <= 1e-12);
        }
    }

    TEST_CASE("step count and initial state")
    {
        CHECK(step_count(0.1, 1.0) == 10);
        CHECK(step_count(0.1, 0.0) == 0);
        CHECK_THROWS_AS(step_count(0.3, 1.0), Error);
        const Model m = testing_support::scalar_decay();
        const Trajectory tr = integrate(m, make_scheme("bdf2"), 0.1, 0.0, SolverOptions{});
        CHECK(tr.states.size() == 1);
        CHECK(tr.states[0] == m.initial_state());
        CHECK(tr.kind == TrajectoryKind::full);
    }

    TEST_CASE("Newton failure reports the time index")
    {
        // x' = x^2 blows up; tiny iteration cap forces failure
        const Model m(
            1, [](const Vector& x, double) -> Vector { return x.array().square().matrix(); },
            [](const Vector& x, double) -> Matrix { return Matrix::Constant(1, 1, 2 * x(0)); }, Vector::Constant(1, 5.0));
        SolverOptions o = SolverOptions::tight();
        o.max_iters = 1;
        try {
            integrate(m, make_scheme("backward_euler"), 0.01, 0.05, o);
            FAIL("expected ConvergenceError");
        } catch (const ConvergenceError& e) {
            CHECK(e.step == 1);
        }
    }
}
