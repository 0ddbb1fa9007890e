#include "morrow/benchmodels.hpp"

#include <cmath>
#include <numbers>

namespace morrow {

void BenchmarkSpec::validate() const
{
    if (n < 4)
        throw Error("BenchmarkSpec: grid size must be >= 4");
    if (viscosity < 0.0)
        throw Error("BenchmarkSpec: viscosity must be >= 0");
    if (!(length > 0.0))
        throw Error("BenchmarkSpec: length must be positive");
    if (boundary != "dirichlet" && boundary != "periodic")
        throw Error("BenchmarkSpec: boundary must be dirichlet or periodic");
    if (advection != "upwind" && advection != "central")
        throw Error("BenchmarkSpec: advection must be upwind or central");
    if (forcing != "none" && forcing != "manufactured")
        throw Error("BenchmarkSpec: forcing must be none or manufactured");
}

Vector Rng::vector(int n, double lo, double hi)
{
    Vector v(n);
    for (int i = 0; i < n; ++i)
        v(i) = uniform(lo, hi);
    return v;
}

Matrix Rng::matrix(int rows, int cols, double lo, double hi)
{
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
            m(i, j) = uniform(lo, hi);
    return m;
}

Matrix random_orthogonal(int n, Rng& rng)
{
    Eigen::HouseholderQR<Matrix> qr(rng.matrix(n, n));
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    // fix the column signs so Q is a function of the draw alone
    const Matrix& r = qr.matrixQR();
    for (int j = 0; j < n; ++j)
        if (r(j, j) < 0.0)
            q.col(j) = -q.col(j);
    return q;
}

namespace {

bool periodic(const BenchmarkSpec& s) { return s.boundary == "periodic"; }

double spacing(const BenchmarkSpec& s) { return periodic(s) ? s.length / s.n : s.length / (s.n + 1); }

} // namespace

Vector grid_nodes(const BenchmarkSpec& spec)
{
    const double dx = spacing(spec);
    Vector x(spec.n);
    for (int i = 0; i < spec.n; ++i)
        x(i) = periodic(spec) ? i * dx : (i + 1) * dx;
    return x;
}

Vector initial_profile(const BenchmarkSpec& spec)
{
    const Vector x = grid_nodes(spec);
    const double L = spec.length;
    const double pi = std::numbers::pi;
    Vector u(spec.n);
    if (spec.initial_profile == "step") {
        const double w = 0.02 * L;
        for (int i = 0; i < spec.n; ++i)
            u(i) = 0.5 * (std::tanh((x(i) - 0.1 * L) / w) - std::tanh((x(i) - 0.4 * L) / w));
    } else if (spec.initial_profile == "sine") {
        const double k = periodic(spec) ? 2.0 : 1.0;
        for (int i = 0; i < spec.n; ++i)
            u(i) = std::sin(k * pi * x(i) / L);
    } else if (spec.initial_profile == "gaussian") {
        const double w = 0.05 * L;
        for (int i = 0; i < spec.n; ++i)
            u(i) = std::exp(-0.5 * std::pow((x(i) - 0.5 * L) / w, 2));
    } else if (spec.initial_profile == "random") {
        Rng rng(spec.seed);
        u = rng.vector(spec.n);
    } else {
        throw Error("BenchmarkSpec: unknown initial profile '" + spec.initial_profile + "'");
    }
    return u;
}

Model burgers1d(const BenchmarkSpec& spec)
{
    spec.validate();
    const int n = spec.n;
    const double dx = spacing(spec);
    const double nu = spec.viscosity;
    const bool per = periodic(spec);
    const bool upwind = spec.advection == "upwind";
    const double uL = spec.left_value, uR = spec.right_value;

    // neighbor values including ghost boundary data
    auto left = [=](const Vector& u, int i) { return i > 0 ? u(i - 1) : (per ? u(n - 1) : uL); };
    auto right = [=](const Vector& u, int i) { return i < n - 1 ? u(i + 1) : (per ? u(0) : uR); };

    auto f = [=](const Vector& u, double) {
        Vector out(n);
        for (int i = 0; i < n; ++i) {
            const double ul = left(u, i), ur = right(u, i), ui = u(i);
            const double adv = upwind ? (ui * ui - ul * ul) / (2.0 * dx) : (ur * ur - ul * ul) / (4.0 * dx);
            out(i) = -adv + nu * (ur - 2.0 * ui + ul) / (dx * dx);
        }
        return out;
    };
    auto jac = [=](const Vector& u, double) {
        Matrix j = Matrix::Zero(n, n);
        const double d = nu / (dx * dx);
        for (int i = 0; i < n; ++i) {
            const int il = i > 0 ? i - 1 : (per ? n - 1 : -1);
            const int ir = i < n - 1 ? i + 1 : (per ? 0 : -1);
            j(i, i) += -2.0 * d;
            if (upwind) {
                j(i, i) += -u(i) / dx;
                if (il >= 0)
                    j(i, il) += u(il) / dx;
            } else {
                if (il >= 0)
                    j(i, il) += u(il) / (2.0 * dx);
                if (ir >= 0)
                    j(i, ir) += -u(ir) / (2.0 * dx);
            }
            if (il >= 0)
                j(i, il) += d;
            if (ir >= 0)
                j(i, ir) += d;
        }
        return j;
    };
    return Model(n, f, jac, initial_profile(spec));
}

Matrix advection_diffusion_operator(const BenchmarkSpec& spec)
{
    spec.validate();
    const int n = spec.n;
    const double dx = spacing(spec);
    const double c = spec.wave_speed;
    const double d = spec.viscosity / (dx * dx);
    const bool per = periodic(spec);
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const int il = i > 0 ? i - 1 : (per ? n - 1 : -1);
        const int ir = i < n - 1 ? i + 1 : (per ? 0 : -1);
        a(i, i) -= 2.0 * d;
        if (il >= 0)
            a(i, il) += d;
        if (ir >= 0)
            a(i, ir) += d;
        // upwind in the direction of the wave speed
        if (c >= 0.0) {
            a(i, i) -= c / dx;
            if (il >= 0)
                a(i, il) += c / dx;
        } else {
            a(i, i) += c / dx;
            if (ir >= 0)
                a(i, ir) -= c / dx;
        }
    }
    return a;
}

Vector manufactured_solution(const BenchmarkSpec& spec, double t)
{
    return std::exp(-t) * initial_profile(spec);
}

Model advection_diffusion(const BenchmarkSpec& spec)
{
    const Matrix a = advection_diffusion_operator(spec);
    const Vector x0 = initial_profile(spec);
    const int n = spec.n;
    if (spec.forcing == "manufactured") {
        // g(t) = x'(t) - A x(t) for x(t) = exp(-t) x0
        const Vector shape = -x0 - a * x0;
        return Model(n, [a, shape](const Vector& x, double t) -> Vector { return a * x + std::exp(-t) * shape; },
                     [a](const Vector&, double) { return a; }, x0);
    }
    return Model(n, [a](const Vector& x, double) -> Vector { return a * x; },
                 [a](const Vector&, double) { return a; }, x0);
}

Matrix gradient_flow_matrix(const BenchmarkSpec& spec)
{
    const int n = spec.n;
    Vector lambda(n);
    if (!spec.spectrum.empty()) {
        if (static_cast<int>(spec.spectrum.size()) != n)
            throw Error("BenchmarkSpec: spectrum length must equal n");
        for (int i = 0; i < n; ++i)
            lambda(i) = spec.spectrum[i];
    } else {
        if (!(spec.lambda_min > 0.0) || spec.lambda_max < spec.lambda_min)
            throw Error("BenchmarkSpec: need 0 < lambda_min <= lambda_max");
        const double ratio = spec.lambda_max / spec.lambda_min;
        for (int i = 0; i < n; ++i)
            lambda(i) = spec.lambda_min * std::pow(ratio, static_cast<double>(i) / (n - 1));
    }
    if (lambda.minCoeff() <= 0.0)
        throw Error("BenchmarkSpec: gradient-flow spectrum must be positive");
    Rng rng(spec.seed);
    const Matrix q = random_orthogonal(n, rng);
    Matrix a = q * lambda.asDiagonal() * q.transpose();
    return 0.5 * (a + a.transpose());
}

Model gradient_flow_spd(const BenchmarkSpec& spec)
{
    if (spec.n < 4)
        throw Error("BenchmarkSpec: grid size must be >= 4");
    const Matrix a = gradient_flow_matrix(spec);
    Rng rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    const Vector x0 = rng.vector(spec.n);
    return Model(spec.n, [a](const Vector& x, double) -> Vector { return -(a * x); },
                 [a](const Vector&, double) -> Matrix { return -a; }, x0);
}

Model make_benchmark(const BenchmarkSpec& spec)
{
    if (spec.name == "burgers")
        return burgers1d(spec);
    if (spec.name == "advection_diffusion")
        return advection_diffusion(spec);
    if (spec.name == "gradient_flow")
        return gradient_flow_spd(spec);
    throw Error("unknown benchmark model '" + spec.name + "'");
}

} // namespace morrow
