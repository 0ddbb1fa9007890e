#pragma once

#include "morrow/benchmodels.hpp"
#include "morrow/core.hpp"

namespace testing_support {

using morrow::Matrix;
using morrow::Model;
using morrow::Vector;

inline Model linear_model(const Matrix& a, const Vector& x0)
{
    return Model(
        static_cast<int>(a.rows()), [a](const Vector& x, double) -> Vector { return a * x; },
        [a](const Vector&, double) -> Matrix { return a; }, x0);
}

inline Model scalar_decay()
{
    Matrix a(1, 1);
    a(0, 0) = -1.0;
    return linear_model(a, Vector::Ones(1));
}

// Orthonormal columns from the QR factor of a seeded random matrix.
inline Matrix random_basis(int n, int p, std::uint64_t seed)
{
    morrow::Rng rng(seed);
    Eigen::HouseholderQR<Matrix> qr(rng.matrix(n, p));
    return qr.householderQ() * Matrix::Identity(n, p);
}

inline morrow::BenchmarkSpec small_burgers(int n = 64)
{
    morrow::BenchmarkSpec s;
    s.name = "burgers";
    s.n = n;
    s.viscosity = 0.01;
    s.initial_profile = "sine";
    return s;
}

} // namespace testing_support
