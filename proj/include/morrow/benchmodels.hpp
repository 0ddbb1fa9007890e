#pragma once

#include "morrow/core.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace morrow {

struct BenchmarkSpec {
    std::string name = "burgers";       // burgers | advection_diffusion | gradient_flow
    int n = 256;
    double length = 1.0;
    double viscosity = 0.005;
    double wave_speed = 1.0;             // advection_diffusion only
    std::string boundary = "dirichlet";  // dirichlet | periodic
    double left_value = 0.0;
    double right_value = 0.0;
    std::string advection = "upwind";    // upwind | central
    std::string initial_profile = "step";  // step | sine | gaussian | random
    std::string forcing = "none";        // none | manufactured (advection_diffusion)
    // gradient_flow spectrum: explicit values, else geometric between the two bounds
    std::vector<double> spectrum;
    double lambda_min = 1.0;
    double lambda_max = 100.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Platform-independent uniform draws on top of std::mt19937_64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    Vector vector(int n, double lo = -1.0, double hi = 1.0);
    Matrix matrix(int rows, int cols, double lo = -1.0, double hi = 1.0);
    std::uint64_t next() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

// Orthonormal Q from the QR factor of a seeded random square matrix.
Matrix random_orthogonal(int n, Rng& rng);

Model burgers1d(const BenchmarkSpec& spec);
Model advection_diffusion(const BenchmarkSpec& spec);
Model gradient_flow_spd(const BenchmarkSpec& spec);
Model make_benchmark(const BenchmarkSpec& spec);

// Linear operators of the linear benchmarks.
Matrix advection_diffusion_operator(const BenchmarkSpec& spec);
Matrix gradient_flow_matrix(const BenchmarkSpec& spec);

// Exact state of the manufactured advection-diffusion problem, x(t) = exp(-t) x0.
Vector manufactured_solution(const BenchmarkSpec& spec, double t);

// Grid node coordinates of the 1D stencil models.
Vector grid_nodes(const BenchmarkSpec& spec);
Vector initial_profile(const BenchmarkSpec& spec);

} // namespace morrow
