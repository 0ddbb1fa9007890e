#pragma once

#include "morrow/core.hpp"

#include <vector>

namespace morrow {

// Scalar output series on a time grid.
struct Series {
    std::vector<double> t;
    std::vector<double> v;
};

// Component `index` of the (lifted) state at every time level.
Series probe_series(const Trajectory& traj, int index, const TrialSubspace* sub = nullptr);

// Relative l2 error of p against the reference p_ref after piecewise-linear interpolation of p onto
// the reference grid. Time level 0 is excluded from both sums.
double trajectory_error(const Series& p, const Series& p_ref);

struct IncrementProjectionReport {
    std::vector<double> ratio;   // step k at index k-1
    std::vector<char> zero_increment;
    double max_ratio = 0.0;
};

// ||(I - Phi Phi^T) dx^k|| / ||dx^k|| for the increments of a full trajectory.
IncrementProjectionReport relative_increment_projection_error(const Trajectory& fom, const TrialSubspace& sub);

struct ModeSpectrum {
    std::vector<double> power;  // normalized to unit sum, one-sided
    double tau95 = 0.0;
    double f95 = 0.0;
    bool defined = true;        // false for a constant series
};

struct SpectralReport {
    std::vector<double> frequency;
    double bin_width = 0.0;
    std::vector<ModeSpectrum> modes;
};

// Periodogram (mean removed, rectangular window) per column; rows are time samples spaced dt.
SpectralReport spectral_analysis(const Matrix& coords, double dt);
SpectralReport spectral_analysis(const std::vector<double>& times, const Matrix& coords);
SpectralReport spectral_analysis(const Trajectory& rom);

struct RateEstimate {
    std::vector<double> orders;  // one per consecutive pair (or triple)
    double order = 0.0;          // finest-level estimate
    bool reliable = true;
};

// Order from outputs q(dt), q(dt/2), q(dt/4), ...: log2 of successive difference ratios.
RateEstimate richardson_rate(const std::vector<double>& outputs);
// Order from errors against a reference: log2(e_i / e_{i+1}).
RateEstimate observed_order(const std::vector<double>& errors);

// max_n ||a^n - b^n||; non-full trajectories are lifted through sub.
double compare_trajectories(const Trajectory& a, const Trajectory& b, const TrialSubspace* sub = nullptr);

struct SweepResult {
    std::vector<double> dt;
    std::vector<double> error;
    std::vector<double> walltime;
    std::vector<double> bound;  // NaN where not evaluated
    std::vector<char> stable;

    int size() const { return static_cast<int>(dt.size()); }
};

} // namespace morrow
