#pragma once

#include "morrow/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace morrow {

struct SnapshotSet {
    Matrix vectors;         // one snapshot per column
    bool centered = false;  // columns are x(k dt) - x0
};

// Snapshots x(k dt) - x0 for every state of a full trajectory (state 0 skipped, it is zero).
SnapshotSet centered_snapshots(const Trajectory& traj, const Vector& x0, int stride = 1);

struct PodOptions {
    Vector reference;                 // reference state of the returned subspace; zero if empty
    std::optional<Vector> scaling;    // per-component diagonal scaling, off by default
};

struct PodResult {
    TrialSubspace basis;
    Vector singular_values;
    Vector energy_fractions;  // cumulative
    double nu = 1.0;
    int dim() const { return basis.reduced_dim(); }
};

PodResult compute_pod(const SnapshotSet& snaps, double nu, const PodOptions& opts = {});

// Energy-criterion selection alone: smallest n with energy_fractions[n-1] >= nu.
int select_dimension(const Vector& energy_fractions, double nu);

} // namespace morrow
