#pragma once

#include "morrow/core.hpp"
#include "morrow/lspg.hpp"
#include "morrow/schemes.hpp"

#include <iosfwd>
#include <vector>

namespace morrow {

class SampleSet {
public:
    // Sorts the indices; rejects duplicates and indices outside [0, n).
    SampleSet(std::vector<int> indices, int n);

    const std::vector<int>& indices() const { return idx_; }
    int count() const { return static_cast<int>(idx_.size()); }
    int full_dim() const { return n_; }

private:
    std::vector<int> idx_;
    int n_;
};

struct ResidualSnapshotSet {
    std::vector<Vector> residuals;  // execution order
    std::vector<int> per_step;      // Gauss-Newton iterations of each step
};

ResidualSnapshotSet collect_residual_snapshots(const Model& model, const TrialSubspace& sub, const Scheme& scheme,
                                               double dt, double T, const SolverOptions& opts);

Matrix build_residual_basis(const ResidualSnapshotSet& snaps, double nu);

SampleSet select_samples(const Matrix& basis, int n_samples);

WeightingOperator gnat_weighting(const SampleSet& samples, const Matrix& residual_basis);

void write_samples(std::ostream& os, const SampleSet& s);
SampleSet read_samples(std::istream& is, int n);

} // namespace morrow
