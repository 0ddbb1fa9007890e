#include "morrow/hyperreduction.hpp"
#include "morrow/pod.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

namespace morrow {

SampleSet::SampleSet(std::vector<int> indices, int n) : idx_(std::move(indices)), n_(n)
{
    std::sort(idx_.begin(), idx_.end());
    for (std::size_t i = 0; i < idx_.size(); ++i) {
        if (idx_[i] < 0 || idx_[i] >= n)
            throw Error("SampleSet: index " + std::to_string(idx_[i]) + " outside [0," + std::to_string(n) + ")");
        if (i > 0 && idx_[i] == idx_[i - 1])
            throw Error("SampleSet: duplicate index " + std::to_string(idx_[i]));
    }
}

ResidualSnapshotSet collect_residual_snapshots(const Model& model, const TrialSubspace& sub, const Scheme& scheme,
                                               double dt, double T, const SolverOptions& opts)
{
    ResidualSnapshotSet out;
    const WeightingOperator identity = WeightingOperator::scaled_identity(model.dim(), 1.0);
    LspgResult run = integrate_lspg(model, sub, identity, scheme, dt, T, opts, RkLspgMode::automatic,
                                    [&](const Vector& r) {
                                        // coupled RK stacks stage residuals; keep each stage block
                                        for (long off = 0; off < r.size(); off += model.dim())
                                            out.residuals.push_back(r.segment(off, model.dim()));
                                    });
    for (const auto& rep : run.reports)
        out.per_step.push_back(rep.iterations);
    return out;
}

Matrix build_residual_basis(const ResidualSnapshotSet& snaps, double nu)
{
    if (snaps.residuals.empty())
        throw Error("build_residual_basis: no residual snapshots");
    SnapshotSet set;
    set.vectors.resize(snaps.residuals.front().size(), static_cast<long>(snaps.residuals.size()));
    for (std::size_t j = 0; j < snaps.residuals.size(); ++j)
        set.vectors.col(static_cast<long>(j)) = snaps.residuals[j];
    return compute_pod(set, nu).basis.basis();
}

SampleSet select_samples(const Matrix& basis, int n_samples)
{
    const int n = static_cast<int>(basis.rows());
    const int q = static_cast<int>(basis.cols());
    if (q < 1)
        throw Error("select_samples: empty basis");
    if (n_samples < q)
        throw Error("select_samples: need at least as many samples (" + std::to_string(n_samples) +
                    ") as basis columns (" + std::to_string(q) + ")");
    if (n_samples > n)
        throw Error("select_samples: more samples requested than rows");

    std::vector<int> chosen;
    std::vector<char> taken(n, 0);
    auto pick = [&](const Vector& resid) {
        int best = -1;
        double best_val = -1.0;
        for (int i = 0; i < n; ++i)
            if (!taken[i] && std::abs(resid(i)) > best_val) {
                best_val = std::abs(resid(i));
                best = i;
            }
        taken[best] = 1;
        chosen.push_back(best);
    };
    // residual of column j after its gappy fit by columns 0..j-1 on the chosen rows
    auto column_residual = [&](int j) -> Vector {
        if (j == 0)
            return basis.col(0);
        Matrix a(chosen.size(), j);
        Vector rhs(chosen.size());
        for (std::size_t r = 0; r < chosen.size(); ++r) {
            a.row(static_cast<long>(r)) = basis.row(chosen[r]).head(j);
            rhs(static_cast<long>(r)) = basis(chosen[r], j);
        }
        const Vector c = a.colPivHouseholderQr().solve(rhs);
        return basis.col(j) - basis.leftCols(j) * c;
    };

    for (int col = 0; static_cast<int>(chosen.size()) < n_samples; col = (col + 1) % q)
        pick(column_residual(col));
    return SampleSet(chosen, n);
}

WeightingOperator gnat_weighting(const SampleSet& samples, const Matrix& residual_basis)
{
    require_dim(residual_basis.rows(), samples.full_dim(), "gnat_weighting");
    return WeightingOperator::gappy_pod(samples.indices(), residual_basis);
}

void write_samples(std::ostream& os, const SampleSet& s)
{
    for (int i : s.indices())
        os << i << '\n';
}

SampleSet read_samples(std::istream& is, int n)
{
    std::vector<int> idx;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty())
            continue;
        try {
            std::size_t used = 0;
            idx.push_back(std::stoi(line, &used));
            if (used != line.size())
                throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw Error("sample file line " + std::to_string(lineno) + ": not an integer index");
        }
    }
    return SampleSet(idx, n);
}

} // namespace morrow
