#include "morrow/pod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace morrow {

SnapshotSet centered_snapshots(const Trajectory& traj, const Vector& x0, int stride)
{
    if (stride < 1)
        throw Error("centered_snapshots: stride must be >= 1");
    std::vector<int> picks;
    for (int n = stride; n <= traj.num_steps(); n += stride)
        picks.push_back(n);
    SnapshotSet s;
    s.centered = true;
    s.vectors.resize(x0.size(), static_cast<long>(picks.size()));
    for (std::size_t c = 0; c < picks.size(); ++c)
        s.vectors.col(static_cast<long>(c)) = traj.states[picks[c]] - x0;
    return s;
}

int select_dimension(const Vector& energy_fractions, double nu)
{
    for (int n = 0; n < energy_fractions.size(); ++n)
        if (energy_fractions(n) >= nu)
            return n + 1;
    return static_cast<int>(energy_fractions.size());
}

PodResult compute_pod(const SnapshotSet& snaps, double nu, const PodOptions& opts)
{
    if (!(nu >= 0.0 && nu <= 1.0))
        throw Error("compute_pod: energy criterion must lie in [0,1]");
    const Matrix& raw = snaps.vectors;
    if (raw.cols() < 1 || raw.rows() < 1)
        throw Error("compute_pod: need at least one snapshot");
    const long rows = raw.rows();

    Matrix w = raw;
    if (opts.scaling) {
        require_dim(opts.scaling->size(), rows, "compute_pod scaling");
        w = opts.scaling->asDiagonal() * w;
    }
    for (long j = 0; j < w.cols(); ++j) {
        const double nrm = w.col(j).norm();
        if (!(nrm >= 1e-14))
            throw Error("compute_pod: snapshot column " + std::to_string(j) + " has norm below 1e-14");
        w.col(j) /= nrm;
    }

    Eigen::BDCSVD<Matrix> svd(w, Eigen::ComputeThinU);
    Vector sigma = svd.singularValues();
    Matrix u = svd.matrixU();

    // numerically zero singular values carry no energy, so nu = 1 yields the numerical rank
    const double cutoff = sigma.size() ? sigma(0) * std::max(w.rows(), w.cols()) * std::numeric_limits<double>::epsilon() : 0.0;
    Vector energy(sigma.size());
    double acc = 0.0;
    for (long i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > cutoff)
            acc += sigma(i) * sigma(i);
        energy(i) = acc;
    }
    energy /= acc;

    const int n = select_dimension(energy, nu);
    Matrix basis = u.leftCols(n);
    for (int j = 0; j < n; ++j) {
        Eigen::Index imax = 0;
        basis.col(j).cwiseAbs().maxCoeff(&imax);
        if (basis(imax, j) < 0.0)
            basis.col(j) = -basis.col(j);
    }
    if (opts.scaling) {
        // map back to unscaled coordinates and re-orthonormalize; span is preserved
        Matrix back = opts.scaling->cwiseInverse().asDiagonal() * basis;
        Eigen::HouseholderQR<Matrix> qr(back);
        Matrix q = qr.householderQ() * Matrix::Identity(rows, n);
        for (int j = 0; j < n; ++j) {
            Eigen::Index imax = 0;
            q.col(j).cwiseAbs().maxCoeff(&imax);
            if (q(imax, j) < 0.0)
                q.col(j) = -q.col(j);
        }
        basis = q;
    }

    Vector ref = opts.reference.size() ? opts.reference : Vector::Zero(rows);
    return PodResult{TrialSubspace(basis, ref), sigma, energy, nu};
}

} // namespace morrow
