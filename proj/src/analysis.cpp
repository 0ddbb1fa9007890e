#include "morrow/analysis.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>

namespace morrow {

namespace {

Vector lifted(const Trajectory& traj, int n, const TrialSubspace* sub)
{
    if (traj.kind == TrajectoryKind::full)
        return traj.states[n];
    if (!sub)
        throw Error("reduced trajectory needs a trial subspace to be lifted");
    return reconstruct(*sub, traj.states[n]);
}

double interpolate(const Series& s, double t)
{
    const auto& ts = s.t;
    if (t <= ts.front())
        return s.v.front();
    if (t >= ts.back())
        return s.v.back();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - ts.begin());
    const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
    return (1.0 - w) * s.v[i - 1] + w * s.v[i];
}

} // namespace

Series probe_series(const Trajectory& traj, int index, const TrialSubspace* sub)
{
    Series s;
    for (int n = 0; n <= traj.num_steps(); ++n) {
        const Vector x = lifted(traj, n, sub);
        if (index < 0 || index >= x.size())
            throw DimensionError("probe index " + std::to_string(index) + " outside the state");
        s.t.push_back(traj.time(n));
        s.v.push_back(x(index));
    }
    return s;
}

double trajectory_error(const Series& p, const Series& p_ref)
{
    if (p.t.empty() || p_ref.t.empty())
        throw Error("trajectory_error: empty series");
    if (p.t.size() != p.v.size() || p_ref.t.size() != p_ref.v.size())
        throw DimensionError("trajectory_error: time and value lengths differ");
    const double tol = 1e-9 * std::max(1.0, std::abs(p_ref.t.back()));
    if (p.t.front() > p_ref.t.front() + tol || p.t.back() < p_ref.t.back() - tol)
        throw Error("trajectory_error: series does not cover the reference interval");
    double num = 0.0, den = 0.0;
    for (std::size_t k = 1; k < p_ref.t.size(); ++k) {
        const double d = interpolate(p, p_ref.t[k]) - p_ref.v[k];
        num += d * d;
        den += p_ref.v[k] * p_ref.v[k];
    }
    if (den == 0.0)
        throw Error("trajectory_error: reference series is zero");
    return std::sqrt(num / den);
}

IncrementProjectionReport relative_increment_projection_error(const Trajectory& fom, const TrialSubspace& sub)
{
    if (fom.states.size() < 2)
        throw Error("relative_increment_projection_error: need at least two states");
    const Matrix& phi = sub.basis();
    IncrementProjectionReport rep;
    for (int k = 1; k <= fom.num_steps(); ++k) {
        const Vector dx = fom.states[k] - fom.states[k - 1];
        const double nrm = dx.norm();
        if (nrm == 0.0) {
            rep.ratio.push_back(0.0);
            rep.zero_increment.push_back(1);
            continue;
        }
        const double r = (dx - phi * (phi.transpose() * dx)).norm() / nrm;
        rep.ratio.push_back(r);
        rep.zero_increment.push_back(0);
        rep.max_ratio = std::max(rep.max_ratio, r);
    }
    return rep;
}

SpectralReport spectral_analysis(const Matrix& coords, double dt)
{
    const int n = static_cast<int>(coords.rows());
    if (n < 16)
        throw Error("spectral_analysis: series length must be at least 16");
    if (!(dt > 0.0))
        throw Error("spectral_analysis: sampling interval must be positive");
    SpectralReport rep;
    rep.bin_width = 1.0 / (n * dt);
    const int nf = n / 2 + 1;
    for (int k = 0; k < nf; ++k)
        rep.frequency.push_back(k * rep.bin_width);

    Eigen::FFT<double> fft;
    for (long c = 0; c < coords.cols(); ++c) {
        std::vector<double> x(coords.col(c).data(), coords.col(c).data() + n);
        const double mean = coords.col(c).mean();
        for (double& v : x)
            v -= mean;
        std::vector<std::complex<double>> spec;
        fft.fwd(spec, x);
        ModeSpectrum m;
        m.power.resize(nf);
        double total = 0.0;
        for (int k = 0; k < nf; ++k) {
            // one-sided: interior bins carry their negative-frequency mirror
            const bool mirrored = k > 0 && !(n % 2 == 0 && k == n / 2);
            m.power[k] = std::norm(spec[k]) * (mirrored ? 2.0 : 1.0);
            total += m.power[k];
        }
        double scale = 0.0;
        for (double v : x)
            scale = std::max(scale, std::abs(v));
        if (!(total > 0.0) || scale <= 1e-14 * std::max(1.0, std::abs(mean))) {
            std::fill(m.power.begin(), m.power.end(), 0.0);
            m.defined = false;
            m.tau95 = 0.0;
            m.f95 = 0.0;
            rep.modes.push_back(std::move(m));
            continue;
        }
        for (double& p : m.power)
            p /= total;
        double cum = 0.0;
        int k95 = nf - 1;
        for (int k = 0; k < nf; ++k) {
            cum += m.power[k];
            if (cum >= 0.95) {
                k95 = k;
                break;
            }
        }
        m.f95 = rep.frequency[k95];
        m.defined = m.f95 > 0.0;
        m.tau95 = m.defined ? 1.0 / m.f95 : 0.0;
        rep.modes.push_back(std::move(m));
    }
    return rep;
}

SpectralReport spectral_analysis(const std::vector<double>& times, const Matrix& coords)
{
    if (static_cast<long>(times.size()) != coords.rows())
        throw DimensionError("spectral_analysis: one time per row required");
    if (times.size() < 16)
        throw Error("spectral_analysis: series length must be at least 16");
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - times[i - 1] - dt) > 1e-9 * dt)
            throw Error("spectral_analysis: non-uniform time grid at sample " + std::to_string(i));
    return spectral_analysis(coords, dt);
}

SpectralReport spectral_analysis(const Trajectory& rom)
{
    if (rom.states.empty())
        throw Error("spectral_analysis: empty trajectory");
    Matrix coords(rom.states.size(), rom.states.front().size());
    for (std::size_t n = 0; n < rom.states.size(); ++n)
        coords.row(static_cast<long>(n)) = rom.states[n].transpose();
    return spectral_analysis(coords, rom.dt);
}

RateEstimate richardson_rate(const std::vector<double>& outputs)
{
    if (outputs.size() < 3)
        throw Error("richardson_rate: need at least three levels");
    RateEstimate r;
    std::vector<double> diff;
    for (std::size_t i = 0; i + 1 < outputs.size(); ++i)
        diff.push_back(outputs[i] - outputs[i + 1]);
    for (std::size_t i = 0; i + 1 < diff.size(); ++i) {
        if (diff[i] == 0.0 || diff[i + 1] == 0.0 || (diff[i] > 0) != (diff[i + 1] > 0) ||
            std::abs(diff[i + 1]) >= std::abs(diff[i]))
            r.reliable = false;
        r.orders.push_back(std::log2(std::abs(diff[i]) / std::abs(diff[i + 1])));
    }
    r.order = r.orders.back();
    return r;
}

RateEstimate observed_order(const std::vector<double>& errors)
{
    if (errors.size() < 2)
        throw Error("observed_order: need at least two levels");
    RateEstimate r;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        if (!(errors[i + 1] > 0.0) || errors[i + 1] >= errors[i])
            r.reliable = false;
        r.orders.push_back(std::log2(errors[i] / errors[i + 1]));
    }
    r.order = r.orders.back();
    return r;
}

double compare_trajectories(const Trajectory& a, const Trajectory& b, const TrialSubspace* sub)
{
    if (a.num_steps() != b.num_steps())
        throw Error("compare_trajectories: trajectories differ in length");
    if (std::abs(a.dt - b.dt) > 1e-14 * std::max(a.dt, b.dt))
        throw Error("compare_trajectories: time steps differ");
    double worst = 0.0;
    for (int n = 0; n <= a.num_steps(); ++n)
        worst = std::max(worst, (lifted(a, n, sub) - lifted(b, n, sub)).norm());
    return worst;
}

} // namespace morrow
