#include "morrow/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace morrow::io {

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void CsvWriter::header(const std::vector<std::string>& names)
{
    for (const auto& n : names)
        field(n);
    end_row();
}

CsvWriter& CsvWriter::field(double v)
{
    return field(format_double(v));
}

CsvWriter& CsvWriter::field(long long v)
{
    return field(std::to_string(v));
}

CsvWriter& CsvWriter::field(const std::string& s)
{
    if (!first_)
        os_ << ',';
    os_ << s;
    first_ = false;
    return *this;
}

void CsvWriter::end_row()
{
    os_ << '\n';
    first_ = true;
}

void write_trajectory(std::ostream& os, const Trajectory& traj)
{
    CsvWriter w(os);
    const std::string prefix = traj.kind == TrajectoryKind::full ? "x_" : "yhat_";
    std::vector<std::string> head{"t"};
    const long d = traj.states.empty() ? 0 : traj.states.front().size();
    for (long i = 0; i < d; ++i)
        head.push_back(prefix + std::to_string(i));
    w.header(head);
    for (int n = 0; n <= traj.num_steps(); ++n) {
        w.field(traj.time(n));
        for (long i = 0; i < d; ++i)
            w.field(traj.states[n](i));
        w.end_row();
    }
}

void write_gauss_newton(std::ostream& os, const std::vector<GaussNewtonReport>& reports)
{
    CsvWriter w(os);
    w.header({"n", "iters", "objective_final", "grad_norm", "objective_initial", "converged"});
    for (std::size_t n = 0; n < reports.size(); ++n) {
        const auto& r = reports[n];
        w.field(static_cast<long long>(n + 1)).field(r.iterations);
        w.field(r.objective.empty() ? 0.0 : r.objective.back()).field(r.grad_norm);
        w.field(r.objective.empty() ? 0.0 : r.objective.front()).field(r.converged ? 1 : 0);
        w.end_row();
    }
}

void write_bound_report(std::ostream& os, const BoundReport& rep)
{
    CsvWriter w(os);
    w.header({"n", "term_projection", "coeff", "local_bound", "global_bound"});
    for (std::size_t n = 0; n < rep.per_step_bound.size(); ++n) {
        w.field(static_cast<long long>(n + 1));
        w.field(rep.term_projection[n]).field(rep.coeff[n]).field(rep.local_bound[n]).field(rep.per_step_bound[n]);
        w.end_row();
    }
}

void write_aux_report(std::ostream& os, const AuxiliaryIncrementReport& rep)
{
    CsvWriter w(os);
    w.header({"j", "mu", "mu_bar", "f_norm", "partial_bound", "partial_bound_absolute", "degenerate"});
    for (std::size_t j = 0; j < rep.mu.size(); ++j) {
        w.field(static_cast<long long>(j + 1));
        w.field(rep.mu[j]).field(rep.mu_bar[j]).field(rep.f_norm[j]).field(rep.bound[j]).field(rep.bound_absolute[j]);
        w.field(rep.degenerate[j] ? 1 : 0);
        w.end_row();
    }
}

void write_sweep(std::ostream& os, const SweepResult& s)
{
    CsvWriter w(os);
    w.header({"dt", "error", "walltime_s", "bound", "stable"});
    for (int i = 0; i < s.size(); ++i) {
        w.field(s.dt[i]).field(s.error[i]).field(s.walltime[i]).field(s.bound[i]).field(s.stable[i] ? 1 : 0);
        w.end_row();
    }
}

void write_matrix(std::ostream& os, const Matrix& m, const std::string& prefix)
{
    CsvWriter w(os);
    std::vector<std::string> head;
    for (long j = 0; j < m.cols(); ++j)
        head.push_back(prefix + std::to_string(j));
    w.header(head);
    for (long i = 0; i < m.rows(); ++i) {
        for (long j = 0; j < m.cols(); ++j)
            w.field(m(i, j));
        w.end_row();
    }
}

void write_singular_values(std::ostream& os, const PodResult& pod)
{
    CsvWriter w(os);
    w.header({"k", "sigma", "energy", "selected"});
    for (long k = 0; k < pod.singular_values.size(); ++k) {
        w.field(static_cast<long long>(k + 1)).field(pod.singular_values(k)).field(pod.energy_fractions(k));
        w.field(k < pod.dim() ? 1 : 0);
        w.end_row();
    }
}

void write_spectrum(std::ostream& os, const SpectralReport& rep)
{
    CsvWriter w(os);
    std::vector<std::string> head{"frequency"};
    for (std::size_t m = 0; m < rep.modes.size(); ++m)
        head.push_back("mode_" + std::to_string(m + 1));
    w.header(head);
    for (std::size_t k = 0; k < rep.frequency.size(); ++k) {
        w.field(rep.frequency[k]);
        for (const auto& m : rep.modes)
            w.field(m.power[k]);
        w.end_row();
    }
}

void write_tau95(std::ostream& os, const SpectralReport& rep)
{
    CsvWriter w(os);
    w.header({"mode", "tau95", "f95", "bin_width", "defined"});
    for (std::size_t m = 0; m < rep.modes.size(); ++m) {
        w.field(static_cast<long long>(m + 1)).field(rep.modes[m].tau95).field(rep.modes[m].f95).field(rep.bin_width);
        w.field(rep.modes[m].defined ? 1 : 0);
        w.end_row();
    }
}

void write_errors(std::ostream& os, const Trajectory& traj, const std::vector<double>& errors)
{
    CsvWriter w(os);
    w.header({"n", "t", "error"});
    for (std::size_t n = 0; n < errors.size(); ++n) {
        w.field(static_cast<long long>(n)).field(traj.time(static_cast<int>(n))).field(errors[n]);
        w.end_row();
    }
}

namespace {

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

void strip_cr(std::string& s)
{
    if (!s.empty() && s.back() == '\r')
        s.pop_back();
}

} // namespace

CsvTable read_csv(std::istream& is)
{
    CsvTable t;
    std::string line;
    if (!std::getline(is, line))
        throw Error("csv: empty input");
    strip_cr(line);
    t.header = split(line);
    const std::size_t cols = t.header.size();
    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty())
            continue;
        const auto cells = split(line);
        if (cells.size() != cols)
            throw Error("csv line " + std::to_string(lineno) + ": expected " + std::to_string(cols) + " fields, got " +
                        std::to_string(cells.size()));
        std::vector<double> row;
        for (const auto& c : cells) {
            double v = 0.0;
            const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
            if (res.ec != std::errc() || res.ptr != c.data() + c.size())
                throw Error("csv line " + std::to_string(lineno) + ": not a number: '" + c + "'");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    t.values.resize(static_cast<long>(rows.size()), static_cast<long>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j)
            t.values(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
    return t;
}

SnapshotSet read_snapshots(std::istream& is)
{
    CsvTable t = read_csv(is);
    if (t.values.rows() < 1 || t.values.cols() < 1)
        throw Error("snapshot file holds no data");
    SnapshotSet out;
    out.vectors = t.values;
    out.centered = true;
    return out;
}

void write_snapshots(std::ostream& os, const SnapshotSet& snaps)
{
    write_matrix(os, snaps.vectors, "w_");
}

} // namespace morrow::io
