#pragma once

#include "morrow/analysis.hpp"
#include "morrow/bounds.hpp"
#include "morrow/core.hpp"
#include "morrow/lspg.hpp"
#include "morrow/pod.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace morrow::io {

// Shortest decimal form that round-trips; "nan", "inf", "-inf" otherwise.
std::string format_double(double v);

// Rows of comma-separated fields, LF line endings.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}
    void header(const std::vector<std::string>& names);
    CsvWriter& field(double v);
    CsvWriter& field(long long v);
    CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
    CsvWriter& field(const std::string& s);
    void end_row();

private:
    std::ostream& os_;
    bool first_ = true;
};

// t,x_0.. for full trajectories, t,yhat_0.. for reduced ones.
void write_trajectory(std::ostream& os, const Trajectory& traj);
void write_gauss_newton(std::ostream& os, const std::vector<GaussNewtonReport>& reports);
void write_bound_report(std::ostream& os, const BoundReport& rep);
void write_aux_report(std::ostream& os, const AuxiliaryIncrementReport& rep);
void write_sweep(std::ostream& os, const SweepResult& sweep);
void write_matrix(std::ostream& os, const Matrix& m, const std::string& prefix);
void write_singular_values(std::ostream& os, const PodResult& pod);
void write_spectrum(std::ostream& os, const SpectralReport& rep);
void write_tau95(std::ostream& os, const SpectralReport& rep);
void write_errors(std::ostream& os, const Trajectory& traj, const std::vector<double>& errors);

struct CsvTable {
    std::vector<std::string> header;
    Matrix values;  // one row per data line
};

// Reads a numeric CSV with one header row; every line must have the header's field count.
CsvTable read_csv(std::istream& is);

// Snapshot file: one snapshot per column under a header row of labels. Contents are taken as centered.
SnapshotSet read_snapshots(std::istream& is);
void write_snapshots(std::ostream& os, const SnapshotSet& snaps);

} // namespace morrow::io
