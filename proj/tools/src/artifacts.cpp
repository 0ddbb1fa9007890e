#include "morrow_cli/artifacts.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#ifndef MORROW_VERSION
#define MORROW_VERSION "0.0.0"
#endif

namespace morrow::cli {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

std::string sha256_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

ArtifactStore::ArtifactStore(fs::path root) : root_(std::move(root))
{
    fs::create_directories(root_);
}

void ArtifactStore::write(const std::string& rel, const std::string& bytes)
{
    const fs::path p = root_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("cannot write " + p.string());
    std::lock_guard<std::mutex> lock(mu_);
    if (std::find(files_.begin(), files_.end(), rel) == files_.end())
        files_.push_back(rel);
}

void ArtifactStore::add_stage(StageRecord r)
{
    std::lock_guard<std::mutex> lock(mu_);
    stages_.push_back(std::move(r));
}

void ArtifactStore::write_manifest(const Meta& meta)
{
    std::lock_guard<std::mutex> lock(mu_);
    nlohmann::ordered_json j;
    j["tool"] = "morrow";
    j["version"] = MORROW_VERSION;
    j["command"] = meta.command;
    j["status"] = meta.status;
    if (!meta.failed_stage.empty()) {
        j["failed_stage"] = meta.failed_stage;
        j["error"] = meta.error;
    }
    j["inputs"]["config_path"] = meta.config_path;
    j["inputs"]["config_sha256"] = sha256_hex(meta.config_text);
    j["inputs"]["seed"] = meta.seed;
    j["inputs"]["parallel"] = meta.parallel;
    std::ostringstream eigen;
    eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
    j["versions"]["eigen"] = eigen.str();
    j["versions"]["compiler"] = __VERSION__;
    j["stages"] = nlohmann::ordered_json::array();
    for (const auto& s : stages_) {
        nlohmann::ordered_json st;
        st["name"] = s.name;
        st["status"] = s.status;
        st["wall_time_s"] = s.wall_time_s;
        if (!s.message.empty())
            st["message"] = s.message;
        j["stages"].push_back(st);
    }
    std::vector<std::string> files = files_;
    std::sort(files.begin(), files.end());
    j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& f : files) {
        const fs::path p = root_ / f;
        nlohmann::ordered_json o;
        o["path"] = f;
        o["bytes"] = static_cast<unsigned long long>(fs::file_size(p));
        o["sha256"] = sha256_file(p);
        j["outputs"].push_back(o);
    }
    std::ofstream out(root_ / "manifest.json", std::ios::trunc);
    out << j.dump(2) << '\n';
}

namespace {

struct Axis {
    double lo, hi;
    bool log;
    double map(double v, double a, double b) const
    {
        const double t = log ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
        return a + t * (b - a);
    }
    double value(double t) const { return log ? std::pow(10.0, lo + t * (hi - lo)) : lo + t * (hi - lo); }
};

Axis make_axis(const std::vector<PlotSeries>& series, bool use_x, bool log)
{
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double v = use_x ? s.x[i] : s.y[i];
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                continue;
            if (log && (s.x[i] <= 0.0 && use_x))
                continue;
            if (log && v <= 0.0)
                continue;
            const double u = log ? std::log10(v) : v;
            lo = std::min(lo, u);
            hi = std::max(hi, u);
        }
    if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    return Axis{lo, hi, log};
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else if (c == '&')
            out += "&amp;";
        else
            out += c;
    }
    return out;
}

std::string tick(double v)
{
    std::ostringstream os;
    os << std::setprecision(3) << v;
    return os.str();
}

} // namespace

std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series)
{
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
    const double W = 640, H = 420, L = 80, R = 160, Tm = 40, B = 60;
    const Axis ax = make_axis(series, true, spec.logx);
    const Axis ay = make_axis(series, false, spec.logy);
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title) << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << W - L - R << "\" height=\"" << H - Tm - B
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double t = k / 4.0;
        const double px = L + t * (W - L - R), py = H - B - t * (H - Tm - B);
        os << "<text x=\"" << px << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << tick(ax.value(t)) << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">" << tick(ay.value(t)) << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">" << escape(spec.xlabel) << "</text>\n";
    os << "<text transform=\"translate(18," << (Tm + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << escape(spec.ylabel) << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % 7];
        std::ostringstream pts;
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            const double x = series[s].x[i], y = series[s].y[i];
            if (!std::isfinite(x) || !std::isfinite(y) || (spec.logx && x <= 0.0) || (spec.logy && y <= 0.0))
                continue;
            pts << ax.map(x, L, W - R) << ',' << ay.map(y, H - B, Tm) << ' ';
        }
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
        const double ly = Tm + 14 + 18 * static_cast<double>(s);
        os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly - 4
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << W - R + 36 << "\" y=\"" << ly << "\">" << escape(series[s].label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace morrow::cli
