#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

namespace morrow::cli {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& p);

struct StageRecord {
    std::string name;
    std::string status;  // ok | failed
    double wall_time_s = 0.0;
    std::string message;
};

// Output directory plus the run manifest. Thread-safe for concurrent writes.
class ArtifactStore {
public:
    explicit ArtifactStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    // Writes bytes to root/rel, creating directories, and records the file.
    void write(const std::string& rel, const std::string& bytes);
    void add_stage(StageRecord r);

    struct Meta {
        std::string command;
        std::string config_path;
        std::string config_text;
        unsigned long long seed = 0;
        int parallel = 1;
        std::string status = "ok";
        std::string failed_stage;
        std::string error;
    };
    // manifest.json: inputs, seed, versions, stage wall times, outputs with SHA-256.
    void write_manifest(const Meta& meta);

private:
    std::filesystem::path root_;
    std::mutex mu_;
    std::vector<std::string> files_;
    std::vector<StageRecord> stages_;
};

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    bool logx = false;
    bool logy = false;
};

// Self-contained SVG line chart. Non-finite and (on log axes) non-positive points are skipped.
std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series);

} // namespace morrow::cli
