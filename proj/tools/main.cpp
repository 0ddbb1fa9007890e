#include "morrow_cli/artifacts.hpp"
#include "morrow_cli/config.hpp"
#include "morrow_cli/pipeline.hpp"
#include "morrow_cli/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace morrow::cli;

namespace {

struct CommonFlags {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int parallel = 0;
};

void add_common(CLI::App* app, CommonFlags& f)
{
    app->add_option("--config", f.config, "YAML experiment file");
    app->add_option("--out", f.out, "output directory");
    app->add_option("--seed", f.seed, "random seed")->each([&f](const std::string&) { f.seed_set = true; });
    app->add_option("--parallel", f.parallel, "sweep worker threads")->check(CLI::PositiveNumber);
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"morrow: projection-based reduced-order models with error bounds"};
    app.require_subcommand(1);

    CommonFlags common;
    double nu = -1.0;
    int p = -1;
    std::string snapshots, rom_kind, dt_list;
    std::string verify_model = "gradient_flow";
    int verify_n = 32;

    std::vector<CLI::App*> stage_cmds;
    for (const char* name : {"fom", "pod", "rom", "sweep", "bounds", "spectral", "run"}) {
        CLI::App* sub = app.add_subcommand(name, std::string(name) == "run" ? "run every configured stage"
                                                                             : std::string("run the ") + name + " stage");
        add_common(sub, common);
        stage_cmds.push_back(sub);
    }
    CLI::App* pod_cmd = app.get_subcommand("pod");
    pod_cmd->add_option("--nu", nu, "energy fraction");
    pod_cmd->add_option("--p", p, "explicit basis dimension");
    pod_cmd->add_option("--snapshots", snapshots, "snapshot CSV file");
    app.get_subcommand("rom")->add_option("--rom", rom_kind, "galerkin | lspg | gnat");
    CLI::App* sweep_cmd = app.get_subcommand("sweep");
    sweep_cmd->add_option("--dt", dt_list, "comma-separated step sizes");
    sweep_cmd->add_option("--rom", rom_kind, "galerkin | lspg | gnat");

    CLI::App* verify_cmd = app.add_subcommand("verify", "run the property checks");
    verify_cmd->add_option("--model", verify_model, "burgers | advection_diffusion | gradient_flow");
    verify_cmd->add_option("--n", verify_n, "state dimension")->check(CLI::Range(8, 4096));
    verify_cmd->add_option("--out", common.out, "output directory");
    verify_cmd->add_option("--seed", common.seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_usage;
    }

    if (verify_cmd->parsed()) {
        try {
            VerifyOptions vo{verify_model, verify_n, common.seed};
            const auto rows = run_verify(vo);
            print_verify_table(std::cout, rows);
            ArtifactStore store(common.out.empty() ? "morrow_out" : common.out);
            store.write("verify.csv", verify_csv(rows));
            for (const auto& r : rows)
                if (r.result == "FAIL")
                    return exit_verification;
            return exit_ok;
        } catch (const std::invalid_argument& e) {
            std::cerr << "error: " << e.what() << '\n';
            return exit_usage;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return exit_numerical;
        }
    }

    CLI::App* cmd = nullptr;
    for (CLI::App* c : stage_cmds)
        if (c->parsed())
            cmd = c;

    ExperimentConfig cfg;
    RunRequest req;
    req.command = cmd->get_name();
    try {
        if (!common.config.empty()) {
            req.config_path = common.config;
            req.config_text = read_text(common.config);
            cfg = parse_config(req.config_text);
        }
        if (req.command != "run")
            cfg.stages = {req.command};
        if (!common.out.empty())
            cfg.out = common.out;
        if (common.seed_set) {
            cfg.seed = common.seed;
            cfg.model.seed = common.seed;
        }
        if (common.parallel > 0)
            cfg.parallel = common.parallel;
        if (nu > 0.0)
            cfg.pod.nu = nu;
        if (p >= 0)
            cfg.pod.p = p;
        if (!snapshots.empty())
            cfg.pod.snapshots = snapshots;
        if (!rom_kind.empty())
            cfg.rom.kind = rom_kind;
        if (!dt_list.empty())
            cfg.sweep_dt = parse_number_list(dt_list);
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }

    const RunOutcome outcome = run_pipeline(cfg, req, std::cerr);
    if (outcome.exit_code != exit_ok)
        std::cerr << "error: " << outcome.message << '\n';
    return outcome.exit_code;
}
