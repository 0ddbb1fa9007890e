#include "morrow_cli/config.hpp"

#include "morrow/fom.hpp"
#include "morrow/io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace morrow::cli {

namespace {

int line_of(const YAML::Node& n)
{
    return n.Mark().line >= 0 ? n.Mark().line + 1 : 0;
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& section)
{
    if (!map.IsMap())
        throw ConfigError("section '" + section + "' must be a mapping", line_of(map));
    for (const auto& kv : map) {
        const std::string key = kv.first.as<std::string>();
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in " + section, line_of(kv.first));
    }
}

template <class T>
T get(const YAML::Node& n, const std::string& key)
{
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("bad value for '" + key + "'", line_of(n));
    }
}

template <class T>
void read(const YAML::Node& map, const char* key, T& dst)
{
    if (const YAML::Node n = map[key])
        dst = get<T>(n, key);
}

template <class T>
std::vector<T> read_list(const YAML::Node& n, const std::string& key)
{
    if (n.IsScalar())
        return {get<T>(n, key)};
    if (!n.IsSequence())
        throw ConfigError("'" + key + "' must be a list", line_of(n));
    std::vector<T> out;
    for (const auto& item : n)
        out.push_back(get<T>(item, key));
    return out;
}

void parse_model(const YAML::Node& m, BenchmarkSpec& s)
{
    check_keys(m,
               {"name", "n", "length", "viscosity", "wave_speed", "boundary", "left_value", "right_value",
                "advection", "initial_profile", "forcing", "spectrum", "lambda_min", "lambda_max"},
               "model");
    read(m, "name", s.name);
    read(m, "n", s.n);
    read(m, "length", s.length);
    read(m, "viscosity", s.viscosity);
    read(m, "wave_speed", s.wave_speed);
    read(m, "boundary", s.boundary);
    read(m, "left_value", s.left_value);
    read(m, "right_value", s.right_value);
    read(m, "advection", s.advection);
    read(m, "initial_profile", s.initial_profile);
    read(m, "forcing", s.forcing);
    if (const YAML::Node sp = m["spectrum"])
        s.spectrum = read_list<double>(sp, "spectrum");
    read(m, "lambda_min", s.lambda_min);
    read(m, "lambda_max", s.lambda_max);
}

void parse_solver(const YAML::Node& m, SolverOptions& o)
{
    check_keys(m, {"abs_tol", "rel_tol", "max_iters", "fd_step", "stagnation_tol", "line_search", "profile"},
               "solver");
    if (const YAML::Node p = m["profile"]) {
        const std::string name = get<std::string>(p, "profile");
        if (name == "tight")
            o = SolverOptions::tight();
        else if (name != "default")
            throw ConfigError("solver profile must be default or tight", line_of(p));
    }
    read(m, "abs_tol", o.newton_abs_tol);
    read(m, "rel_tol", o.newton_rel_tol);
    read(m, "max_iters", o.max_iters);
    read(m, "fd_step", o.fd_step);
    read(m, "stagnation_tol", o.stagnation_tol);
    read(m, "line_search", o.line_search);
}

} // namespace

const std::vector<std::string>& stage_order()
{
    static const std::vector<std::string> order{"fom", "snapshots", "pod", "rom", "sweep", "bounds", "spectral"};
    return order;
}

bool ExperimentConfig::has_stage(const std::string& s) const
{
    return std::find(stages.begin(), stages.end(), s) != stages.end();
}

void ExperimentConfig::validate() const
{
    model.validate();
    if (!(dt > 0.0) || !(T >= 0.0) || reference_dt < 0.0)
        throw ConfigError("dt must be positive, T and reference_dt nonnegative");
    if (!(pod.nu >= 0.0 && pod.nu <= 1.0))
        throw ConfigError("pod.nu must lie in [0, 1]");
    if (pod.p < 0 || pod.stride < 1)
        throw ConfigError("pod.p must be >= 0 and pod.stride >= 1");
    if (rom.kind != "galerkin" && rom.kind != "lspg" && rom.kind != "gnat")
        throw ConfigError("rom.kind must be galerkin, lspg or gnat");
    if (rom.weighting != "identity" && rom.weighting != "scaled" && rom.weighting != "collocation")
        throw ConfigError("rom.weighting must be identity, scaled or collocation");
    if (rom.rk_mode != "automatic" && rom.rk_mode != "stagewise" && rom.rk_mode != "coupled")
        throw ConfigError("rom.rk_mode must be automatic, stagewise or coupled");
    if (!(rom.gnat.nu_r > 0.0 && rom.gnat.nu_r <= 1.0) || rom.gnat.samples < 0)
        throw ConfigError("gnat.nu_r must lie in (0, 1] and gnat.samples must be >= 0");
    if (parallel < 1)
        throw ConfigError("parallel must be >= 1");
    if (sweep_dt.size() > 1) {
        bool inc = true, dec = true;
        for (std::size_t i = 1; i < sweep_dt.size(); ++i) {
            inc = inc && sweep_dt[i] > sweep_dt[i - 1];
            dec = dec && sweep_dt[i] < sweep_dt[i - 1];
        }
        if (!inc && !dec)
            throw ConfigError("sweep dt grid must be strictly increasing or strictly decreasing");
    }
    for (double d : sweep_dt)
        if (!(d > 0.0))
            throw ConfigError("sweep dt values must be positive");
    const auto divides = [](double step, double span) {
        try {
            step_count(step, span);
            return true;
        } catch (const Error&) {
            return false;
        }
    };
    for (double d : sweep_dt) {
        if (!divides(d, T))
            throw ConfigError("sweep dt " + io::format_double(d) + " does not divide T");
        if (!divides(fom_dt(), d))
            throw ConfigError("sweep dt " + io::format_double(d) + " is not a multiple of the reference step");
    }
    if (!divides(dt, T) || !divides(fom_dt(), T))
        throw ConfigError("dt and reference_dt must divide T");
    if (!divides(fom_dt(), dt))
        throw ConfigError("dt must be a multiple of reference_dt");
    if (has_stage("sweep") && sweep_dt.empty())
        throw ConfigError("stage 'sweep' needs sweep.dt");
    for (const auto& s : stages)
        if (std::find(stage_order().begin(), stage_order().end(), s) == stage_order().end())
            throw ConfigError("unknown stage '" + s + "'");
    for (const auto& m : bounds.modes)
        if (m != "aposteriori" && m != "apriori" && m != "simplified" && m != "timestep_independent" &&
            m != "residual_form")
            throw ConfigError("unknown bound mode '" + m + "'");
    if (!(bounds.eps > 0.0 && bounds.eps < 1.0) || !(bounds.omega > 0.0 && bounds.omega < 1.0))
        throw ConfigError("bounds.eps and bounds.omega must lie in (0, 1)");
    if (probe >= model.n)
        throw ConfigError("probe index outside the state");
}

ExperimentConfig parse_config(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.msg, e.mark.line + 1);
    }
    ExperimentConfig c;
    if (root.IsNull())
        return c;
    check_keys(root,
               {"model", "scheme", "dt", "reference_dt", "T", "stages", "pod", "rom", "solver", "bounds", "sweep",
                "spectral", "probe", "output", "seed"},
               "top level");
    if (const YAML::Node m = root["model"])
        parse_model(m, c.model);
    read(root, "scheme", c.scheme);
    read(root, "dt", c.dt);
    read(root, "reference_dt", c.reference_dt);
    read(root, "T", c.T);
    if (const YAML::Node s = root["stages"]) {
        c.stages = read_list<std::string>(s, "stages");
        for (const auto& st : c.stages)
            if (std::find(stage_order().begin(), stage_order().end(), st) == stage_order().end())
                throw ConfigError("unknown stage '" + st + "'", line_of(s));
    }
    if (const YAML::Node p = root["pod"]) {
        check_keys(p, {"nu", "p", "stride", "snapshots"}, "pod");
        read(p, "nu", c.pod.nu);
        read(p, "p", c.pod.p);
        read(p, "stride", c.pod.stride);
        read(p, "snapshots", c.pod.snapshots);
    }
    if (const YAML::Node r = root["rom"]) {
        check_keys(r, {"kind", "weighting", "gamma", "rows", "rk_mode", "gnat"}, "rom");
        read(r, "kind", c.rom.kind);
        read(r, "weighting", c.rom.weighting);
        read(r, "gamma", c.rom.gamma);
        if (const YAML::Node rows = r["rows"])
            c.rom.rows = read_list<int>(rows, "rows");
        read(r, "rk_mode", c.rom.rk_mode);
        if (const YAML::Node g = r["gnat"]) {
            check_keys(g, {"nu_r", "samples"}, "rom.gnat");
            read(g, "nu_r", c.rom.gnat.nu_r);
            read(g, "samples", c.rom.gnat.samples);
        }
    }
    if (const YAML::Node s = root["solver"])
        parse_solver(s, c.solver);
    if (const YAML::Node b = root["bounds"]) {
        check_keys(b, {"kappa", "eps", "omega", "kappa_samples", "modes", "auxiliary"}, "bounds");
        if (const YAML::Node k = b["kappa"]) {
            const std::string v = get<std::string>(k, "kappa");
            if (v != "auto")
                c.bounds.kappa = get<double>(k, "kappa");
        }
        read(b, "eps", c.bounds.eps);
        read(b, "omega", c.bounds.omega);
        read(b, "kappa_samples", c.bounds.kappa_samples);
        if (const YAML::Node m = b["modes"])
            c.bounds.modes = read_list<std::string>(m, "modes");
        read(b, "auxiliary", c.bounds.auxiliary);
    }
    if (const YAML::Node s = root["sweep"]) {
        check_keys(s, {"dt", "parallel"}, "sweep");
        if (const YAML::Node d = s["dt"])
            c.sweep_dt = read_list<double>(d, "sweep.dt");
        read(s, "parallel", c.parallel);
    }
    if (const YAML::Node s = root["spectral"]) {
        check_keys(s, {"modes"}, "spectral");
        read(s, "modes", c.spectral.modes);
    }
    read(root, "probe", c.probe);
    if (const YAML::Node o = root["output"]) {
        check_keys(o, {"dir", "plots"}, "output");
        read(o, "dir", c.out);
        read(o, "plots", c.plots);
    }
    read(root, "seed", c.seed);
    c.model.seed = c.seed;
    try {
        c.validate();
    } catch (const morrow::Error& e) {
        throw ConfigError(e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::vector<double> parse_number_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        const char* b = item.data();
        const char* e = item.data() + item.size();
        while (b < e && *b == ' ')
            ++b;
        const auto res = std::from_chars(b, e, v);
        if (res.ec != std::errc() || res.ptr != e)
            throw ConfigError("not a number: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw ConfigError("empty number list");
    return out;
}

} // namespace morrow::cli
