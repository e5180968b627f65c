// sldf: build, verify, analyze and simulate switch-less Dragonfly networks.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sldf/analytics.hpp"
#include "sldf/errors.hpp"
#include "sldf/experiment.hpp"
#include "sldf/manifest.hpp"

using namespace sldf;

namespace {

struct Common {
    std::string config;
    std::string preset;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out;
    bool dry_run = false;
    bool skip_verify = false;
    bool print_config = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "experiment config file");
    app->add_option("--preset", c.preset, "named preset instead of a config file");
    app->add_option("--seed", c.seed, "run with this single seed");
    app->add_option("--jobs,-j", c.jobs, "concurrent simulations")->check(CLI::PositiveNumber);
    app->add_option("--out", c.out, "output directory (default: config, then $SLDF_OUT_DIR)");
    app->add_flag("--dry-run", c.dry_run, "validate only");
    app->add_flag("--skip-verify", c.skip_verify, "skip topology and deadlock checks");
    app->add_flag("--print-config", c.print_config, "print the resolved config");
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

ExperimentSpec load(const Common& c) {
    if (!c.config.empty() && !c.preset.empty()) throw ValidationError("give --config or --preset, not both");
    ExperimentSpec spec;
    if (!c.config.empty()) spec = parse_config(read_file(c.config));
    else if (!c.preset.empty()) spec = preset(c.preset);
    else throw ValidationError("no experiment: give --config or --preset");
    if (c.seed) spec.seeds = {c.seed};
    validate(spec);
    if (c.print_config) std::cout << print_config(spec);
    return spec;
}

RunOptions options(const Common& c) {
    RunOptions o;
    o.jobs = c.jobs;
    o.dry_run = c.dry_run;
    o.skip_verify = c.skip_verify;
    if (!c.out.empty()) o.out_dir = c.out;
    else if (const char* env = std::getenv("SLDF_OUT_DIR"); env && *env) o.out_dir = env;
    return o;
}

std::filesystem::path out_dir(const Common& c, const ExperimentSpec& spec) {
    return options(c).out_dir.value_or(spec.output.dir);
}

int cmd_build(const Common& c) {
    const auto spec = load(c);
    if (c.dry_run) return kExitOk;
    const auto dir = out_dir(c, spec);
    std::filesystem::create_directories(dir);
    for (const auto& s : spec.runs()) {
        const auto topo = build_topology(s.topo);
        const auto path = dir / ("topology-" + s.label + ".txt");
        std::ofstream(path) << write_manifest(topo);
        std::cout << s.label << ": " << topo.routers().size() << " routers, " << topo.chips().size() << " chips, "
                  << topo.channels().size() << " channels -> " << path.string() << '\n';
    }
    return kExitOk;
}

int report_topology(const std::string& name, const Topology& topo) {
    const auto rep = verify_topology(topo);
    for (const auto& chk : rep.checks)
        std::cout << name << ' ' << chk.name << ": " << (chk.pass ? "pass" : "FAIL " + chk.witness) << '\n';
    return rep.all_pass() ? kExitOk : kExitVerification;
}

int cmd_verify(const Common& c, const std::string& manifest) {
    if (!manifest.empty()) return report_topology(manifest, read_manifest(read_file(manifest)));
    const auto spec = load(c);
    if (c.dry_run) return kExitOk;
    int rc = kExitOk;
    for (const auto& s : spec.runs())
        if (report_topology(s.label, build_topology(s.topo)) != kExitOk) rc = kExitVerification;
    return rc;
}

int cmd_verify_routing(const Common& c, bool full) {
    const auto spec = load(c);
    if (c.dry_run) return kExitOk;
    int rc = kExitOk;
    for (const auto& s : spec.runs()) {
        const auto chk = check_routing(s.topo, s.mode, full);
        std::cout << s.label << ' ' << mode_name(s.mode) << ": "
                  << (chk.report.acyclic ? "acyclic" : "CYCLE")
                  << (chk.proxy_g ? " (g=" + std::to_string(chk.proxy_g) + " proxy)" : std::string()) << '\n';
        if (!chk.report.acyclic) {
            std::cout << chk.witness;
            rc = kExitVerification;
        }
    }
    return rc;
}

int cmd_analyze(const Common& c) {
    const auto spec = load(c);
    print_analytics(std::cout, spec.runs());
    return kExitOk;
}

int cmd_simulate(const Common& c, double rate) {
    auto spec = load(c);
    spec.kind = ExperimentKind::Sweep;
    if (rate >= 0) spec.rates = {rate};
    RunOptions o = options(c);
    o.write_files = false;
    const auto res = run_experiment(spec, o, std::cerr);
    if (res.exit_code != kExitOk) return res.exit_code;
    write_sweep_csv(std::cout, res.records);
    return kExitOk;
}

int cmd_sweep(const Common& c) {
    const auto spec = load(c);
    return run_experiment(spec, options(c), std::cout).exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Switch-less Dragonfly topology, routing and flit-level simulation"};
    app.require_subcommand(1);
    Common common;

    auto* build = app.add_subcommand("build", "write topology manifests");
    add_common(build, common);

    std::string manifest;
    auto* verify = app.add_subcommand("verify", "check wiring and labeling");
    add_common(verify, common);
    verify->add_option("--manifest", manifest, "verify a manifest file instead");

    bool full = false;
    auto* verify_routing = app.add_subcommand("verify-routing", "channel dependency graph check");
    add_common(verify_routing, common);
    verify_routing->add_flag("--full", full, "walk the full network instead of a 5 W-group proxy");

    auto* analyze = app.add_subcommand("analyze", "analytic scale, throughput bounds and diameter");
    add_common(analyze, common);

    double rate = -1;
    auto* simulate = app.add_subcommand("simulate", "run one rate and print CSV to stdout");
    add_common(simulate, common);
    simulate->add_option("--rate", rate, "offered flits/cycle/chip (default: the config's rates)");

    auto* sweep = app.add_subcommand("sweep", "run the experiment and write CSV, report and gnuplot data");
    add_common(sweep, common);

    std::string preset_name;
    bool list = false;
    auto* pre = app.add_subcommand("preset", "run a named reproduction preset");
    add_common(pre, common);
    pre->add_option("name", preset_name, "preset name");
    pre->add_flag("--list", list, "list presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*build) return cmd_build(common);
        if (*verify) return cmd_verify(common, manifest);
        if (*verify_routing) return cmd_verify_routing(common, full);
        if (*analyze) return cmd_analyze(common);
        if (*simulate) return cmd_simulate(common, rate);
        if (*sweep) return cmd_sweep(common);
        if (*pre) {
            if (list) {
                for (const auto& n : preset_names()) std::cout << n << "  " << preset(n).description << '\n';
                return kExitOk;
            }
            if (!preset_name.empty()) common.preset = preset_name;
            return cmd_sweep(common);
        }
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << "invalid: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}
