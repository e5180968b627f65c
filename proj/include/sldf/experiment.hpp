#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sldf/cdg.hpp"
#include "sldf/metrics.hpp"
#include "sldf/routing.hpp"
#include "sldf/simulator.hpp"
#include "sldf/topology.hpp"
#include "sldf/traffic.hpp"

namespace sldf {

enum class ExperimentKind : std::uint8_t { Sweep, Search, Analytics };
std::string_view to_string(ExperimentKind k);

/// One curve of an experiment: a network, a routing mode and a workload.
struct SeriesSpec {
    std::string label;
    TopoConfig topo;
    RoutingMode mode;
    TrafficSpec traffic;
    bool operator==(const SeriesSpec&) const = default;
};

struct OutputSpec {
    std::string dir = "out";
    std::string csv = "sweep.csv";
    std::string report = "compare.csv";
    std::string gnuplot = "sweep.dat";
    bool traces = false;  // per-packet hop traces as traces.csv
    bool operator==(const OutputSpec&) const = default;
};

/// Line-oriented config:
///
///   [experiment]  name, description, kind = sweep|search|analytics
///   [topology]    variant, a, b, m, n, r, h, g, intra_bw, sw_ports = t,l,g
///   [routing]     mode
///   [traffic]     pattern, scope, hotspot = 0,1,2,3, active_blocks, pad
///   [sim]         packet_length, buffer, vc_lanes, warmup, measure, seeds,
///                 rates = r1,r2,...  (sweep)   search = lo,hi,tol  (search)
///   [output]      dir, csv, report, gnuplot, traces
///   [series NAME] any topology, routing or traffic key; overrides the base
///
/// Without [series] sections the base forms the only series. Omitted
/// topology keys default to the radix-16 network (switch-based: 4:7:5), and a
/// sweep without rates runs 0.1 to 1.0 in steps of 0.1.
struct ExperimentSpec {
    std::string name = "experiment";
    std::string description;
    ExperimentKind kind = ExperimentKind::Sweep;
    SeriesSpec base;
    std::vector<SeriesSpec> series;
    SimParams sim;
    std::vector<double> rates;
    double search_lo = 0, search_hi = 0, search_tol = 0;
    std::vector<std::uint64_t> seeds{1};
    OutputSpec output;

    /// The series to run: `series`, or `base` alone.
    std::vector<SeriesSpec> runs() const;
    bool operator==(const ExperimentSpec&) const = default;
};

/// Throws ParseError (with line number) on syntax errors and unknown keys,
/// ValidationError when the parsed spec breaks an invariant.
ExperimentSpec parse_config(std::string_view text);
std::string print_config(const ExperimentSpec& spec);
/// Throws ValidationError.
void validate(const ExperimentSpec& spec);

/// Default label: "switchbased", "switchless", "switchless-x2", ...
std::string default_label(const TopoConfig& topo);

/// The radix-16 networks of the evaluation.
TopoConfig radix16_switchless(int intra_bw = 1);
TopoConfig radix16_switchbased();

const std::vector<std::string>& preset_names();
/// Throws std::invalid_argument listing the known presets.
ExperimentSpec preset(std::string_view name);

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,        // parse or validation error
    kExitVerification = 3,  // topology check failed or routing has a CDG cycle
    kExitRuntime = 4,       // simulation or I/O failure
};

struct RunOptions {
    int jobs = 1;
    bool dry_run = false;
    bool skip_verify = false;
    std::optional<std::string> out_dir;  // overrides spec.output.dir
    bool write_files = true;
};

struct ExperimentResult {
    int exit_code = kExitOk;
    std::vector<RunRecord> records;
    /// Saturation per series and seed, in run order.
    std::vector<std::pair<std::string, double>> saturation;
};

/// CDG verdict for one routing mode. Large networks are checked on a proxy
/// with the same W-group shape and fewer W-groups; `proxy_g` reports it.
struct RoutingCheck {
    DeadlockReport report;
    std::string witness;
    int proxy_g = 0;  // 0 when the full network was walked
};
RoutingCheck check_routing(const TopoConfig& topo, const RoutingMode& mode, bool full = false);

/// Builds, verifies, simulates and writes artifacts. Progress goes to `log`.
ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& opts, std::ostream& log);

/// Table of analytic quantities for each series' topology.
void print_analytics(std::ostream& os, const std::vector<SeriesSpec>& series);

} // namespace sldf
