#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sldf/routing.hpp"
#include "sldf/simulator.hpp"
#include "sldf/stats.hpp"
#include "sldf/traffic.hpp"

namespace sldf {

inline constexpr double kSaturationFraction = 0.95;

struct SweepPoint {
    double offered = 0;
    RunStats stats;
};

struct SweepResult {
    std::vector<SweepPoint> points;  // ascending offered rate
    double saturation = 0;           // 0 when no point qualifies
};

/// Highest offered rate whose accepted throughput is at least 95% of it.
double saturation_point(const std::vector<SweepPoint>& points);

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

/// One simulation per rate. Rates must be ascending.
SweepResult saturation_sweep(const Routing& routing, const TrafficSpec& traffic, const SimParams& params,
                             const std::vector<double>& rates, int jobs = 1);

/// Narrows [lo, hi] around the saturation point until it is `tol` wide.
/// Each round simulates `max(jobs, 1)` evenly spaced interior rates.
/// Returns the largest rate seen to pass, or 0 if none did.
SweepResult find_saturation(const Routing& routing, const TrafficSpec& traffic, const SimParams& params, double lo,
                            double hi, double tol, int jobs = 1);

/// One CSV row.
struct RunRecord {
    std::string variant;  // "switchbased", "switchless-x2", ...
    std::string mode;
    std::string pattern;
    std::string scope;
    int intra_bw = 1;
    std::uint64_t seed = 1;
    RunStats stats;
};

/// Column list of the sweep CSV, in order.
const std::vector<std::string>& sweep_columns();

/// `# sldf-sweep v1`, the column header, then one row per record.
void write_sweep_csv(std::ostream& os, const std::vector<RunRecord>& records);

/// Reads a file written by write_sweep_csv. Throws ParseError.
std::vector<RunRecord> read_sweep_csv(std::istream& is);

/// Wide table: one row per offered rate, one accepted-throughput column per
/// series (variant, mode, pattern, scope). Missing cells stay empty.
void compare_report(std::ostream& os, const std::vector<RunRecord>& records);

/// Same table as whitespace-separated columns with `?` for missing cells,
/// readable by gnuplot.
void write_gnuplot(std::ostream& os, const std::vector<RunRecord>& records);

} // namespace sldf
