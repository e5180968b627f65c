#include "sldf/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sldf/errors.hpp"

namespace sldf {

double saturation_point(const std::vector<SweepPoint>& points) {
    double best = 0;
    for (const auto& p : points)
        if (p.stats.accepted >= kSaturationFraction * p.offered) best = std::max(best, p.offered);
    return best;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    jobs = std::clamp(jobs, 1, std::max(n, 1));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> workers;
    for (int t = 0; t < jobs; ++t) {
        workers.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

namespace {

std::vector<SweepPoint> run_points(const Routing& routing, const Traffic& traffic, const SimParams& params,
                                   const std::vector<double>& rates, int jobs) {
    std::vector<SweepPoint> out(rates.size());
    parallel_for(static_cast<int>(rates.size()), jobs, [&](int i) {
        SimParams p = params;
        p.rate = rates[i];
        Simulator sim(routing, traffic, p);
        out[i].offered = rates[i];
        out[i].stats = sim.run();
    });
    return out;
}

void merge_points(std::vector<SweepPoint>& into, std::vector<SweepPoint> more) {
    for (auto& p : more) into.push_back(std::move(p));
    std::sort(into.begin(), into.end(), [](const SweepPoint& a, const SweepPoint& b) { return a.offered < b.offered; });
}

bool passes(const SweepPoint& p) { return p.stats.accepted >= kSaturationFraction * p.offered; }

} // namespace

SweepResult saturation_sweep(const Routing& routing, const TrafficSpec& traffic, const SimParams& params,
                             const std::vector<double>& rates, int jobs) {
    if (!std::is_sorted(rates.begin(), rates.end())) throw std::invalid_argument("sweep rates must be ascending");
    const Traffic tr(routing.topology(), traffic);
    SweepResult r;
    r.points = run_points(routing, tr, params, rates, jobs);
    r.saturation = saturation_point(r.points);
    return r;
}

SweepResult find_saturation(const Routing& routing, const TrafficSpec& traffic, const SimParams& params, double lo,
                            double hi, double tol, int jobs) {
    if (!(lo > 0 && hi > lo && tol > 0)) throw std::invalid_argument("find_saturation needs 0 < lo < hi and tol > 0");
    const Traffic tr(routing.topology(), traffic);
    SweepResult r;
    r.points = run_points(routing, tr, params, {lo, hi}, jobs);
    if (passes(r.points[1])) {
        r.saturation = hi;
        return r;
    }
    if (!passes(r.points[0])) return r;
    const int per_round = std::max(jobs, 1);
    while (hi - lo > tol) {
        std::vector<double> rates;
        for (int i = 1; i <= per_round; ++i) rates.push_back(lo + (hi - lo) * i / (per_round + 1));
        auto pts = run_points(routing, tr, params, rates, jobs);
        double new_lo = lo, new_hi = hi;
        for (const auto& p : pts) {
            if (passes(p)) new_lo = std::max(new_lo, p.offered);
        }
        for (const auto& p : pts) {
            if (!passes(p) && p.offered > new_lo) new_hi = std::min(new_hi, p.offered);
        }
        merge_points(r.points, std::move(pts));
        lo = new_lo;
        hi = new_hi;
    }
    r.saturation = lo;
    return r;
}

const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> cols{
        "variant", "mode",      "pattern", "scope",   "intra_bw", "seed",     "offered",          "accepted",
        "lat_mean", "lat_median", "lat_p99", "packets", "h_g",      "h_l",      "h_lstar",          "h_sr",
        "h_onchip", "energy_pj_per_bit"};
    return cols;
}

namespace {

std::string num(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_num(const std::string& s, int line) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ParseError(line, "bad number '" + s + "'");
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

constexpr int kHopOrder[] = {static_cast<int>(HopClass::Global), static_cast<int>(HopClass::Local),
                             static_cast<int>(HopClass::Terminal), static_cast<int>(HopClass::ShortReach),
                             static_cast<int>(HopClass::OnChip)};

} // namespace

void write_sweep_csv(std::ostream& os, const std::vector<RunRecord>& records) {
    os << "# sldf-sweep v1\n";
    const auto& cols = sweep_columns();
    for (size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& r : records) {
        const auto& s = r.stats;
        os << r.variant << ',' << r.mode << ',' << r.pattern << ',' << r.scope << ',' << r.intra_bw << ',' << r.seed
           << ',' << num(s.offered) << ',' << num(s.accepted) << ',' << num(s.lat_mean) << ',' << num(s.lat_median)
           << ',' << num(s.lat_p99) << ',' << s.packets;
        for (int h : kHopOrder) os << ',' << num(s.mean_hops[h]);
        os << ',' << num(s.energy_pj_per_bit) << '\n';
    }
}

std::vector<RunRecord> read_sweep_csv(std::istream& is) {
    std::vector<RunRecord> out;
    std::string line;
    int ln = 0;
    if (!std::getline(is, line) || (++ln, line != "# sldf-sweep v1")) throw ParseError(1, "missing '# sldf-sweep v1'");
    ++ln;
    if (!std::getline(is, line) || split_csv(line) != sweep_columns()) throw ParseError(ln, "unexpected column header");
    while (std::getline(is, line)) {
        ++ln;
        if (line.empty()) continue;
        const auto c = split_csv(line);
        if (c.size() != sweep_columns().size())
            throw ParseError(ln, "expected " + std::to_string(sweep_columns().size()) + " cells, got " +
                                     std::to_string(c.size()));
        RunRecord r;
        r.variant = c[0];
        r.mode = c[1];
        r.pattern = c[2];
        r.scope = c[3];
        r.intra_bw = static_cast<int>(parse_num(c[4], ln));
        r.seed = static_cast<std::uint64_t>(parse_num(c[5], ln));
        auto& s = r.stats;
        s.offered = parse_num(c[6], ln);
        s.accepted = parse_num(c[7], ln);
        s.lat_mean = parse_num(c[8], ln);
        s.lat_median = parse_num(c[9], ln);
        s.lat_p99 = parse_num(c[10], ln);
        s.packets = static_cast<std::int64_t>(parse_num(c[11], ln));
        for (int i = 0; i < kNumHopClasses; ++i) s.mean_hops[kHopOrder[i]] = parse_num(c[12 + i], ln);
        s.energy_pj_per_bit = parse_num(c[17], ln);
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

struct Table {
    std::vector<std::string> series;
    std::vector<double> rates;
    std::map<std::pair<double, int>, std::pair<double, int>> cells;  // (rate, series) -> (sum, count)
};

Table tabulate(const std::vector<RunRecord>& records) {
    Table t;
    std::map<std::string, int> index;
    for (const auto& r : records) {
        const std::string key = r.variant + "/" + r.mode + "/" + r.pattern + "/" + r.scope;
        auto [it, fresh] = index.emplace(key, static_cast<int>(t.series.size()));
        if (fresh) t.series.push_back(key);
        t.rates.push_back(r.stats.offered);
        auto& cell = t.cells[{r.stats.offered, it->second}];
        cell.first += r.stats.accepted;
        ++cell.second;
    }
    std::sort(t.rates.begin(), t.rates.end());
    t.rates.erase(std::unique(t.rates.begin(), t.rates.end()), t.rates.end());
    return t;
}

void emit(std::ostream& os, const Table& t, const char* sep, const char* missing, const char* lead) {
    os << lead << "offered";
    for (const auto& s : t.series) os << sep << s;
    os << '\n';
    for (double rate : t.rates) {
        os << num(rate);
        for (int i = 0; i < static_cast<int>(t.series.size()); ++i) {
            os << sep;
            auto it = t.cells.find({rate, i});
            if (it == t.cells.end()) os << missing;
            else os << num(it->second.first / it->second.second);
        }
        os << '\n';
    }
}

} // namespace

void compare_report(std::ostream& os, const std::vector<RunRecord>& records) {
    emit(os, tabulate(records), ",", "", "");
}

void write_gnuplot(std::ostream& os, const std::vector<RunRecord>& records) {
    emit(os, tabulate(records), " ", "?", "# ");
}

} // namespace sldf
