#include "sldf/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "sldf/analytics.hpp"
#include "sldf/cdg.hpp"
#include "sldf/errors.hpp"
#include "sldf/manifest.hpp"

namespace sldf {

std::string_view to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::Sweep: return "sweep";
    case ExperimentKind::Search: return "search";
    case ExperimentKind::Analytics: return "analytics";
    }
    return "?";
}

std::vector<SeriesSpec> ExperimentSpec::runs() const {
    if (!series.empty()) return series;
    SeriesSpec s = base;
    if (s.label.empty()) s.label = default_label(s.topo);
    return {s};
}

std::string default_label(const TopoConfig& topo) {
    if (topo.variant == Variant::SwitchBased) return "switchbased";
    if (topo.intra_bw == 1) return "switchless";
    return "switchless-x" + std::to_string(topo.intra_bw);
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string num(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::string& v, int line, const std::string& key) {
    T out{};
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw ParseError(line, key + ": expected a number, got '" + v + "'");
    return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& v, int line, const std::string& key) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(trim(item), line, key));
    return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_floating_point_v<T>) out += num(v[i]);
        else out += std::to_string(v[i]);
    }
    return out;
}

bool parse_bool(const std::string& v, int line, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError(line, key + ": expected true or false, got '" + v + "'");
}

// Wraps enum parsers that throw std::invalid_argument.
template <typename F>
auto parse_enum(F f, const std::string& v, int line) {
    try {
        return f(v);
    } catch (const std::invalid_argument& e) {
        throw ParseError(line, e.what());
    }
}

bool apply_topology_key(TopoConfig& t, const std::string& key, const std::string& v, int line) {
    auto opt = [&](std::optional<int>& o) {
        if (v == "auto") o.reset();
        else o = parse_number<int>(v, line, key);
    };
    if (key == "variant") t.variant = parse_enum(variant_from_string, v, line);
    else if (key == "a") t.a = parse_number<int>(v, line, key);
    else if (key == "b") t.b = parse_number<int>(v, line, key);
    else if (key == "m") t.m = parse_number<int>(v, line, key);
    else if (key == "n") t.n = parse_number<int>(v, line, key);
    else if (key == "r") t.r = parse_number<int>(v, line, key);
    else if (key == "h") opt(t.h_override);
    else if (key == "g") opt(t.g_override);
    else if (key == "intra_bw") t.intra_bw = parse_number<int>(v, line, key);
    else if (key == "sw_ports") {
        const auto p = parse_list<int>(v, line, key);
        if (p.size() != 3) throw ParseError(line, "sw_ports: expected terminal,local,global");
        t.sw_ports = {p[0], p[1], p[2]};
    } else return false;
    return true;
}

bool apply_routing_key(RoutingMode& m, const std::string& key, const std::string& v, int line) {
    if (key != "mode") return false;
    m = parse_enum(mode_from_name, v, line);
    return true;
}

bool apply_traffic_key(TrafficSpec& t, const std::string& key, const std::string& v, int line) {
    if (key == "pattern") t.kind = parse_enum(pattern_from_string, v, line);
    else if (key == "scope") t.scope = parse_enum(scope_from_string, v, line);
    else if (key == "hotspot") t.hotspot_groups = parse_list<int>(v, line, key);
    else if (key == "active_blocks") t.active_blocks = parse_number<int>(v, line, key);
    else if (key == "pad") t.pad = parse_bool(v, line, key);
    else return false;
    return true;
}

using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues topology_kv(const TopoConfig& t) {
    auto opt = [](const std::optional<int>& o) { return o ? std::to_string(*o) : std::string("auto"); };
    return {{"variant", std::string(to_string(t.variant))},
            {"a", std::to_string(t.a)},
            {"b", std::to_string(t.b)},
            {"m", std::to_string(t.m)},
            {"n", std::to_string(t.n)},
            {"r", std::to_string(t.r)},
            {"h", opt(t.h_override)},
            {"g", opt(t.g_override)},
            {"intra_bw", std::to_string(t.intra_bw)},
            {"sw_ports", join(std::vector<int>{t.sw_ports.terminal, t.sw_ports.local, t.sw_ports.global})}};
}

KeyValues routing_kv(const RoutingMode& m) { return {{"mode", mode_name(m)}}; }

KeyValues traffic_kv(const TrafficSpec& t) {
    return {{"pattern", std::string(to_string(t.kind))},
            {"scope", std::string(to_string(t.scope))},
            {"hotspot", join(t.hotspot_groups)},
            {"active_blocks", std::to_string(t.active_blocks)},
            {"pad", t.pad ? "true" : "false"}};
}

KeyValues series_kv(const SeriesSpec& s) {
    KeyValues kv = topology_kv(s.topo);
    for (auto& p : routing_kv(s.mode)) kv.push_back(p);
    for (auto& p : traffic_kv(s.traffic)) kv.push_back(p);
    return kv;
}

struct PendingSeries {
    std::string label;
    int line = 0;
    std::vector<std::tuple<std::string, std::string, int>> keys;
};

} // namespace

namespace {

// Switch-based topologies without sw_ports get the radix-16 4:7:5 split.
void fill_defaults(TopoConfig& t) {
    if (t.variant == Variant::SwitchBased && t.sw_ports == SwitchPorts{}) t.sw_ports = radix16_switchbased().sw_ports;
}

} // namespace

ExperimentSpec parse_config(std::string_view text) {
    ExperimentSpec spec;
    spec.base.topo = radix16_switchless();
    std::vector<PendingSeries> pending;
    std::string section;
    std::set<std::pair<std::string, std::string>> seen;  // (section, key)
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
            const std::string body = trim(std::string_view(line).substr(1, line.size() - 2));
            if (body.rfind("series", 0) == 0 && (body.size() == 6 || body[6] == ' ' || body[6] == '\t')) {
                const std::string label = trim(std::string_view(body).substr(6));
                if (label.empty()) throw ParseError(line_no, "series needs a name");
                for (const auto& p : pending)
                    if (p.label == label) throw ParseError(line_no, "duplicate series '" + label + "'");
                pending.push_back({label, line_no, {}});
                section = "series " + label;
                continue;
            }
            static const std::set<std::string> known{"experiment", "topology", "routing", "traffic", "sim", "output"};
            if (!known.count(body)) throw ParseError(line_no, "unknown section [" + body + "]");
            section = body;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string v = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ParseError(line_no, "empty key");
        if (section.empty()) throw ParseError(line_no, "key '" + key + "' outside a section");
        if (!seen.insert({section, key}).second) throw ParseError(line_no, "duplicate key '" + key + "'");

        bool ok = true;
        if (section == "experiment") {
            if (key == "name") spec.name = v;
            else if (key == "description") spec.description = v;
            else if (key == "kind") {
                if (v == "sweep") spec.kind = ExperimentKind::Sweep;
                else if (v == "search") spec.kind = ExperimentKind::Search;
                else if (v == "analytics") spec.kind = ExperimentKind::Analytics;
                else throw ParseError(line_no, "kind: expected sweep, search or analytics");
            } else ok = false;
        } else if (section == "topology") {
            ok = apply_topology_key(spec.base.topo, key, v, line_no);
        } else if (section == "routing") {
            ok = apply_routing_key(spec.base.mode, key, v, line_no);
        } else if (section == "traffic") {
            ok = apply_traffic_key(spec.base.traffic, key, v, line_no);
        } else if (section == "sim") {
            auto& s = spec.sim;
            if (key == "packet_length") s.packet_length = parse_number<int>(v, line_no, key);
            else if (key == "buffer") s.buffer = parse_number<int>(v, line_no, key);
            else if (key == "vc_lanes") s.vc_lanes = parse_number<int>(v, line_no, key);
            else if (key == "warmup") s.warmup = parse_number<std::int64_t>(v, line_no, key);
            else if (key == "measure") s.measure = parse_number<std::int64_t>(v, line_no, key);
            else if (key == "check_invariants") s.check_invariants = parse_bool(v, line_no, key);
            else if (key == "seeds") spec.seeds = parse_list<std::uint64_t>(v, line_no, key);
            else if (key == "rates") spec.rates = parse_list<double>(v, line_no, key);
            else if (key == "search") {
                const auto p = parse_list<double>(v, line_no, key);
                if (p.size() != 3) throw ParseError(line_no, "search: expected lo,hi,tol");
                spec.search_lo = p[0];
                spec.search_hi = p[1];
                spec.search_tol = p[2];
            } else ok = false;
        } else if (section == "output") {
            auto& o = spec.output;
            if (key == "dir") o.dir = v;
            else if (key == "csv") o.csv = v;
            else if (key == "report") o.report = v;
            else if (key == "gnuplot") o.gnuplot = v;
            else if (key == "traces") o.traces = parse_bool(v, line_no, key);
            else ok = false;
        } else {
            // Series keys are applied once the base is complete.
            TopoConfig t;
            RoutingMode m;
            TrafficSpec tr;
            ok = apply_topology_key(t, key, v, line_no) || apply_routing_key(m, key, v, line_no) ||
                 apply_traffic_key(tr, key, v, line_no);
            if (ok) pending.back().keys.emplace_back(key, v, line_no);
        }
        if (!ok) throw ParseError(line_no, "unknown key '" + key + "' in [" + section + "]");
    }
    fill_defaults(spec.base.topo);
    if (spec.kind == ExperimentKind::Sweep && spec.rates.empty())
        spec.rates = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    for (const auto& p : pending) {
        SeriesSpec s = spec.base;
        s.label = p.label;
        for (const auto& [key, v, ln] : p.keys)
            apply_topology_key(s.topo, key, v, ln) || apply_routing_key(s.mode, key, v, ln) ||
                apply_traffic_key(s.traffic, key, v, ln);
        fill_defaults(s.topo);
        spec.series.push_back(std::move(s));
    }
    validate(spec);
    return spec;
}

std::string print_config(const ExperimentSpec& spec) {
    std::ostringstream os;
    os << "[experiment]\nname = " << spec.name << '\n';
    if (!spec.description.empty()) os << "description = " << spec.description << '\n';
    os << "kind = " << to_string(spec.kind) << '\n';
    auto section = [&](const char* name, const KeyValues& kv) {
        os << "\n[" << name << "]\n";
        for (const auto& [k, v] : kv) os << k << " = " << v << '\n';
    };
    section("topology", topology_kv(spec.base.topo));
    section("routing", routing_kv(spec.base.mode));
    section("traffic", traffic_kv(spec.base.traffic));
    KeyValues sim{{"packet_length", std::to_string(spec.sim.packet_length)},
                  {"buffer", std::to_string(spec.sim.buffer)},
                  {"vc_lanes", std::to_string(spec.sim.vc_lanes)},
                  {"warmup", std::to_string(spec.sim.warmup)},
                  {"measure", std::to_string(spec.sim.measure)},
                  {"check_invariants", spec.sim.check_invariants ? "true" : "false"},
                  {"seeds", join(spec.seeds)}};
    if (!spec.rates.empty()) sim.emplace_back("rates", join(spec.rates));
    if (spec.search_hi > 0)
        sim.emplace_back("search", join(std::vector<double>{spec.search_lo, spec.search_hi, spec.search_tol}));
    section("sim", sim);
    section("output", {{"dir", spec.output.dir},
                       {"csv", spec.output.csv},
                       {"report", spec.output.report},
                       {"gnuplot", spec.output.gnuplot},
                       {"traces", spec.output.traces ? "true" : "false"}});
    const KeyValues base = series_kv(spec.base);
    for (const auto& s : spec.series) {
        os << "\n[series " << s.label << "]\n";
        const KeyValues kv = series_kv(s);
        for (size_t i = 0; i < kv.size(); ++i)
            if (kv[i].second != base[i].second) os << kv[i].first << " = " << kv[i].second << '\n';
    }
    return os.str();
}

void validate(const ExperimentSpec& spec) {
    auto fail = [](const std::string& what) { throw ValidationError(what); };
    if (spec.name.empty()) fail("experiment name is empty");
    std::set<std::string> labels;
    for (const auto& s : spec.runs()) {
        if (!labels.insert(s.label).second) fail("duplicate series label '" + s.label + "'");
        try {
            s.topo.validate();
        } catch (const ConfigError& e) {
            fail("series " + s.label + ": " + e.what());
        }
        if (s.traffic.hotspot_groups.empty()) fail("series " + s.label + ": hotspot needs at least one W-group");
        if (s.traffic.active_blocks < 0) fail("series " + s.label + ": active_blocks must be >= 0");
    }
    const auto& p = spec.sim;
    if (p.packet_length < 1) fail("packet_length must be >= 1");
    if (p.buffer < p.packet_length) fail("buffer must hold a whole packet");
    if (p.vc_lanes < 1) fail("vc_lanes must be >= 1");
    if (p.warmup < 0) fail("warmup must be >= 0");
    if (p.measure <= 0) fail("measure must be > 0");
    if (spec.seeds.empty()) fail("at least one seed is required");
    if (spec.kind == ExperimentKind::Sweep) {
        if (spec.rates.empty()) fail("a sweep needs rates");
        if (!std::is_sorted(spec.rates.begin(), spec.rates.end())) fail("rates must be ascending");
        if (spec.rates.front() < 0) fail("rates must be >= 0");
    }
    if (spec.kind == ExperimentKind::Search &&
        !(spec.search_lo > 0 && spec.search_hi > spec.search_lo && spec.search_tol > 0))
        fail("search needs 0 < lo < hi and tol > 0");
}

TopoConfig radix16_switchless(int intra_bw) {
    TopoConfig t;
    t.a = 2;
    t.b = 4;
    t.m = 2;
    t.n = 6;
    t.r = 2;
    t.intra_bw = intra_bw;
    return t;
}

TopoConfig radix16_switchbased() {
    TopoConfig t;
    t.variant = Variant::SwitchBased;
    t.sw_ports = {4, 7, 5};
    return t;
}

namespace {

SeriesSpec make_series(const TopoConfig& topo, const std::string& mode, PatternKind kind, Scope scope,
                       std::string label = {}) {
    SeriesSpec s;
    s.topo = topo;
    s.mode = mode_from_name(mode);
    s.traffic.kind = kind;
    s.traffic.scope = scope;
    s.label = label.empty() ? default_label(topo) : std::move(label);
    return s;
}

std::vector<double> steps(double from, double to, double step) {
    std::vector<double> out;
    for (int i = 0;; ++i) {
        const double v = std::round((from + i * step) * 1e6) / 1e6;
        if (v > to + 1e-9) break;
        out.push_back(v);
    }
    return out;
}

ExperimentSpec base_spec(std::string name, std::string description) {
    ExperimentSpec e;
    e.name = std::move(name);
    e.description = std::move(description);
    e.output.dir = "out/" + e.name;
    return e;
}

// Three networks under minimal routing: baseline, 1x and 2x on-wafer bandwidth.
void three_networks(ExperimentSpec& e, PatternKind kind, Scope scope, int active_blocks) {
    e.base = make_series(radix16_switchless(), "baseline-min", kind, scope);
    e.base.traffic.active_blocks = active_blocks;
    e.base.label.clear();
    for (const auto& t : {radix16_switchbased(), radix16_switchless(1), radix16_switchless(2)}) {
        auto s = make_series(t, "baseline-min", kind, scope);
        s.traffic.active_blocks = active_blocks;
        e.series.push_back(s);
    }
}

ExperimentSpec build_preset(std::string_view name) {
    if (name == "fig8a" || name == "fig8b") {
        const bool uni = name == "fig8a";
        auto e = base_spec(std::string(name), std::string("radix-16 intra-C-group ") + (uni ? "uniform" : "bit-reverse"));
        three_networks(e, uni ? PatternKind::Uniform : PatternKind::BitReverse, Scope::IntraCGroup, 8);
        e.rates = steps(0.2, 4.0, 0.2);
        return e;
    }
    if (name == "fig8c" || name == "fig8d" || name == "fig8e" || name == "fig8f") {
        static const std::map<std::string_view, std::pair<PatternKind, const char*>> panels{
            {"fig8c", {PatternKind::Uniform, "uniform"}},
            {"fig8d", {PatternKind::BitReverse, "bit-reverse"}},
            {"fig8e", {PatternKind::BitShuffle, "bit-shuffle"}},
            {"fig8f", {PatternKind::BitTranspose, "bit-transpose"}}};
        const auto& [kind, label] = panels.at(name);
        auto e = base_spec(std::string(name), std::string("radix-16 intra-W-group ") + label);
        three_networks(e, kind, Scope::IntraWGroup, 4);
        e.rates = steps(0.2, 3.0, 0.2);
        return e;
    }
    if (name == "fig9a" || name == "fig9b") {
        const bool uni = name == "fig9a";
        auto e = base_spec(std::string(name), std::string("radix-16 global ") + (uni ? "uniform" : "bit-reverse"));
        three_networks(e, uni ? PatternKind::Uniform : PatternKind::BitReverse, Scope::Global, 0);
        if (!uni) {
            e.base.traffic.pad = true;
            for (auto& s : e.series) s.traffic.pad = true;
        }
        e.rates = steps(0.1, 1.4, 0.1);
        return e;
    }
    if (name == "fig10a" || name == "fig10b") {
        const bool hot = name == "fig10a";
        auto e = base_spec(std::string(name), std::string("radix-16 minimal vs non-minimal, ") +
                                                  (hot ? "hotspot" : "worst-case"));
        const auto kind = hot ? PatternKind::Hotspot : PatternKind::WorstCase;
        e.base = make_series(radix16_switchless(), "baseline-min", kind, Scope::Global);
        e.base.label.clear();
        e.series = {make_series(radix16_switchbased(), "baseline-min", kind, Scope::Global, "switchbased-min"),
                    make_series(radix16_switchbased(), "baseline-nonmin", kind, Scope::Global, "switchbased-nonmin"),
                    make_series(radix16_switchless(1), "baseline-min", kind, Scope::Global, "switchless-min"),
                    make_series(radix16_switchless(1), "baseline-nonmin", kind, Scope::Global,
                                "switchless-nonmin"),
                    make_series(radix16_switchless(2), "baseline-min", kind, Scope::Global, "switchless-x2-min"),
                    make_series(radix16_switchless(2), "baseline-nonmin", kind, Scope::Global,
                                "switchless-x2-nonmin")};
        e.rates = {0.005, 0.01, 0.02, 0.03, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0};
        return e;
    }
    if (name == "fig11a" || name == "fig11b") {
        const bool cg = name == "fig11a";
        const Scope scope = cg ? Scope::IntraCGroup : Scope::IntraWGroup;
        auto e = base_spec(std::string(name), std::string("radix-16 ring AllReduce, ") +
                                                  (cg ? "intra-C-group" : "intra-W-group"));
        e.base = make_series(radix16_switchless(), "baseline-min", PatternKind::AllReduceUni, scope);
        e.base.traffic.active_blocks = cg ? 8 : 4;
        e.base.label.clear();
        std::vector<TopoConfig> nets{radix16_switchbased(), radix16_switchless(1)};
        if (!cg) nets.push_back(radix16_switchless(2));
        for (const auto& t : nets) {
            for (auto kind : {PatternKind::AllReduceUni, PatternKind::AllReduceBi}) {
                const std::string label = default_label(t) + (kind == PatternKind::AllReduceUni ? "-uni" : "-bi");
                auto s = make_series(t, "baseline-min", kind,
                                     scope, label);
                s.traffic.active_blocks = e.base.traffic.active_blocks;
                e.series.push_back(s);
            }
        }
        e.rates = cg ? steps(0.25, 5.0, 0.25) : steps(0.1, 2.6, 0.1);
        return e;
    }
    if (name == "fig12-small") {
        auto e = base_spec("fig12-small", "radix-16 energy per transmission, uniform, minimal vs non-minimal");
        e.base = make_series(radix16_switchless(), "baseline-min", PatternKind::Uniform, Scope::Global);
        e.base.label.clear();
        e.series = {make_series(radix16_switchbased(), "baseline-min", PatternKind::Uniform, Scope::Global,
                                "switchbased-min"),
                    make_series(radix16_switchbased(), "baseline-nonmin", PatternKind::Uniform, Scope::Global,
                                "switchbased-nonmin"),
                    make_series(radix16_switchless(), "baseline-min", PatternKind::Uniform, Scope::Global,
                                "switchless-min"),
                    make_series(radix16_switchless(), "baseline-nonmin", PatternKind::Uniform,
                                Scope::Global, "switchless-nonmin")};
        e.rates = {0.1};
        return e;
    }
    if (name == "table3-analytics") {
        auto e = base_spec("table3-analytics", "analytic scale and bounds of the 279040-chip comparison networks");
        e.kind = ExperimentKind::Analytics;
        TopoConfig sl;
        sl.a = 4;
        sl.b = 8;
        sl.m = 4;
        sl.n = 12;
        TopoConfig sb;
        sb.variant = Variant::SwitchBased;
        sb.sw_ports = {16, 31, 17};
        e.base = make_series(sl, "baseline-min", PatternKind::Uniform, Scope::Global);
        e.base.label.clear();
        e.series = {make_series(sb, "baseline-min", PatternKind::Uniform, Scope::Global, "dragonfly"),
                    make_series(sl, "baseline-min", PatternKind::Uniform, Scope::Global, "switchless")};
        e.rates = {0};
        return e;
    }
    if (name == "large-scale") {
        auto e = base_spec("large-scale", "radix-32 global uniform, 145 groups (long running)");
        TopoConfig sl;
        sl.a = 2;
        sl.b = 8;
        sl.m = 2;
        sl.n = 12;
        sl.r = 2;
        TopoConfig sb;
        sb.variant = Variant::SwitchBased;
        sb.sw_ports = {8, 15, 9};
        e.base = make_series(sl, "baseline-min", PatternKind::Uniform, Scope::Global);
        e.base.label.clear();
        TopoConfig sl2 = sl;
        sl2.intra_bw = 2;
        e.series = {make_series(sb, "baseline-min", PatternKind::Uniform, Scope::Global),
                    make_series(sl, "baseline-min", PatternKind::Uniform, Scope::Global),
                    make_series(sl2, "baseline-min", PatternKind::Uniform, Scope::Global)};
        e.rates = steps(0.1, 1.2, 0.1);
        return e;
    }
    return {};
}

} // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"fig8a",  "fig8b",  "fig8c",  "fig8d",       "fig8e",
                                                "fig8f",  "fig9a",  "fig9b",  "fig10a",      "fig10b",
                                                "fig11a", "fig11b", "fig12-small", "table3-analytics",
                                                "large-scale"};
    return names;
}

ExperimentSpec preset(std::string_view name) {
    if (std::find(preset_names().begin(), preset_names().end(), name) == preset_names().end()) {
        std::string list;
        for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
        throw std::invalid_argument("unknown preset '" + std::string(name) + "'; known presets: " + list);
    }
    return build_preset(name);
}

RoutingCheck check_routing(const TopoConfig& topo, const RoutingMode& mode, bool full) {
    constexpr int kProxyGroups = 5;
    RoutingCheck rc;
    TopoConfig cfg = topo;
    if (!full && cfg.g() > kProxyGroups) {
        cfg.g_override = kProxyGroups;
        rc.proxy_g = kProxyGroups;
    }
    const Topology t = build_topology(cfg);
    const Routing routing(t, mode);
    rc.report = check_deadlock_free(build_cdg(routing));
    if (!rc.report.acyclic) rc.witness = format_cycle(t, rc.report);
    return rc;
}

void print_analytics(std::ostream& os, const std::vector<SeriesSpec>& series) {
    os << std::left << std::setw(14) << "network" << std::setw(12) << "variant" << std::setw(8) << "h" << std::setw(8)
       << "g" << std::setw(10) << "chips" << std::setw(10) << "T_cg" << std::setw(10) << "T_local" << std::setw(10)
       << "T_global" << std::setw(8) << "B_cg"
       << "diameter\n";
    for (const auto& s : series) {
        const auto b = analytic_bounds(s.topo);
        os << std::left << std::setw(14) << s.label << std::setw(12) << to_string(s.topo.variant) << std::setw(8)
           << s.topo.h() << std::setw(8) << s.topo.g() << std::setw(10) << analytic_scale(s.topo) << std::setw(10)
           << num(b.t_cg) << std::setw(10) << num(b.t_local) << std::setw(10) << num(b.t_global) << std::setw(8)
           << b.b_cg << format_diameter(b.diameter) << '\n';
    }
}

namespace {

struct Prepared {
    SeriesSpec spec;
    std::shared_ptr<const Topology> topo;
    std::unique_ptr<Routing> routing;
    std::unique_ptr<Traffic> traffic;
};

RunRecord make_record(const SeriesSpec& s, std::uint64_t seed, const RunStats& stats) {
    RunRecord r;
    r.variant = s.label;
    r.mode = mode_name(s.mode);
    r.pattern = std::string(to_string(s.traffic.kind));
    r.scope = std::string(to_string(s.traffic.scope));
    r.intra_bw = s.topo.intra_bw;
    r.seed = seed;
    r.stats = stats;
    return r;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

} // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& opts, std::ostream& log) {
    ExperimentResult res;
    try {
        validate(spec);
    } catch (const ValidationError& e) {
        log << "invalid experiment: " << e.what() << '\n';
        res.exit_code = kExitConfig;
        return res;
    }
    const auto runs = spec.runs();
    log << spec.name << ": " << runs.size() << " series, kind " << to_string(spec.kind) << '\n';
    if (spec.kind == ExperimentKind::Analytics) {
        print_analytics(log, runs);
        return res;
    }
    if (opts.dry_run) {
        for (const auto& s : runs)
            log << "  " << s.label << ": " << to_string(s.topo.variant) << " g=" << s.topo.g() << " mode "
                << mode_name(s.mode) << " pattern " << to_string(s.traffic.kind) << "/" << to_string(s.traffic.scope)
                << '\n';
        log << "dry run: configuration valid, nothing simulated\n";
        return res;
    }

    std::vector<Prepared> prepared;
    try {
        std::map<std::string, std::shared_ptr<const Topology>> topo_cache;
        std::set<std::pair<std::string, std::string>> routing_checked;
        for (const auto& s : runs) {
            const std::string key = format_topo_config_line(s.topo);
            auto& topo = topo_cache[key];
            if (!topo) {
                topo = std::make_shared<const Topology>(build_topology(s.topo));
                if (!opts.skip_verify) {
                    const auto rep = verify_topology(*topo);
                    for (const auto& c : rep.checks)
                        if (!c.pass) log << "topology check " << c.name << " failed: " << c.witness << '\n';
                    if (!rep.all_pass()) {
                        res.exit_code = kExitVerification;
                        return res;
                    }
                }
            }
            if (!opts.skip_verify && routing_checked.insert({key, mode_name(s.mode)}).second) {
                const auto rc = check_routing(s.topo, s.mode);
                log << "routing " << mode_name(s.mode) << " on " << s.label << ": "
                    << (rc.report.acyclic ? "deadlock free" : "CDG cycle")
                    << (rc.proxy_g ? " (checked with g=" + std::to_string(rc.proxy_g) + ")" : std::string()) << '\n';
                if (!rc.report.acyclic) {
                    log << rc.witness;
                    res.exit_code = kExitVerification;
                    return res;
                }
            }
            Prepared p;
            p.spec = s;
            p.topo = topo;
            p.routing = std::make_unique<Routing>(*topo, s.mode);
            p.traffic = std::make_unique<Traffic>(*topo, s.traffic);
            prepared.push_back(std::move(p));
        }
    } catch (const std::exception& e) {
        log << "setup failed: " << e.what() << '\n';
        res.exit_code = kExitRuntime;
        return res;
    }

    std::vector<PacketTrace> all_traces;
    std::vector<std::string> trace_tags;
    try {
        const int nseeds = static_cast<int>(spec.seeds.size());
        if (spec.kind == ExperimentKind::Sweep) {
            const int nrates = static_cast<int>(spec.rates.size());
            const int ntasks = static_cast<int>(prepared.size()) * nseeds * nrates;
            std::vector<RunStats> stats(ntasks);
            std::vector<std::vector<PacketTrace>> traces(spec.output.traces ? ntasks : 0);
            parallel_for(ntasks, opts.jobs, [&](int i) {
                const auto& p = prepared[i / (nseeds * nrates)];
                SimParams sp = spec.sim;
                sp.seed = spec.seeds[(i / nrates) % nseeds];
                sp.rate = spec.rates[i % nrates];
                sp.trace = spec.output.traces;
                Simulator sim(*p.routing, *p.traffic, sp);
                stats[i] = sim.run();
                if (sp.trace) traces[i] = sim.traces();
            });
            for (int i = 0; i < ntasks; ++i) {
                const auto& p = prepared[i / (nseeds * nrates)];
                const auto seed = spec.seeds[(i / nrates) % nseeds];
                res.records.push_back(make_record(p.spec, seed, stats[i]));
                if (spec.output.traces) {
                    for (const auto& t : traces[i]) {
                        all_traces.push_back(t);
                        trace_tags.push_back(p.spec.label + "," + std::to_string(seed) + "," + num(stats[i].offered));
                    }
                }
            }
            for (size_t si = 0; si < prepared.size(); ++si) {
                for (int k = 0; k < nseeds; ++k) {
                    std::vector<SweepPoint> pts;
                    for (int j = 0; j < nrates; ++j) {
                        const auto& st = stats[(si * nseeds + k) * nrates + j];
                        pts.push_back({st.offered, st});
                    }
                    res.saturation.emplace_back(prepared[si].spec.label, saturation_point(pts));
                }
            }
        } else {
            const int ntasks = static_cast<int>(prepared.size()) * nseeds;
            std::vector<SweepResult> found(ntasks);
            const int inner = std::max(1, opts.jobs / std::max(ntasks, 1));
            parallel_for(ntasks, opts.jobs, [&](int i) {
                const auto& p = prepared[i / nseeds];
                SimParams sp = spec.sim;
                sp.seed = spec.seeds[i % nseeds];
                found[i] = find_saturation(*p.routing, p.spec.traffic, sp, spec.search_lo, spec.search_hi,
                                           spec.search_tol, inner);
            });
            for (int i = 0; i < ntasks; ++i) {
                const auto& p = prepared[i / nseeds];
                for (const auto& pt : found[i].points)
                    res.records.push_back(make_record(p.spec, spec.seeds[i % nseeds], pt.stats));
                res.saturation.emplace_back(p.spec.label, found[i].saturation);
            }
        }
    } catch (const std::exception& e) {
        log << "simulation failed: " << e.what() << '\n';
        res.exit_code = kExitRuntime;
        return res;
    }

    for (size_t i = 0; i < res.saturation.size(); ++i)
        log << "  saturation " << res.saturation[i].first << " seed "
            << spec.seeds[i % spec.seeds.size()] << ": " << num(res.saturation[i].second) << '\n';

    if (!opts.write_files) return res;
    try {
        const std::filesystem::path dir = opts.out_dir.value_or(spec.output.dir);
        std::filesystem::create_directories(dir);
        std::ostringstream csv, report, plot;
        write_sweep_csv(csv, res.records);
        compare_report(report, res.records);
        write_gnuplot(plot, res.records);
        write_file(dir / spec.output.csv, csv.str());
        write_file(dir / spec.output.report, report.str());
        write_file(dir / spec.output.gnuplot, plot.str());
        write_file(dir / "experiment.conf", print_config(spec));
        if (spec.output.traces) {
            std::ostringstream tr;
            tr << "series,seed,offered,src_chip,dst_chip,create,inject,eject,h_g,h_l,h_lstar,h_sr,h_onchip\n";
            for (size_t i = 0; i < all_traces.size(); ++i) {
                const auto& t = all_traces[i];
                tr << trace_tags[i] << ',' << t.src_chip << ',' << t.dst_chip << ',' << t.create_cycle << ','
                   << t.inject_cycle << ',' << t.eject_cycle;
                for (HopClass h : {HopClass::Global, HopClass::Local, HopClass::Terminal, HopClass::ShortReach,
                                   HopClass::OnChip})
                    tr << ',' << t.hops[static_cast<int>(h)];
                tr << '\n';
            }
            write_file(dir / "traces.csv", tr.str());
        }
        log << "wrote " << (dir / spec.output.csv).string() << '\n';
    } catch (const std::exception& e) {
        log << "output failed: " << e.what() << '\n';
        res.exit_code = kExitRuntime;
    }
    return res;
}

} // namespace sldf
