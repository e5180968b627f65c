// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
//   acceptance [criterion...]   run only the listed criteria (1-10)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sldf/analytics.hpp"
#include "sldf/cdg.hpp"
#include "sldf/errors.hpp"
#include "sldf/experiment.hpp"
#include "sldf/labeling.hpp"
#include "sldf/manifest.hpp"
#include "sldf/metrics.hpp"
#include "sldf/simulator.hpp"
#include "sldf/topology.hpp"

using namespace sldf;

namespace {

struct Net {
    std::unique_ptr<Topology> topo;
    std::unique_ptr<Routing> routing;
};

Net make_net(const TopoConfig& c, const std::string& mode) {
    Net n;
    n.topo = std::make_unique<Topology>(build_topology(c));
    n.routing = std::make_unique<Routing>(*n.topo, mode_from_name(mode));
    return n;
}

// Networks are reused across criteria.
Net& net(const TopoConfig& c, const std::string& mode) {
    static std::map<std::string, Net> cache;
    const std::string key = format_topo_config_line(c) + " " + mode;
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, make_net(c, mode)).first;
    return it->second;
}

TrafficSpec traffic(PatternKind k, Scope s, int active_blocks = 0) {
    TrafficSpec t;
    t.kind = k;
    t.scope = s;
    t.active_blocks = active_blocks;
    return t;
}

SimParams params(std::uint64_t seed = 1) {
    SimParams p;
    p.seed = seed;
    return p;
}

// Full-network runs use a shorter window.
SimParams global_params(std::uint64_t seed = 1) {
    SimParams p = params(seed);
    p.warmup = 3000;
    p.measure = 5000;
    return p;
}

double saturation(const Net& n, const TrafficSpec& t, const SimParams& p, double lo, double hi, double tol) {
    return find_saturation(*n.routing, t, p, lo, hi, tol).saturation;
}

bool passes_at(const Net& n, const TrafficSpec& t, SimParams p, double rate) {
    p.rate = rate;
    const Traffic tr(n.routing->topology(), t);
    const auto st = Simulator(*n.routing, tr, p).run();
    return st.accepted >= kSaturationFraction * rate;
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol * target; }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void expect(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
    }
};

TopoConfig cfg(int a, int b, int m, int n, int r = 1) {
    TopoConfig t;
    t.a = a;
    t.b = b;
    t.m = m;
    t.n = n;
    t.r = r;
    return t;
}

void analytic(Outcome& o) {
    const auto r16 = cfg(2, 4, 2, 6);
    o.expect(analytic_scale(r16) == 1312, "N(2,4,2,6)=" + std::to_string(analytic_scale(r16)));
    const auto big = cfg(4, 8, 4, 12);
    o.expect(big.h() == 17 && big.g() == 545 && analytic_scale(big) == 279040,
             "h,g,N=" + std::to_string(big.h()) + "," + std::to_string(big.g()) + "," +
                 std::to_string(analytic_scale(big)));
    const auto b = analytic_bounds(big);
    o.expect(b.t_local == 2 && b.t_cg == 3 && b.b_cg == 24, "T_local,T_cg,B_cg=" + fmt(b.t_local) + "," +
                                                               fmt(b.t_cg) + "," + std::to_string(b.b_cg));
    o.expect(b.diameter == DiameterTerms{1, 2, 30, 0}, "diameter " + format_diameter(b.diameter));
}

void labeling_and_wiring(Outcome& o) {
    int grids = 0;
    for (int grid : {2, 4})
        for (int k : {4, 8, 12}) {
            const auto rep = verify_labeling(label_ports(grid, k));
            if (!rep.ok) o.expect(false, "labeling grid " + std::to_string(grid) + " k " + std::to_string(k));
            ++grids;
        }
    // Port partition on built C-groups: every (m, r) with m*r in {2,4}, k in {4,8,12}.
    int built = 0;
    for (auto [m, r] : {std::pair{1, 2}, std::pair{2, 1}, std::pair{1, 4}, std::pair{2, 2}, std::pair{4, 1}})
        for (int k : {4, 8, 12}) {
            if (k % m) continue;
            TopoConfig c = cfg(1, 2, m, k / m, r);
            c.g_override = 3;
            const auto rep = verify_topology(build_topology(c));
            if (!rep.all_pass())
                for (const auto& chk : rep.checks)
                    if (!chk.pass) o.expect(false, chk.name + " m" + std::to_string(m) + " r" + std::to_string(r));
            ++built;
        }
    o.expect(true, std::to_string(grids) + " labelings, " + std::to_string(built) + " C-group shapes");
    for (int g : {3, 41}) {
        const auto links = wire_global(g, g - 1);
        std::set<std::pair<int, int>> ports, pairs;
        bool ok = static_cast<int>(links.size()) == g * (g - 1) / 2;
        for (const auto& l : links) {
            ok &= ports.insert({l.low_w, l.low_t}).second && ports.insert({l.high_w, l.high_t}).second;
            ok &= pairs.insert({l.low_w, l.high_w}).second;
            ok &= global_peer_group(l.low_w, l.low_t) == l.high_w;
            ok &= global_peer_group(l.high_w, l.high_t) == l.low_w;
        }
        for (int i = 0; i < g; ++i)
            for (int t = 0; t < g - 1; ++t) {
                const int j = global_peer_group(i, t);
                ok &= global_peer_group(j, global_port_toward(j, i)) == i;
            }
        o.expect(ok, "global pairing g=" + std::to_string(g));
    }
}

void deadlock(Outcome& o) {
    TopoConfig toy = cfg(2, 2, 1, 4, 2);
    const auto t = build_topology(toy);
    for (const auto* mode : {"baseline-min", "baseline-nonmin", "reduced-min", "reduced-nonmin-restricted",
                             "reduced-nonmin-unrestricted"}) {
        const auto rep = check_deadlock_free(build_cdg(Routing(t, mode_from_name(mode))));
        o.expect(rep.acyclic, std::string(mode) + (rep.acyclic ? " acyclic" : " CYCLE"));
    }
    const auto broken = check_deadlock_free(build_cdg(Routing(t, mode_from_name("reduced-min+single-vc"))));
    o.expect(!broken.acyclic && !broken.cycle.empty(),
             "single-vc witness of " + std::to_string(broken.cycle.size()) + " resources");

    // Hotspot traffic loads every channel class: global, local and mesh.
    const auto hot = traffic(PatternKind::Hotspot, Scope::Global);
    for (const auto* mode : {"reduced-min", "reduced-nonmin-restricted", "reduced-nonmin-unrestricted"}) {
        const auto& n = net(radix16_switchless(), mode);
        const double sat = saturation(n, hot, global_params(), 0.05, 1.6, 0.05);
        SimParams p = params(7);
        p.rate = 1.5 * std::max(sat, 0.05);
        const Traffic tr(*n.topo, hot);
        Simulator sim(*n.routing, tr, p);
        for (int i = 0; i < 100000; ++i) sim.step();
        const auto in_flight = sim.flits_in_network();
        const bool drained = sim.drain_check(200000);
        o.expect(drained, std::string(mode) + " drained " + std::to_string(in_flight) + " flits at " + fmt(p.rate));
    }
}

void intra_cgroup(Outcome& o) {
    const auto p = params();
    const auto& sl = net(radix16_switchless(), "baseline-min");
    const auto& sb = net(radix16_switchbased(), "baseline-min");
    const double uni = saturation(sl, traffic(PatternKind::Uniform, Scope::IntraCGroup, 8), p, 1.0, 4.0, 0.05);
    const double rev = saturation(sl, traffic(PatternKind::BitReverse, Scope::IntraCGroup, 8), p, 1.0, 4.0, 0.05);
    const double base = saturation(sb, traffic(PatternKind::Uniform, Scope::IntraCGroup, 8), p, 0.3, 2.0, 0.025);
    o.expect(within(uni, 3.0, 0.15), "switch-less uniform " + fmt(uni));
    o.expect(within(rev, 2.0, 0.15), "switch-less bit-reverse " + fmt(rev));
    o.expect(within(base, 1.0, 0.10), "switch-based uniform " + fmt(base));
}

void intra_wgroup(Outcome& o) {
    const auto p = params();
    const auto& sl = net(radix16_switchless(), "baseline-min");
    const auto& sb = net(radix16_switchbased(), "baseline-min");
    const std::pair<PatternKind, const char*> patterns[] = {{PatternKind::Uniform, "uniform"},
                                                            {PatternKind::BitReverse, "bit-reverse"},
                                                            {PatternKind::BitTranspose, "bit-transpose"},
                                                            {PatternKind::BitShuffle, "bit-shuffle"}};
    for (const auto& [kind, name] : patterns) {
        const auto t = traffic(kind, Scope::IntraWGroup, 4);
        const double a = saturation(sl, t, p, 0.1, 3.0, 0.05);
        const double b = saturation(sb, t, p, 0.1, 3.0, 0.05);
        const double ratio = b > 0 ? a / b : 0;
        const bool ok = kind == PatternKind::BitShuffle ? ratio <= 1.10 : ratio >= 1.2 && ratio <= 2.0;
        o.expect(ok, std::string(name) + " " + fmt(a) + "/" + fmt(b) + "=" + fmt(ratio));
    }
}

void global_uniform(Outcome& o) {
    const auto t = traffic(PatternKind::Uniform, Scope::Global);
    const auto& sb = net(radix16_switchbased(), "baseline-min");
    const auto& x1 = net(radix16_switchless(1), "baseline-min");
    const auto& x2 = net(radix16_switchless(2), "baseline-min");
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto p = global_params(seed);
        const double base = saturation(sb, t, p, 0.4, 1.2, 0.025);
        // x1: at or slightly below the baseline, within 25%, 5% noise margin either way.
        const bool x1_floor = passes_at(x1, t, p, 0.75 * 0.95 * base);
        const bool x1_ceiling = !passes_at(x1, t, p, 1.05 * base);
        // x2: strictly above, by more than the noise margin.
        const bool x2_above = passes_at(x2, t, p, 1.05 * base);
        o.expect(x1_floor && x1_ceiling && x2_above,
                 "seed " + std::to_string(seed) + " switch-based " + fmt(base) + ": x1 passes " +
                     fmt(0.75 * 0.95 * base) + (x1_floor ? " yes" : " no") + ", x1 fails " + fmt(1.05 * base) +
                     (x1_ceiling ? " yes" : " no") + ", x2 passes " + fmt(1.05 * base) + (x2_above ? " yes" : " no"));
    }
}

void misrouting(Outcome& o) {
    const auto p = global_params();
    const auto worst = traffic(PatternKind::WorstCase, Scope::Global);
    for (const auto& topo : {radix16_switchbased(), radix16_switchless()}) {
        const double min = saturation(net(topo, "baseline-min"), worst, p, 0.005, 0.2, 0.0025);
        const bool ten = min > 0 && passes_at(net(topo, "baseline-nonmin"), worst, p, 10 * min);
        o.expect(ten, default_label(topo) + " worst-case minimal " + fmt(min) + ", non-minimal at " + fmt(10 * min) +
                          (ten ? " passes" : " fails"));
    }
    const auto hot = traffic(PatternKind::Hotspot, Scope::Global);
    const double x1 = saturation(net(radix16_switchless(1), "baseline-nonmin"), hot, p, 0.1, 1.6, 0.05);
    const bool better = passes_at(net(radix16_switchless(2), "baseline-nonmin"), hot, p, x1 + 0.05);
    o.expect(better, "hotspot non-minimal x1 " + fmt(x1) + ", x2 at " + fmt(x1 + 0.05) + (better ? " passes" : " fails"));
}

void allreduce(Outcome& o) {
    const auto p = params();
    struct Case {
        TopoConfig topo;
        PatternKind kind;
        Scope scope;
        double target, tol;
    };
    const Case cases[] = {
        {radix16_switchbased(), PatternKind::AllReduceUni, Scope::IntraCGroup, 1.0, 0.10},
        {radix16_switchbased(), PatternKind::AllReduceBi, Scope::IntraCGroup, 1.0, 0.10},
        {radix16_switchless(), PatternKind::AllReduceUni, Scope::IntraCGroup, 2.0, 0.15},
        {radix16_switchless(), PatternKind::AllReduceBi, Scope::IntraCGroup, 4.0, 0.15},
        {radix16_switchbased(), PatternKind::AllReduceUni, Scope::IntraWGroup, 1.0, 0.10},
        {radix16_switchless(), PatternKind::AllReduceUni, Scope::IntraWGroup, 1.0, 0.10},
        {radix16_switchless(), PatternKind::AllReduceBi, Scope::IntraWGroup, 1.3, 0.15},
        {radix16_switchless(2), PatternKind::AllReduceBi, Scope::IntraWGroup, 2.0, 0.15},
    };
    for (const auto& c : cases) {
        const int blocks = c.scope == Scope::IntraCGroup ? 8 : 4;
        const double hi = c.target * (1 + c.tol) * 1.3;
        const auto t = traffic(c.kind, c.scope, blocks);
        const double s = saturation(net(c.topo, "baseline-min"), t, p, 0.2, hi, 0.01 * c.target);
        o.expect(within(s, c.target, c.tol), default_label(c.topo) + " " + std::string(to_string(c.kind)) + "/" +
                                                 std::string(to_string(c.scope)) + " " + fmt(s));
    }
}

void energy(Outcome& o) {
    auto p = global_params();
    p.rate = 0.1;
    const auto t = traffic(PatternKind::Uniform, Scope::Global);
    auto run = [&](const TopoConfig& topo, const char* mode) {
        const auto& n = net(topo, mode);
        const Traffic tr(*n.topo, t);
        return Simulator(*n.routing, tr, p).run().energy_pj_per_bit;
    };
    const double sb_min = run(radix16_switchbased(), "baseline-min");
    const double sb_non = run(radix16_switchbased(), "baseline-nonmin");
    const double sl_min = run(radix16_switchless(), "baseline-min");
    const double sl_non = run(radix16_switchless(), "baseline-nonmin");
    o.expect(sl_min < sb_min, "minimal switch-less " + fmt(sl_min) + " < switch-based " + fmt(sb_min) + " pJ/bit");
    o.expect(sb_non >= sb_min, "switch-based non-minimal " + fmt(sb_non));
    o.expect(sl_non >= sl_min, "switch-less non-minimal " + fmt(sl_non));
}

void soundness(Outcome& o) {
    // Byte-identical CSV from two runs of the same seed.
    auto spec = parse_config(R"(
[experiment]
name = determinism
[topology]
a = 2
b = 2
m = 1
n = 4
r = 2
[routing]
mode = reduced-nonmin-unrestricted
[sim]
warmup = 500
measure = 2000
rates = 0.2, 0.6, 1.2
seeds = 5
)");
    RunOptions opts;
    opts.write_files = false;
    opts.jobs = 2;
    std::ostringstream log, a, b;
    write_sweep_csv(a, run_experiment(spec, opts, log).records);
    write_sweep_csv(b, run_experiment(spec, opts, log).records);
    o.expect(a.str() == b.str() && a.str().size() > 100, "identical CSV (" + std::to_string(a.str().size()) + " bytes)");

    // Three routers, fully connected by long-reach links; random rates.
    TopoConfig tri = cfg(1, 1, 1, 4);
    tri.g_override = 3;
    tri.h_override = 2;
    const auto& n = net(tri, "baseline-nonmin");
    const Traffic tr(*n.topo, traffic(PatternKind::Uniform, Scope::Global));
    SimParams p = params(99);
    p.check_invariants = true;
    p.buffer = 8;
    Simulator sim(*n.routing, tr, p);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> rate(0.0, 2.0);
    bool ok = true;
    std::string why;
    try {
        for (int i = 0; i < 1000000; ++i) {
            if (i % 5000 == 0) sim.set_rate(rate(rng));
            sim.step();
        }
        ok = sim.drain_check(100000) && sim.flits_injected() == sim.flits_ejected();
    } catch (const InvariantViolation& e) {
        ok = false;
        why = e.what();
    }
    o.expect(ok, "1M-cycle audit on 3 routers, " + std::to_string(sim.flits_ejected()) + " flits" + why);
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
        {"analytic exactness", analytic},
        {"labeling and wiring properties", labeling_and_wiring},
        {"deadlock freedom", deadlock},
        {"intra-C-group saturation", intra_cgroup},
        {"intra-W-group ordering", intra_wgroup},
        {"global uniform ordering", global_uniform},
        {"misrouting", misrouting},
        {"ring AllReduce", allreduce},
        {"energy ordering", energy},
        {"engine soundness", soundness},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
    int failed = 0;
    for (int i = 0; i < static_cast<int>(criteria.size()); ++i) {
        if (!only.empty() && !only.count(i + 1)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << " ("
                  << fmt(secs) << " s): " << o.detail.str() << std::endl;
        if (!o.pass) ++failed;
    }
    return failed ? 1 : 0;
}
