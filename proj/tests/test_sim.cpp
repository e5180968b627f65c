#include <doctest.h>

#include <map>
#include <random>

#include "sldf/errors.hpp"
#include "sldf/experiment.hpp"
#include "sldf/simulator.hpp"
#include "sldf/stats.hpp"
#include "sldf/traffic.hpp"

using namespace sldf;

namespace {

TopoConfig pair_config() {
    TopoConfig t;
    t.a = 1;
    t.b = 1;
    t.m = 1;
    t.n = 4;
    t.g_override = 2;
    t.h_override = 1;
    return t;
}

TopoConfig toy() {
    TopoConfig t;
    t.a = 2;
    t.b = 2;
    t.m = 1;
    t.n = 4;
    t.r = 2;
    return t;
}

TrafficSpec spec(PatternKind k, Scope s = Scope::Global) {
    TrafficSpec t;
    t.kind = k;
    t.scope = s;
    return t;
}

} // namespace

TEST_CASE("bit permutations") {
    CHECK(bit_reverse(0b0011, 4) == 0b1100);
    CHECK(bit_reverse(0b0001, 5) == 0b10000);
    CHECK(bit_shuffle(0b1001, 4) == 0b0011);
    CHECK(bit_transpose(0b0011, 4) == 0b1100);
    CHECK(bit_transpose(0b00001, 5) == 0b01000);
}

TEST_CASE("destinations") {
    std::mt19937_64 rng(1);
    SUBCASE("uniform over two chips") {
        const auto t = build_topology(pair_config());
        const Traffic tr(t, spec(PatternKind::Uniform));
        for (int i = 0; i < 50; ++i) CHECK(tr.destination(0, rng) == 1);
    }
    SUBCASE("uniform never picks the source and stays in scope") {
        const auto t = build_topology(radix16_switchless());
        const Traffic tr(t, spec(PatternKind::Uniform, Scope::IntraWGroup));
        for (int i = 0; i < 2000; ++i) {
            const int d = tr.destination(40, rng);
            CHECK(d != 40);
            CHECK(t.chips()[d].w == t.chips()[40].w);
        }
    }
    SUBCASE("worst case goes to the next W-group") {
        const auto t = build_topology(radix16_switchless());
        const Traffic tr(t, spec(PatternKind::WorstCase));
        const int last = static_cast<int>(t.chips().size()) - 1;
        REQUIRE(t.chips()[last].w == 40);
        for (int i = 0; i < 100; ++i) CHECK(t.chips()[tr.destination(last, rng)].w == 0);
        for (int i = 0; i < 100; ++i) CHECK(t.chips()[tr.destination(0, rng)].w == 1);
    }
    SUBCASE("bit permutations are bijections") {
        const auto t = build_topology(radix16_switchless());
        for (auto k : {PatternKind::BitReverse, PatternKind::BitShuffle, PatternKind::BitTranspose}) {
            const Traffic tr(t, spec(k, Scope::IntraWGroup));
            std::vector<int> hit(32, 0);
            for (int c = 0; c < 32; ++c) hit[tr.is_active(c) ? tr.destination(c, rng) : c]++;
            for (int h : hit) CHECK(h == 1);
        }
    }
    SUBCASE("non-power-of-two population") {
        const auto t = build_topology(radix16_switchless());
        CHECK_THROWS_AS(Traffic(t, spec(PatternKind::BitReverse)), PatternError);
        auto padded = spec(PatternKind::BitReverse);
        padded.pad = true;
        const Traffic tr(t, padded);
        for (int c = 0; c < tr.num_chips(); ++c)
            if (tr.is_active(c)) CHECK(tr.destination(c, rng) < tr.num_chips());
    }
    SUBCASE("hotspot") {
        const auto t = build_topology(radix16_switchless());
        const Traffic tr(t, spec(PatternKind::Hotspot));
        CHECK(tr.num_active_sources() == 4 * 32);
        CHECK_FALSE(tr.is_active(4 * 32));
        for (int i = 0; i < 500; ++i) CHECK(t.chips()[tr.destination(5, rng)].w < 4);
    }
}

TEST_CASE("ring AllReduce") {
    std::mt19937_64 rng(2);
    const auto t = build_topology(radix16_switchless());
    const Traffic uni(t, spec(PatternKind::AllReduceUni, Scope::IntraCGroup));
    REQUIRE(uni.block_size() == 4);
    for (int c = 0; c < 4; ++c) CHECK(uni.destination(c, rng) == (c + 1) % 4);
    const Traffic bi(t, spec(PatternKind::AllReduceBi, Scope::IntraCGroup));
    std::map<int, int> seen;
    for (int i = 0; i < 4000; ++i) seen[bi.destination(1, rng)]++;
    REQUIRE(seen.size() == 2);
    CHECK(seen[0] == doctest::Approx(2000).epsilon(0.1));
    CHECK(seen[2] == doctest::Approx(2000).epsilon(0.1));

    const auto two = build_topology(pair_config());
    const Traffic ring2(two, spec(PatternKind::AllReduceBi));
    for (int i = 0; i < 20; ++i) CHECK(ring2.destination(0, rng) == 1);
}

TEST_CASE("energy model") {
    EnergyModel e;
    HopCounts sl{};
    sl[static_cast<int>(HopClass::Global)] = 1;
    sl[static_cast<int>(HopClass::Local)] = 2;
    sl[static_cast<int>(HopClass::ShortReach)] = 20;
    sl[static_cast<int>(HopClass::OnChip)] = 8;
    CHECK(e.packet_energy(sl) == doctest::Approx(88));
    HopCounts sb{};
    sb[static_cast<int>(HopClass::Global)] = 1;
    sb[static_cast<int>(HopClass::Local)] = 2;
    sb[static_cast<int>(HopClass::Terminal)] = 2;
    CHECK(e.packet_energy(sb) == doctest::Approx(100));
    PacketTrace a, b;
    a.hops = sl;
    b.hops = sb;
    CHECK(energy_per_transmission({a, b}) == doctest::Approx(94));
    CHECK_THROWS_AS(energy_per_transmission({}), std::invalid_argument);
}

TEST_CASE("engine micro traces") {
    const auto t = build_topology(pair_config());
    const Routing r(t, mode_from_name("baseline-min"));
    const Traffic tr(t, spec(PatternKind::Uniform));
    SimParams p;
    p.trace = true;
    p.check_invariants = true;

    SUBCASE("empty network") {
        Simulator s(r, tr, p);
        s.set_creation(false);
        s.step();
        CHECK(s.cycle() == 1);
        CHECK(s.flits_injected() == 0);
        CHECK(s.flits_in_network() == 0);
        CHECK(s.drain_check(10));
    }
    SUBCASE("one packet over one long-reach link") {
        for (int L : {1, 4}) {
            p.packet_length = L;
            Simulator s(r, tr, p);
            s.set_creation(false);
            s.enqueue_packet(0, 1);
            for (int i = 0; i < 40; ++i) s.step();
            REQUIRE(s.traces().size() == 1);
            const auto& x = s.traces()[0];
            // One router cycle, 8 link cycles, one router cycle to eject, then the body.
            CHECK(x.eject_cycle - x.inject_cycle == 1 + 8 + (L - 1));
            CHECK(x.hops[static_cast<int>(HopClass::Global)] == 1);
        }
    }
}

TEST_CASE("two packets contending for one output alternate by packet") {
    TopoConfig c;
    c.variant = Variant::SwitchBased;
    c.sw_ports = {1, 1, 1};
    const auto t = build_topology(c);
    const Routing r(t, mode_from_name("baseline-min"));
    const Traffic tr(t, spec(PatternKind::Uniform));
    SimParams p;
    p.trace = true;
    Simulator s(r, tr, p);
    s.set_creation(false);
    // Chips 1 and 2 both reach chip 0 over one long-reach link each.
    for (int i = 0; i < 6; ++i) {
        s.enqueue_packet(1, 0);
        s.enqueue_packet(2, 0);
    }
    for (int i = 0; i < 300; ++i) s.step();
    const auto& x = s.traces();
    REQUIRE(x.size() == 12);
    for (size_t i = 1; i < x.size(); ++i) {
        CHECK(x[i].src_chip != x[i - 1].src_chip);
        CHECK(x[i].eject_cycle - x[i - 1].eject_cycle >= p.packet_length);
    }
}

TEST_CASE("run statistics") {
    SUBCASE("zero rate") {
        const auto t = build_topology(toy());
        const Routing r(t, mode_from_name("baseline-min"));
        const Traffic tr(t, spec(PatternKind::Uniform));
        SimParams p;
        p.warmup = 100;
        p.measure = 500;
        const auto st = Simulator(r, tr, p).run();
        CHECK(st.accepted == 0);
        CHECK(st.packets == 0);
        CHECK(st.lat_mean == 0);
    }
    SUBCASE("switch-based network below saturation") {
        const auto t = build_topology(radix16_switchbased());
        const Routing r(t, mode_from_name("baseline-min"));
        const Traffic tr(t, spec(PatternKind::Uniform));
        SimParams p;
        p.rate = 0.1;
        p.warmup = 1000;
        p.measure = 4000;
        const auto st = Simulator(r, tr, p).run();
        CHECK(st.accepted == doctest::Approx(0.1).epsilon(0.02));
        CHECK(st.mean_hops[static_cast<int>(HopClass::Terminal)] == doctest::Approx(2));
        CHECK(st.mean_hops[static_cast<int>(HopClass::Global)] <= 1);
    }
    SUBCASE("accepted plateaus above saturation") {
        const auto t = build_topology(radix16_switchbased());
        const Routing r(t, mode_from_name("baseline-min"));
        auto ts = spec(PatternKind::Uniform, Scope::IntraCGroup);
        ts.active_blocks = 8;
        const Traffic tr(t, ts);
        SimParams p;
        p.warmup = 1000;
        p.measure = 3000;
        p.rate = 2.0;
        const double a2 = Simulator(r, tr, p).run().accepted;
        p.rate = 3.0;
        const double a3 = Simulator(r, tr, p).run().accepted;
        CHECK(a2 < 1.1);
        CHECK(a3 == doctest::Approx(a2).epsilon(0.05));
    }
}

TEST_CASE("same seed, same statistics") {
    const auto t = build_topology(toy());
    const Routing r(t, mode_from_name("reduced-nonmin-unrestricted"));
    const Traffic tr(t, spec(PatternKind::Uniform));
    SimParams p;
    p.rate = 0.3;
    p.warmup = 200;
    p.measure = 1000;
    p.seed = 11;
    const auto a = Simulator(r, tr, p).run();
    const auto b = Simulator(r, tr, p).run();
    CHECK(a.accepted == b.accepted);
    CHECK(a.lat_mean == b.lat_mean);
    CHECK(a.packets == b.packets);
    p.seed = 12;
    CHECK(Simulator(r, tr, p).run().lat_mean != a.lat_mean);
}

TEST_CASE("credit audit and drain under heavy load") {
    const auto t = build_topology(toy());
    for (const auto& name : {"baseline-min", "baseline-nonmin", "reduced-min", "reduced-nonmin-unrestricted"}) {
        CAPTURE(name);
        const Routing r(t, mode_from_name(name));
        const Traffic tr(t, spec(PatternKind::Uniform));
        SimParams p;
        p.rate = 1.5;
        p.check_invariants = true;
        Simulator s(r, tr, p);
        for (int i = 0; i < 3000; ++i) s.step();
        CHECK(s.flits_in_network() > 0);
        CHECK(s.drain_check(20000));
        CHECK(s.flits_in_network() == 0);
    }
}

TEST_CASE("enqueue rejects self-delivery") {
    const auto t = build_topology(pair_config());
    const Routing r(t, mode_from_name("baseline-min"));
    const Traffic tr(t, spec(PatternKind::Uniform));
    Simulator s(r, tr, SimParams{});
    CHECK_THROWS_AS(s.enqueue_packet(0, 0), std::invalid_argument);
}
