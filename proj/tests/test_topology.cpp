#include <doctest.h>

#include <algorithm>
#include <set>

#include "sldf/analytics.hpp"
#include "sldf/errors.hpp"
#include "sldf/experiment.hpp"
#include "sldf/labeling.hpp"
#include "sldf/manifest.hpp"
#include "sldf/topology.hpp"

using namespace sldf;

namespace {

TopoConfig cfg(int a, int b, int m, int n, int r = 1) {
    TopoConfig t;
    t.a = a;
    t.b = b;
    t.m = m;
    t.n = n;
    t.r = r;
    return t;
}

int count_class(const Topology& t, ChannelClass c) {
    return static_cast<int>(std::count_if(t.channels().begin(), t.channels().end(),
                                          [&](const Channel& ch) { return ch.cls == c; }));
}

} // namespace

TEST_CASE("radix-16 switch-less network") {
    const auto t = build_switchless(radix16_switchless());
    CHECK(t.num_wgroups() == 41);
    CHECK(t.cgroups_per_wgroup() == 8);
    CHECK(t.routers_per_cgroup() == 16);
    CHECK(t.chips().size() == 1312);
    CHECK(t.routers().size() == 5248);
    CHECK(t.config().h() == 5);
    CHECK(count_class(t, ChannelClass::GlobalLongReach) == 2 * 820);
    CHECK(verify_topology(t).all_pass());
}

TEST_CASE("scale of the 48-port C-group system") {
    const auto c = cfg(4, 8, 4, 12);
    CHECK(c.h() == 17);
    CHECK(c.g() == 545);
    CHECK(analytic_scale(c) == 279040);
}

TEST_CASE("degenerate two W-group network") {
    auto c = cfg(1, 1, 1, 4);
    c.g_override = 2;
    c.h_override = 1;
    const auto t = build_switchless(c);
    CHECK(t.num_wgroups() == 2);
    CHECK(t.routers().size() == 2);
    CHECK(count_class(t, ChannelClass::GlobalLongReach) == 2);
    CHECK(count_class(t, ChannelClass::LocalLongReach) == 0);
}

TEST_CASE("switch-based Dragonfly") {
    TopoConfig c;
    c.variant = Variant::SwitchBased;
    SUBCASE("4:7:5") {
        c.sw_ports = {4, 7, 5};
        const auto t = build_switchbased(c);
        CHECK(t.num_wgroups() == 41);
        CHECK(t.routers().size() == 328);
        CHECK(t.chips().size() == 1312);
        int local0 = 0;
        for (const auto& ch : t.channels())
            if (ch.cls == ChannelClass::LocalLongReach && t.routers()[ch.src].addr.w == 0) ++local0;
        CHECK(local0 / 2 == 28);
        const auto rep = verify_topology(t);
        REQUIRE(rep.find("global_completeness"));
        CHECK(rep.find("local_completeness")->pass);
        CHECK(rep.all_pass());
    }
    SUBCASE("8:15:9") {
        c.sw_ports = {8, 15, 9};
        CHECK(c.g() == 145);
        CHECK(analytic_scale(c) == 18560);
    }
    SUBCASE("1:1:1") {
        c.sw_ports = {1, 1, 1};
        const auto t = build_switchbased(c);
        CHECK(t.num_wgroups() == 3);
        CHECK(t.routers().size() == 6);
        CHECK(t.chips().size() == 6);
    }
    SUBCASE("non-positive ports") {
        c.sw_ports = {0, 7, 5};
        CHECK_THROWS_AS(build_switchbased(c), ConfigError);
    }
}

TEST_CASE("analytic scale and bounds") {
    CHECK(analytic_scale(cfg(2, 4, 2, 6, 2)) == 1312);
    CHECK(analytic_scale(cfg(1, 1, 1, 4)) == 5);

    const auto b = analytic_bounds(cfg(4, 8, 4, 12));
    CHECK(b.t_global == doctest::Approx(17.0 / 16));
    CHECK(b.t_local == 2);
    CHECK(b.t_cg == 3);
    CHECK(b.b_cg == 24);
    CHECK(b.diameter == DiameterTerms{1, 2, 30, 0});
    CHECK(format_diameter(b.diameter) == "H_g + 2H_l + 30H_sr");

    CHECK(analytic_bounds(cfg(2, 4, 2, 6, 2)).t_local == 2);
    const auto small = analytic_bounds(cfg(1, 1, 1, 4));
    CHECK(small.t_cg == 4);
    CHECK(small.b_cg == 2);
}

TEST_CASE("balanced configuration") {
    CHECK(balanced_config(1) == std::pair{3, 2});
    CHECK(balanced_config(2) == std::pair{6, 8});
    CHECK(balanced_config(4) == std::pair{12, 32});
}

TEST_CASE("channel direction") {
    CHECK(classify_channel({0, 0, 0}, {0, 0, 1}) == Direction::Up);
    CHECK(classify_channel({1, 0, 5}, {0, 7, 9}) == Direction::Down);
    CHECK_THROWS_AS(classify_channel({2, 3, 4}, {2, 3, 4}), std::invalid_argument);
}

TEST_CASE("port labeling") {
    SUBCASE("2x2, one port per side") {
        const auto lab = label_ports(2, 4);
        std::vector<int> routers = lab.router_label;
        std::sort(routers.begin(), routers.end());
        CHECK(routers == std::vector<int>{0, 1, 2, 3});
        CHECK(lab.port_label == std::vector<int>{4, 5, 6, 7});
        CHECK(verify_labeling(lab).ok);
    }
    SUBCASE("4x4, three ports per side") {
        const auto lab = label_ports(4, 12);
        CHECK(lab.router_label.size() == 16);
        for (int i = 0; i < 12; ++i) CHECK(lab.port_label[i] == 16 + i);
        CHECK(verify_labeling(lab).ok);
    }
    SUBCASE("1x1 grid") { CHECK(verify_labeling(label_ports(1, 4)).ok); }
    SUBCASE("swapped labels across a corner") {
        auto lab = label_ports(4, 12);
        int i = 0;
        while (lab.port_side[i] == lab.port_side[i + 1]) ++i;
        std::swap(lab.port_label[i], lab.port_label[i + 1]);
        const auto rep = verify_labeling(lab);
        CHECK_FALSE(rep.ok);
        CHECK(rep.condition == "c2");
        CHECK_FALSE(rep.witness.empty());
    }
    SUBCASE("k not a multiple of 4") { CHECK_THROWS_AS(label_ports(4, 10), std::invalid_argument); }
}

TEST_CASE("labeling holds for every small grid and port count") {
    for (int grid : {2, 4})
        for (int k : {4, 8, 12}) {
            CAPTURE(grid);
            CAPTURE(k);
            CHECK(verify_labeling(label_ports(grid, k)).ok);
        }
}

TEST_CASE("local port partition") {
    const auto c = radix16_switchless();
    for (int i = 0; i < 3; ++i) {
        CHECK(port_kind(c, 3, i) == PortKind::LocalDown);
        CHECK(local_port_peer(c, 3, i) == i);
    }
    for (int i = 3; i < 8; ++i) {
        CHECK(port_kind(c, 3, i) == PortKind::Global);
        CHECK(local_port_peer(c, 3, i) == -1);
    }
    for (int i = 8; i < 12; ++i) {
        CHECK(port_kind(c, 3, i) == PortKind::LocalUp);
        CHECK(local_port_peer(c, 3, i) == i - 4);
    }
    auto two = cfg(1, 2, 1, 4);
    int local = 0;
    for (int i = 0; i < two.k(); ++i)
        if (local_port_peer(two, 0, i) >= 0) ++local;
    CHECK(local == 1);
    for (const auto& l : wire_local(c)) {
        CHECK(port_kind(c, l.low_c, l.low_port) == PortKind::LocalUp);
        CHECK(port_kind(c, l.high_c, l.high_port) == PortKind::LocalDown);
    }
}

TEST_CASE("global wiring") {
    const auto g3 = wire_global(3, 2);
    REQUIRE(g3.size() == 3);
    std::set<std::tuple<int, int, int, int>> links;
    for (const auto& l : g3) links.insert({l.low_w, l.low_t, l.high_w, l.high_t});
    CHECK(links == std::set<std::tuple<int, int, int, int>>{{0, 0, 1, 0}, {0, 1, 2, 0}, {1, 1, 2, 1}});
    CHECK(wire_global(41, 40).size() == 820);
    CHECK(wire_global(2, 40).size() == 1);
    CHECK_THROWS_AS(wire_global(42, 40), WiringError);
    for (int g : {3, 41}) {
        for (int i = 0; i < g; ++i)
            for (int t = 0; t < g - 1; ++t) {
                const int j = global_peer_group(i, t);
                CHECK(j != i);
                CHECK(global_port_toward(i, j) == t);
            }
    }
}

TEST_CASE("verify_topology catches a missing channel") {
    const auto t = build_switchless(cfg(2, 2, 1, 4, 2));
    REQUIRE(verify_topology(t).all_pass());
    const auto broken = t.without_channel(0);
    const auto rep = verify_topology(broken);
    CHECK_FALSE(rep.all_pass());
    CHECK_FALSE(rep.find("duplex_pairing")->pass);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(cfg(2, 4, 2, 5, 2).validate(), ConfigError);
    auto c = cfg(2, 4, 2, 6, 2);
    c.g_override = 42;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("manifest round trip") {
    for (const auto& c : {cfg(2, 2, 1, 4, 2), radix16_switchless(2), radix16_switchbased()}) {
        const auto text = write_manifest(build_topology(c));
        const auto back = read_manifest(text);
        CHECK(back.config() == c);
        CHECK(write_manifest(back) == text);
        CHECK(verify_topology(back).all_pass());
    }
    CHECK(parse_topo_config_line(format_topo_config_line(radix16_switchless())) == radix16_switchless());
}

TEST_CASE("manifest parse errors carry the line") {
    auto text = write_manifest(build_topology(cfg(2, 2, 1, 4, 2)));
    CHECK_THROWS_AS(read_manifest("garbage"), ParseError);
    const auto nl = text.find('\n', text.find("router "));
    text.insert(nl + 1, "router x y\n");
    try {
        read_manifest(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() > 2);
    }
}
