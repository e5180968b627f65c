#include <doctest.h>

#include <random>

#include "sldf/cdg.hpp"
#include "sldf/errors.hpp"
#include "sldf/experiment.hpp"
#include "sldf/routing.hpp"

using namespace sldf;

namespace {

TopoConfig toy(int g = 0) {
    TopoConfig t;
    t.a = 2;
    t.b = 2;
    t.m = 1;
    t.n = 4;
    t.r = 2;
    if (g) t.g_override = g;
    return t;
}

struct Classes {
    int global = 0, local = 0, mesh = 0;
};

Classes classes(const Topology& t, const std::vector<PathStep>& path) {
    Classes c;
    for (const auto& s : path) {
        switch (t.channels()[s.channel].cls) {
        case ChannelClass::GlobalLongReach: ++c.global; break;
        case ChannelClass::LocalLongReach: ++c.local; break;
        default: ++c.mesh; break;
        }
    }
    return c;
}

const std::vector<std::string> kModes{"baseline-min", "baseline-nonmin", "reduced-min", "reduced-nonmin-restricted",
                                      "reduced-nonmin-unrestricted"};

} // namespace

TEST_CASE("mode names") {
    for (const auto& n : kModes) CHECK(mode_name(mode_from_name(n)) == n);
    CHECK(mode_from_name("reduced-min+single-vc").force_single_vc);
    CHECK_THROWS_AS(mode_from_name("fast"), std::invalid_argument);
    CHECK(mode_from_name("baseline-min").num_vcs() == 4);
    CHECK(mode_from_name("baseline-nonmin").num_vcs() == 6);
    CHECK(mode_from_name("reduced-min").num_vcs() == 3);
    CHECK(mode_from_name("reduced-nonmin-restricted").num_vcs() == 3);
    CHECK(mode_from_name("reduced-nonmin-unrestricted").num_vcs() == 4);
}

TEST_CASE("vc_assign") {
    for (const auto& n : kModes) CHECK(vc_assign(Phase::SrcCGroup, mode_from_name(n)) == 0);
    CHECK(vc_assign(Phase::DstCGroup, mode_from_name("baseline-min")) == 3);
    CHECK(vc_assign(Phase::IntermWGroupEntryCGroup, mode_from_name("reduced-nonmin-unrestricted")) == 3);
    CHECK(vc_assign(Phase::DstWGroupEntryCGroup, mode_from_name("reduced-nonmin-unrestricted")) == 2);
    CHECK(vc_assign(Phase::IntermWGroupEntryCGroup, mode_from_name("reduced-nonmin-restricted")) == 2);
    CHECK(vc_assign(Phase::SrcWGroupSecondCGroup, mode_from_name("reduced-min")) == 1);
    CHECK(vc_assign(Phase::DstCGroup, mode_from_name("reduced-min")) == 2);
}

TEST_CASE("dimension-order route") {
    const auto p = dor_route(4, 0, 15);
    CHECK(p == std::vector<int>{0, 1, 2, 3, 7, 11, 15});
}

TEST_CASE("intermediate W-group choice") {
    const auto restricted = mode_from_name("reduced-nonmin-restricted");
    const auto c = intermediate_candidates(5, 9, 41, restricted);
    CHECK(c == std::vector<int>{0, 1, 2, 3, 4, 6, 7, 8});
    CHECK(intermediate_candidates(5, 0, 41, restricted).empty());
    std::mt19937_64 rng(7);
    CHECK(select_intermediate_wgroup(5, 0, 41, restricted, rng) == -1);
    const auto unrestricted = mode_from_name("reduced-nonmin-unrestricted");
    for (int i = 0; i < 20; ++i) CHECK(select_intermediate_wgroup(0, 1, 3, unrestricted, rng) == 2);
    for (int i = 0; i < 200; ++i) {
        const int w = select_intermediate_wgroup(5, 9, 41, restricted, rng);
        CHECK((w >= 0 && w < 9 && w != 5));
    }
    CHECK(select_intermediate_wgroup(5, 9, 41, mode_from_name("baseline-min"), rng) == -1);
}

TEST_CASE("route hop structure on the radix-16 network") {
    const auto t = build_topology(radix16_switchless());
    const int per_c = t.routers_per_cgroup();
    for (const auto& name : kModes) {
        CAPTURE(name);
        const Routing r(t, mode_from_name(name));
        // Same C-group: pure mesh route.
        const auto local = r.path(t.router_id(0, 0, 0), t.router_id(0, 0, 5), -1);
        CHECK(classes(t, local).global == 0);
        CHECK(classes(t, local).local == 0);
        for (const auto& s : local) CHECK(s.phase == Phase::SrcCGroup);

        for (int x = 0; x < per_c; x += 5)
            for (int y = 0; y < per_c; y += 3) {
                const auto p = r.path(t.router_id(0, 0, x), t.router_id(2, 3, y), -1);
                const auto c = classes(t, p);
                CHECK(c.global == 1);
                if (mode_from_name(name).vc_scheme == VcScheme::Baseline) CHECK(c.local <= 2);
                CHECK(p.back().phase == Phase::DstCGroup);
                if (mode_from_name(name).path == PathMode::NonMinimal) {
                    const auto cn = classes(t, r.path(t.router_id(0, 0, x), t.router_id(2, 3, y), 7));
                    CHECK(cn.global == 2);
                    if (mode_from_name(name).vc_scheme == VcScheme::Baseline) CHECK(cn.local <= 4);
                }
            }
        // Same W-group, different C-group.
        const auto w = r.path(t.router_id(4, 1, 0), t.router_id(4, 6, 15), -1);
        CHECK(classes(t, w).global == 0);
        if (mode_from_name(name).vc_scheme == VcScheme::Baseline) CHECK(classes(t, w).local == 1);
    }
}

TEST_CASE("baseline minimal paths stay within the diameter") {
    const auto t = build_topology(radix16_switchless());
    const Routing r(t, mode_from_name("baseline-min"));
    const int grid = t.config().grid();
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(t.routers().size()) - 1);
    for (int i = 0; i < 2000; ++i) {
        const int a = pick(rng), b = pick(rng);
        if (a == b) continue;
        const auto p = r.path(a, b, -1);
        const auto c = classes(t, p);
        CHECK(c.global <= 1);
        CHECK(c.local <= 2);
        CHECK(c.mesh <= 4 * 2 * (grid - 1));
        int vc = 0;
        for (const auto& s : p) {
            CHECK(s.vc >= vc);
            vc = s.vc;
        }
    }
}

TEST_CASE("channel dependency graphs") {
    SUBCASE("toy network, every mode") {
        const auto t = build_topology(toy());
        REQUIRE(t.num_wgroups() == 5);
        for (const auto& name : kModes) {
            CAPTURE(name);
            const Routing r(t, mode_from_name(name));
            const auto cdg = build_cdg(r);
            CHECK(cdg.num_edges() > 0);
            CHECK(check_deadlock_free(cdg).acyclic);
        }
    }
    SUBCASE("two W-groups, reduced minimal") {
        const auto t = build_topology(toy(2));
        CHECK(check_deadlock_free(build_cdg(Routing(t, mode_from_name("reduced-min")))).acyclic);
    }
    SUBCASE("single VC produces a witness") {
        const auto t = build_topology(toy());
        const auto rep = check_deadlock_free(build_cdg(Routing(t, mode_from_name("baseline-min+single-vc"))));
        CHECK_FALSE(rep.acyclic);
        CHECK(rep.cycle.size() >= 2);
        CHECK_FALSE(format_cycle(t, rep).empty());
    }
    SUBCASE("single C-group under dimension order") {
        TopoConfig c = toy();
        c.a = 1;
        c.b = 1;
        c.g_override = 1;
        const auto t = build_topology(c);
        CHECK(check_deadlock_free(build_cdg(Routing(t, mode_from_name("baseline-min")))).acyclic);
    }
    SUBCASE("hand-made graphs") {
        CHECK(check_deadlock_free(ChannelDependencyGraph::from_edges(3, 1, {})).acyclic);
        const auto self = check_deadlock_free(ChannelDependencyGraph::from_edges(3, 1, {{1, 1}}));
        CHECK_FALSE(self.acyclic);
        REQUIRE(self.cycle.size() == 1);
        CHECK(self.cycle[0].channel == 1);
        CHECK(check_deadlock_free(ChannelDependencyGraph::from_edges(2, 2, {{0, 1}, {1, 2}, {2, 3}})).acyclic);
        CHECK_FALSE(check_deadlock_free(ChannelDependencyGraph::from_edges(2, 2, {{0, 1}, {1, 2}, {2, 0}})).acyclic);
    }
}

TEST_CASE("restricted misroutes only descend") {
    const auto t = build_topology(toy());
    const auto mode = mode_from_name("reduced-nonmin-restricted");
    for (int s = 0; s < 5; ++s)
        for (int d = 0; d < 5; ++d)
            for (int w : intermediate_candidates(s, d, 5, mode)) CHECK(w < d);
}
