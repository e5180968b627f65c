#include "sldf/routing.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

#include "sldf/errors.hpp"

namespace sldf {

int RoutingMode::num_vcs() const {
    if (force_single_vc) return 1;
    if (vc_scheme == VcScheme::Baseline) return path == PathMode::Minimal ? 4 : 6;
    if (path == PathMode::Minimal || misroute_restricted) return 3;
    return 4;
}

std::string_view to_string(PathMode p) { return p == PathMode::Minimal ? "min" : "nonmin"; }
std::string_view to_string(VcScheme s) { return s == VcScheme::Baseline ? "baseline" : "reduced"; }

PathMode path_mode_from_string(std::string_view s) {
    if (s == "min" || s == "minimal") return PathMode::Minimal;
    if (s == "nonmin" || s == "nonminimal") return PathMode::NonMinimal;
    throw std::invalid_argument("unknown path mode: " + std::string(s));
}

VcScheme vc_scheme_from_string(std::string_view s) {
    if (s == "baseline") return VcScheme::Baseline;
    if (s == "reduced") return VcScheme::Reduced;
    throw std::invalid_argument("unknown vc scheme: " + std::string(s));
}

std::string mode_name(const RoutingMode& m) {
    std::string s = std::string(to_string(m.vc_scheme)) + "-" + std::string(to_string(m.path));
    if (m.path == PathMode::NonMinimal && m.vc_scheme == VcScheme::Reduced)
        s += m.misroute_restricted ? "-restricted" : "-unrestricted";
    if (m.force_single_vc) s += "+single-vc";
    return s;
}

RoutingMode mode_from_name(std::string_view name) {
    RoutingMode m;
    std::string_view s = name;
    if (auto plus = s.find('+'); plus != std::string_view::npos) {
        if (s.substr(plus) != "+single-vc") throw std::invalid_argument("unknown mode suffix in " + std::string(name));
        m.force_single_vc = true;
        s = s.substr(0, plus);
    }
    auto dash = s.find('-');
    if (dash == std::string_view::npos) throw std::invalid_argument("unknown routing mode: " + std::string(name));
    m.vc_scheme = vc_scheme_from_string(s.substr(0, dash));
    auto rest = s.substr(dash + 1);
    auto dash2 = rest.find('-');
    m.path = path_mode_from_string(rest.substr(0, dash2));
    if (dash2 != std::string_view::npos) {
        auto r = rest.substr(dash2 + 1);
        if (m.vc_scheme != VcScheme::Reduced || m.path != PathMode::NonMinimal)
            throw std::invalid_argument("misroute restriction applies to reduced-nonmin only");
        if (r == "restricted") m.misroute_restricted = true;
        else if (r == "unrestricted") m.misroute_restricted = false;
        else throw std::invalid_argument("unknown routing mode: " + std::string(name));
    }
    return m;
}

std::string_view to_string(Phase p) {
    switch (p) {
    case Phase::SrcCGroup: return "src";
    case Phase::SrcWGroupSecondCGroup: return "src_second";
    case Phase::IntermWGroupEntryCGroup: return "interm_entry";
    case Phase::IntermWGroupExitCGroup: return "interm_exit";
    case Phase::DstWGroupEntryCGroup: return "dst_entry";
    case Phase::DstCGroup: return "dst";
    }
    return "?";
}

int vc_assign(Phase phase, const RoutingMode& mode) {
    if (mode.force_single_vc) return 0;
    const int p = static_cast<int>(phase);
    const bool interm = phase == Phase::IntermWGroupEntryCGroup || phase == Phase::IntermWGroupExitCGroup;
    if (interm && mode.path == PathMode::Minimal)
        throw std::invalid_argument("intermediate phase under minimal routing");
    if (mode.vc_scheme == VcScheme::Baseline) {
        static constexpr int kMin[] = {0, 1, -1, -1, 2, 3};
        static constexpr int kNonMin[] = {0, 1, 2, 3, 4, 5};
        return mode.path == PathMode::Minimal ? kMin[p] : kNonMin[p];
    }
    static constexpr int kRestricted[] = {0, 1, 2, 2, 2, 2};
    static constexpr int kUnrestricted[] = {0, 1, 3, 3, 2, 2};
    return (mode.path == PathMode::Minimal || mode.misroute_restricted) ? kRestricted[p] : kUnrestricted[p];
}

std::vector<int> intermediate_candidates(int src_w, int dst_w, int g, const RoutingMode& mode) {
    std::vector<int> out;
    if (mode.path == PathMode::Minimal || src_w == dst_w) return out;
    const bool restricted = mode.vc_scheme == VcScheme::Reduced && mode.misroute_restricted;
    const int hi = restricted ? dst_w : g;
    for (int w = 0; w < hi; ++w)
        if (w != src_w && w != dst_w) out.push_back(w);
    return out;
}

int select_intermediate_wgroup(int src_w, int dst_w, int g, const RoutingMode& mode, std::mt19937_64& rng) {
    if (mode.path == PathMode::Minimal || src_w == dst_w) return -1;
    const bool restricted = mode.vc_scheme == VcScheme::Reduced && mode.misroute_restricted;
    const int hi = restricted ? dst_w : g;
    const int lo_skip = std::min(src_w, dst_w), hi_skip = std::max(src_w, dst_w);
    int count = hi;
    if (lo_skip < hi) --count;
    if (hi_skip < hi) --count;
    if (count <= 0) return -1;
    int i = std::uniform_int_distribution<int>(0, count - 1)(rng);
    if (i >= lo_skip) ++i;
    if (i >= hi_skip) ++i;
    return i;
}

std::vector<int> dor_route(int grid, int from, int to) {
    std::vector<int> path{from};
    int x = from % grid, y = from / grid;
    const int tx = to % grid, ty = to / grid;
    while (x != tx) {
        x += x < tx ? 1 : -1;
        path.push_back(y * grid + x);
    }
    while (y != ty) {
        y += y < ty ? 1 : -1;
        path.push_back(y * grid + x);
    }
    return path;
}

Routing::Routing(const Topology& topo, RoutingMode mode) : topo_(&topo), mode_(mode) {
    const bool switchless = topo.config().variant == Variant::SwitchLess;
    if (!switchless) {
        // Switch-based Dragonfly: one VC per global hop taken.
        num_vcs_ = mode.force_single_vc ? 1 : (mode.path == PathMode::Minimal ? 2 : 3);
    } else {
        num_vcs_ = mode.num_vcs();
    }
    use_updown_ = switchless && mode.vc_scheme == VcScheme::Reduced;
    wn_ = topo.routers_per_cgroup() * topo.cgroups_per_wgroup();
    if (use_updown_) build_updown_table();
}

void Routing::build_updown_table() {
    const auto& t = *topo_;
    const int wn = wn_;
    struct Edge {
        int to;
        int weight;
        bool down;
        std::int16_t slot;
    };
    std::vector<std::vector<Edge>> out(wn), in(wn);
    for (int v = 0; v < wn; ++v) {
        for (int id : t.out_channels(v)) {
            const auto& ch = t.channels()[id];
            if (ch.cls == ChannelClass::GlobalLongReach || ch.dst >= wn) continue;
            std::int16_t slot = -1;
            if (ch.cls == ChannelClass::LocalLongReach) {
                slot = static_cast<std::int16_t>(4 + t.ports()[ch.src_port].index);
            } else {
                for (int d = 0; d < 4; ++d)
                    if (t.mesh_channel(v, static_cast<MeshDir>(d)) == id) slot = static_cast<std::int16_t>(d);
            }
            const bool down = ch.dir == Direction::Down;
            out[v].push_back({ch.dst, ch.latency, down, slot});
            in[ch.dst].push_back({v, ch.latency, down, slot});
        }
    }

    constexpr int kInf = std::numeric_limits<int>::max() / 4;
    ud_next_.assign(static_cast<size_t>(2) * wn * wn, -2);
    std::vector<int> dist(2 * wn);
    using Item = std::pair<int, int>;
    for (int target = 0; target < wn; ++target) {
        std::fill(dist.begin(), dist.end(), kInf);
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[target * 2] = dist[target * 2 + 1] = 0;
        pq.push({0, target * 2});
        pq.push({0, target * 2 + 1});
        while (!pq.empty()) {
            auto [d, s] = pq.top();
            pq.pop();
            if (d != dist[s]) continue;
            const int u = s / 2;
            const bool desc = s % 2;
            // Forward move v -> u lands in state desc == edge.down.
            for (const auto& e : in[u]) {
                if (e.down != desc) continue;
                for (int pd = 0; pd < 2; ++pd) {
                    if (pd == 1 && !e.down) continue;  // no up hop once descending
                    const int ps = e.to * 2 + pd;
                    if (d + e.weight < dist[ps]) {
                        dist[ps] = d + e.weight;
                        pq.push({dist[ps], ps});
                    }
                }
            }
        }
        for (int v = 0; v < wn; ++v) {
            for (int desc = 0; desc < 2; ++desc) {
                auto& cell = ud_next_[(static_cast<size_t>(v) * 2 + desc) * wn + target];
                if (v == target) {
                    cell = -1;
                    continue;
                }
                int best = kInf;
                for (const auto& e : out[v]) {
                    if (desc && !e.down) continue;
                    const int c = dist[e.to * 2 + (e.down ? 1 : 0)];
                    if (c >= kInf) continue;
                    if (c + e.weight < best) {
                        best = c + e.weight;
                        cell = e.slot;
                    }
                }
            }
        }
    }
}

int Routing::exit_cgroup(int w, int toward_w) const {
    return global_port_toward(w, toward_w) / topo_->config().h();
}

int Routing::global_port(int w, int toward_w) const {
    const int t = global_port_toward(w, toward_w);
    const int h = topo_->config().h();
    const int c = t / h;
    return topo_->port_id(w, c, c + t % h);
}

int Routing::local_port(int w, int c, int toward_c) const {
    return topo_->port_id(w, c, local_port_index(topo_->config(), c, toward_c));
}

int Routing::dor_step(int current, int target) const {
    const auto& rc = topo_->routers()[current];
    const auto& rt = topo_->routers()[target];
    MeshDir d;
    if (rt.x > rc.x) d = MeshDir::East;
    else if (rt.x < rc.x) d = MeshDir::West;
    else if (rt.y < rc.y) d = MeshDir::North;
    else d = MeshDir::South;
    const int ch = topo_->mesh_channel(current, d);
    if (ch < 0) throw RoutingError("missing mesh channel at router " + std::to_string(current));
    return ch;
}

int Routing::updown_step(const RouteState& s, int current, int target) const {
    const int w = topo_->routers()[current].addr.w;
    const int base = w * wn_;
    const int slot = ud_next_[(static_cast<size_t>(current - base) * 2 + (s.descending ? 1 : 0)) * wn_ + (target - base)];
    if (slot < 0)
        throw RoutingError("no up*/down* route from router " + std::to_string(current) + " to " +
                           std::to_string(target));
    if (slot < 4) return topo_->mesh_channel(current, static_cast<MeshDir>(slot));
    const auto& r = topo_->routers()[current];
    const int ch = topo_->ports()[topo_->port_id(w, r.addr.c, slot - 4)].channel;
    if (ch < 0) throw RoutingError("unwired local port on up*/down* route");
    return ch;
}

int Routing::vc_for(const RouteState& s) const {
    if (mode_.force_single_vc) return 0;
    if (topo_->config().variant == Variant::SwitchBased) return s.globals;
    return vc_assign(s.phase, mode_);
}

RouteState Routing::initial(int src_router, int dst_router, int inter_w) const {
    RouteState s;
    const int ws = topo_->routers()[src_router].addr.w;
    const int wd = topo_->routers()[dst_router].addr.w;
    s.inter_w = (inter_w == ws || inter_w == wd) ? -1 : inter_w;
    s.vc = static_cast<std::uint8_t>(vc_for(s));
    return s;
}

namespace {

bool source_stage(Phase p) { return p == Phase::SrcCGroup || p == Phase::SrcWGroupSecondCGroup; }
bool interm_stage(Phase p) {
    return p == Phase::IntermWGroupEntryCGroup || p == Phase::IntermWGroupExitCGroup;
}

} // namespace

Phase Routing::phase_after(const RouteState& s, int channel, int dst_router) const {
    const auto& ch = topo_->channels()[channel];
    const auto& to = topo_->routers()[ch.dst].addr;
    const auto& d = topo_->routers()[dst_router].addr;
    auto dst_phase = [&] { return to.c == d.c ? Phase::DstCGroup : Phase::DstWGroupEntryCGroup; };
    auto interm_phase = [&] {
        return to.c == exit_cgroup(to.w, d.w) ? Phase::IntermWGroupExitCGroup : Phase::IntermWGroupEntryCGroup;
    };
    if (ch.cls == ChannelClass::GlobalLongReach) return to.w == d.w ? dst_phase() : interm_phase();
    if (ch.cls == ChannelClass::LocalLongReach) {
        if (source_stage(s.phase)) return Phase::SrcWGroupSecondCGroup;
        return interm_stage(s.phase) ? interm_phase() : dst_phase();
    }
    return s.phase;
}

Hop Routing::next(const RouteState& s, int current, int dst_router) const {
    const auto& t = *topo_;
    const auto& cur = t.routers()[current].addr;
    const auto& d = t.routers()[dst_router].addr;

    int exit_port = -1;
    int target = dst_router;
    bool updown = false;
    if (source_stage(s.phase)) {
        const int stage_w = s.inter_w >= 0 ? s.inter_w : d.w;
        if (cur.w == stage_w) {
            if (cur.c != d.c) exit_port = local_port(cur.w, cur.c, d.c);
        } else {
            const int ca = exit_cgroup(cur.w, stage_w);
            exit_port = cur.c == ca ? global_port(cur.w, stage_w) : local_port(cur.w, cur.c, ca);
        }
    } else if (use_updown_) {
        updown = true;
        if (interm_stage(s.phase)) exit_port = global_port(cur.w, d.w);
    } else if (interm_stage(s.phase)) {
        const int ca = exit_cgroup(cur.w, d.w);
        exit_port = cur.c == ca ? global_port(cur.w, d.w) : local_port(cur.w, cur.c, ca);
    } else if (cur.c != d.c) {
        exit_port = local_port(cur.w, cur.c, d.c);
    }
    if (exit_port >= 0) target = t.ports()[exit_port].host;

    Hop hop;
    hop.next = s;
    if (current == target) {
        if (exit_port < 0) return hop;  // eject
        hop.channel = t.ports()[exit_port].channel;
        if (hop.channel < 0) throw RoutingError("required port " + std::to_string(exit_port) + " is unwired");
    } else {
        hop.channel = updown ? updown_step(s, current, target) : dor_step(current, target);
    }

    const auto& ch = t.channels()[hop.channel];
    auto& n = hop.next;
    n.phase = phase_after(s, hop.channel, dst_router);
    if (ch.cls == ChannelClass::GlobalLongReach) {
        ++n.globals;
        n.descending = false;
    } else if (updown) {
        n.descending = s.descending || ch.dir == Direction::Down;
    } else {
        n.descending = false;
    }
    n.vc = static_cast<std::uint8_t>(vc_for(n));
    return hop;
}

std::vector<PathStep> Routing::path(int src_router, int dst_router, int inter_w) const {
    std::vector<PathStep> out;
    RouteState s = initial(src_router, dst_router, inter_w);
    int cur = src_router;
    const size_t limit = 64 + 8 * static_cast<size_t>(wn_);
    while (true) {
        Hop h = next(s, cur, dst_router);
        if (h.channel < 0) break;
        out.push_back({h.channel, h.next.vc, h.next.phase});
        if (out.size() > limit) throw RoutingError("routing loop from " + std::to_string(src_router));
        cur = topo_->channels()[h.channel].dst;
        s = h.next;
    }
    return out;
}

} // namespace sldf
