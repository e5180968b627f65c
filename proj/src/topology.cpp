#include "sldf/topology.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "sldf/errors.hpp"

namespace sldf {

std::string_view to_string(Variant v) {
    return v == Variant::SwitchLess ? "switchless" : "switchbased";
}

std::string_view to_string(ChannelClass c) {
    switch (c) {
    case ChannelClass::OnChip: return "onchip";
    case ChannelClass::ShortReach: return "short_reach";
    case ChannelClass::LocalLongReach: return "local_lr";
    case ChannelClass::GlobalLongReach: return "global_lr";
    case ChannelClass::TerminalLink: return "terminal";
    }
    return "?";
}

std::string_view to_string(Direction d) { return d == Direction::Up ? "up" : "down"; }

Variant variant_from_string(std::string_view s) {
    if (s == "switchless" || s == "switch-less") return Variant::SwitchLess;
    if (s == "switchbased" || s == "switch-based") return Variant::SwitchBased;
    throw std::invalid_argument("unknown variant: " + std::string(s));
}

ChannelClass channel_class_from_string(std::string_view s) {
    for (int i = 0; i < kNumChannelClasses; ++i) {
        auto c = static_cast<ChannelClass>(i);
        if (to_string(c) == s) return c;
    }
    throw std::invalid_argument("unknown channel class: " + std::string(s));
}

int default_latency(ChannelClass c) {
    switch (c) {
    case ChannelClass::OnChip:
    case ChannelClass::ShortReach: return 1;
    default: return 8;
    }
}

int TopoConfig::h() const {
    if (variant == Variant::SwitchBased) return sw_ports.global;
    return h_override ? *h_override : k() - ab() + 1;
}

int TopoConfig::g_max() const { return ab() * h() + 1; }

int TopoConfig::g() const { return g_override ? *g_override : g_max(); }

void TopoConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (variant == Variant::SwitchBased) {
        if (sw_ports.terminal < 1 || sw_ports.local < 1 || sw_ports.global < 1)
            fail("switch ports (terminal, local, global) must all be >= 1");
    } else {
        if (a < 1 || b < 1 || m < 1 || r < 1) fail("a, b, m, r must be >= 1");
        if (n < 1) fail("n must be >= 1");
        if (k() % 4 != 0) fail("k = n*m must be a multiple of 4 (k/4 ports per C-group side)");
        if (h() < 1) fail("h must be >= 1 (k = " + std::to_string(k()) + ", ab = " + std::to_string(ab()) + ")");
        if (k() < ab() - 1 + h())
            fail("k < ab - 1 + h: " + std::to_string(k()) + " ports cannot hold " + std::to_string(ab() - 1) +
                 " local and " + std::to_string(h()) + " global ports");
    }
    if (g() < 1) fail("g must be >= 1");
    if (g() > g_max()) fail("g > ab*h + 1: " + std::to_string(g()) + " > " + std::to_string(g_max()));
    if (intra_bw < 1) fail("intra_bw must be >= 1");
}

Direction classify_channel(const NodeAddress& src, const NodeAddress& dst) {
    if (src == dst) throw std::invalid_argument("classify_channel: self loop");
    return src < dst ? Direction::Up : Direction::Down;
}

int local_port_index(const TopoConfig& config, int c, int peer) {
    if (peer == c || peer < 0 || peer >= config.ab()) throw WiringError("no local port from C-group to itself");
    if (peer < c) return peer;
    return config.k() - (config.ab() - 1 - c) + (peer - c - 1);
}

int local_port_peer(const TopoConfig& config, int c, int index) {
    if (index < c) return index;
    const int up_base = config.k() - (config.ab() - 1 - c);
    if (index >= up_base && index < config.k()) return c + 1 + (index - up_base);
    return -1;
}

PortKind port_kind(const TopoConfig& config, int c, int index) {
    if (index < c) return PortKind::LocalDown;
    if (index < c + config.h()) return PortKind::Global;
    if (index >= config.k() - (config.ab() - 1 - c)) return PortKind::LocalUp;
    return PortKind::Unused;
}

int global_peer_group(int i, int t) { return t < i ? t : t + 1; }

int global_port_toward(int i, int j) {
    if (i == j) throw WiringError("no global port from a W-group to itself");
    return j < i ? j : j - 1;
}

std::vector<LocalLink> wire_local(const TopoConfig& config) {
    const int ab = config.ab();
    if (config.k() < ab - 1 + config.h())
        throw WiringError("k < ab - 1 + h: not enough ports for local wiring");
    std::vector<LocalLink> links;
    links.reserve(ab * (ab - 1) / 2);
    for (int x = 0; x < ab; ++x)
        for (int y = x + 1; y < ab; ++y)
            links.push_back({0, x, local_port_index(config, x, y), y, local_port_index(config, y, x)});
    return links;
}

std::vector<GlobalLink> wire_global(int g, int ports_per_group) {
    if (g > ports_per_group + 1)
        throw WiringError("g > ab*h + 1: " + std::to_string(g) + " W-groups need more global ports");
    std::vector<GlobalLink> links;
    links.reserve(static_cast<size_t>(g) * (g - 1) / 2);
    for (int i = 0; i < g; ++i)
        for (int j = i + 1; j < g; ++j) links.push_back({i, j - 1, j, i});
    return links;
}

std::span<const int> Topology::out_channels(int router) const {
    return {out_list_.data() + out_offsets_[router], out_list_.data() + out_offsets_[router + 1]};
}

std::span<const int> Topology::in_channels(int router) const {
    return {in_list_.data() + in_offsets_[router], in_list_.data() + in_offsets_[router + 1]};
}

int Topology::router_id(int w, int c, int pos) const {
    return (w * cgroups_per_wgroup_ + c) * routers_per_cgroup_ + pos;
}

int Topology::port_id(int w, int c, int index) const {
    return (w * cgroups_per_wgroup_ + c) * config_.k() + index;
}

void Topology::index_adjacency() {
    const int nr = static_cast<int>(routers_.size());
    out_offsets_.assign(nr + 1, 0);
    in_offsets_.assign(nr + 1, 0);
    for (const auto& ch : channels_) {
        ++out_offsets_[ch.src + 1];
        ++in_offsets_[ch.dst + 1];
    }
    for (int i = 0; i < nr; ++i) {
        out_offsets_[i + 1] += out_offsets_[i];
        in_offsets_[i + 1] += in_offsets_[i];
    }
    out_list_.assign(channels_.size(), -1);
    in_list_.assign(channels_.size(), -1);
    std::vector<int> oc(out_offsets_.begin(), out_offsets_.end() - 1);
    std::vector<int> ic(in_offsets_.begin(), in_offsets_.end() - 1);
    mesh_.assign(nr, {-1, -1, -1, -1});
    for (int id = 0; id < static_cast<int>(channels_.size()); ++id) {
        const auto& ch = channels_[id];
        out_list_[oc[ch.src]++] = id;
        in_list_[ic[ch.dst]++] = id;
        if (ch.cls != ChannelClass::OnChip && ch.cls != ChannelClass::ShortReach) continue;
        const auto& s = routers_[ch.src];
        const auto& d = routers_[ch.dst];
        MeshDir dir;
        if (d.x == s.x + 1) dir = MeshDir::East;
        else if (d.x + 1 == s.x) dir = MeshDir::West;
        else if (d.y + 1 == s.y) dir = MeshDir::North;
        else dir = MeshDir::South;
        mesh_[ch.src][static_cast<int>(dir)] = id;
    }
}

Topology Topology::without_channel(int id) const {
    Topology t = *this;
    t.channels_.erase(t.channels_.begin() + id);
    for (auto& p : t.ports_) {
        if (p.channel == id) p.channel = -1;
        else if (p.channel > id) --p.channel;
    }
    t.index_adjacency();
    return t;
}

namespace {

int add_channel(std::vector<Channel>& chans, const std::vector<Router>& routers, int src, int dst,
                ChannelClass cls, int bw, int src_port = -1, int dst_port = -1) {
    Channel ch;
    ch.src = src;
    ch.dst = dst;
    ch.cls = cls;
    ch.latency = default_latency(cls);
    ch.bandwidth = bw;
    ch.dir = classify_channel(routers[src].addr, routers[dst].addr);
    ch.src_port = src_port;
    ch.dst_port = dst_port;
    chans.push_back(ch);
    return static_cast<int>(chans.size()) - 1;
}

void wire_ports(std::vector<Port>& ports, std::vector<Channel>& chans,
                const std::vector<Router>& routers, int pa, int pb, ChannelClass cls) {
    Port& a = ports[pa];
    Port& b = ports[pb];
    a.peer = pb;
    b.peer = pa;
    a.channel = add_channel(chans, routers, a.host, b.host, cls, 1, pa, pb);
    b.channel = add_channel(chans, routers, b.host, a.host, cls, 1, pb, pa);
}

} // namespace

Topology build_switchless(const TopoConfig& config) {
    if (config.variant != Variant::SwitchLess) throw ConfigError("build_switchless needs variant switchless");
    config.validate();

    Topology t;
    t.config_ = config;
    const int W = config.grid(), ab = config.ab(), k = config.k(), h = config.h(), g = config.g();
    const int m = config.m, r = config.r;
    t.labeling_ = label_ports(W, k);
    t.routers_per_cgroup_ = W * W;
    t.cgroups_per_wgroup_ = ab;
    t.num_wgroups_ = g;
    t.chips_per_cgroup_ = m * m;
    t.terminal_latency_ = 0;

    const auto& lab = t.labeling_;
    t.routers_.reserve(static_cast<size_t>(g) * ab * W * W);
    t.chips_.reserve(static_cast<size_t>(g) * ab * m * m);
    for (int w = 0; w < g; ++w) {
        for (int c = 0; c < ab; ++c) {
            const int chip_base = static_cast<int>(t.chips_.size());
            for (int s = 0; s < m * m; ++s) t.chips_.push_back({w, c, s, {}});
            for (int pos = 0; pos < W * W; ++pos) {
                Router rt;
                rt.addr = {w, c, lab.router_label[pos]};
                rt.x = pos % W;
                rt.y = pos / W;
                const int cx = rt.x / r, cy = rt.y / r;
                const int snake = cy * m + (cy % 2 ? m - 1 - cx : cx);
                rt.chip = chip_base + snake;
                t.chips_[rt.chip].routers.push_back(static_cast<int>(t.routers_.size()));
                t.routers_.push_back(rt);
            }
        }
    }

    // Mesh channels.
    for (int id = 0; id < static_cast<int>(t.routers_.size()); ++id) {
        const int base = id - t.grid_pos(id);
        for (int nb : grid_neighbors(W, t.grid_pos(id))) {
            const int other = base + nb;
            const auto cls = t.routers_[id].chip == t.routers_[other].chip ? ChannelClass::OnChip
                                                                            : ChannelClass::ShortReach;
            add_channel(t.channels_, t.routers_, id, other, cls, config.intra_bw);
        }
    }

    // Ports.
    t.ports_.reserve(static_cast<size_t>(g) * ab * k);
    for (int w = 0; w < g; ++w) {
        for (int c = 0; c < ab; ++c) {
            for (int i = 0; i < k; ++i) {
                Port p;
                p.w = w;
                p.c = c;
                p.index = i;
                p.kind = port_kind(config, c, i);
                p.label = lab.port_label[i];
                p.host = t.router_id(w, c, lab.port_host[i]);
                p.side = lab.port_side[i];
                p.offset = lab.port_offset[i];
                t.ports_.push_back(p);
            }
        }
    }

    const auto locals = wire_local(config);
    for (int w = 0; w < g; ++w)
        for (const auto& l : locals)
            wire_ports(t.ports_, t.channels_, t.routers_, t.port_id(w, l.low_c, l.low_port),
                       t.port_id(w, l.high_c, l.high_port), ChannelClass::LocalLongReach);

    for (const auto& gl : wire_global(g, ab * h)) {
        const int pa = t.port_id(gl.low_w, gl.low_t / h, gl.low_t / h + gl.low_t % h);
        const int pb = t.port_id(gl.high_w, gl.high_t / h, gl.high_t / h + gl.high_t % h);
        wire_ports(t.ports_, t.channels_, t.routers_, pa, pb, ChannelClass::GlobalLongReach);
    }

    t.index_adjacency();
    return t;
}

Topology build_switchbased(const TopoConfig& config) {
    if (config.variant != Variant::SwitchBased) throw ConfigError("build_switchbased needs variant switchbased");
    config.validate();

    Topology t;
    t.config_ = config;
    const int ab = config.ab(), k = config.k(), h = config.h(), g = config.g();
    const int term = config.sw_ports.terminal;
    t.routers_per_cgroup_ = 1;
    t.cgroups_per_wgroup_ = ab;
    t.num_wgroups_ = g;
    t.chips_per_cgroup_ = term;
    t.terminal_latency_ = default_latency(ChannelClass::TerminalLink);

    for (int w = 0; w < g; ++w) {
        for (int c = 0; c < ab; ++c) {
            const int id = static_cast<int>(t.routers_.size());
            Router rt;
            rt.addr = {w, c, 0};
            rt.chip = static_cast<int>(t.chips_.size());
            t.routers_.push_back(rt);
            for (int i = 0; i < term; ++i) t.chips_.push_back({w, c, i, {id}});
        }
    }
    for (int w = 0; w < g; ++w) {
        for (int c = 0; c < ab; ++c) {
            for (int i = 0; i < k; ++i) {
                Port p;
                p.w = w;
                p.c = c;
                p.index = i;
                p.kind = port_kind(config, c, i);
                p.label = i;
                p.host = t.router_id(w, c);
                t.ports_.push_back(p);
            }
        }
    }
    const auto locals = wire_local(config);
    for (int w = 0; w < g; ++w)
        for (const auto& l : locals)
            wire_ports(t.ports_, t.channels_, t.routers_, t.port_id(w, l.low_c, l.low_port),
                       t.port_id(w, l.high_c, l.high_port), ChannelClass::LocalLongReach);
    for (const auto& gl : wire_global(g, ab * h)) {
        const int pa = t.port_id(gl.low_w, gl.low_t / h, gl.low_t / h + gl.low_t % h);
        const int pb = t.port_id(gl.high_w, gl.high_t / h, gl.high_t / h + gl.high_t % h);
        wire_ports(t.ports_, t.channels_, t.routers_, pa, pb, ChannelClass::GlobalLongReach);
    }
    t.index_adjacency();
    return t;
}

Topology build_topology(const TopoConfig& config) {
    return config.variant == Variant::SwitchLess ? build_switchless(config) : build_switchbased(config);
}

bool TopologyReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* TopologyReport::find(std::string_view name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

std::string addr_str(const NodeAddress& a) {
    std::ostringstream os;
    os << "(" << a.w << "," << a.c << "," << a.label << ")";
    return os.str();
}

CheckResult check_duplex(const Topology& t) {
    CheckResult res{"duplex_pairing", true, {}};
    std::multiset<std::tuple<int, int, int>> keys;
    for (const auto& ch : t.channels()) keys.insert({ch.src, ch.dst, static_cast<int>(ch.cls)});
    for (int id = 0; id < static_cast<int>(t.channels().size()); ++id) {
        const auto& ch = t.channels()[id];
        if (keys.count({ch.dst, ch.src, static_cast<int>(ch.cls)}) == 0) {
            res.pass = false;
            res.witness = "channel " + std::to_string(id) + " " + addr_str(t.routers()[ch.src].addr) + "->" +
                          addr_str(t.routers()[ch.dst].addr) + " (" + std::string(to_string(ch.cls)) +
                          ") has no reverse";
            return res;
        }
    }
    return res;
}

CheckResult check_directions(const Topology& t) {
    CheckResult res{"direction_tags", true, {}};
    for (int id = 0; id < static_cast<int>(t.channels().size()); ++id) {
        const auto& ch = t.channels()[id];
        const auto& s = t.routers()[ch.src].addr;
        const auto& d = t.routers()[ch.dst].addr;
        if (s == d || ch.dir != classify_channel(s, d)) {
            res.pass = false;
            res.witness = "channel " + std::to_string(id) + " tagged " + std::string(to_string(ch.dir));
            return res;
        }
    }
    return res;
}

CheckResult check_partition(const Topology& t) {
    CheckResult res{"port_partition", true, {}};
    const auto& cfg = t.config();
    const int k = cfg.k();
    for (size_t base = 0; base < t.ports().size(); base += k) {
        int max_down = -1, min_global = k, max_global = -1, min_up = k;
        for (int i = 0; i < k; ++i) {
            const auto& p = t.ports()[base + i];
            if (p.kind != port_kind(cfg, p.c, p.index)) {
                res.pass = false;
                res.witness = "port " + std::to_string(base + i) + " has kind " + std::string(to_string(p.kind));
                return res;
            }
            switch (p.kind) {
            case PortKind::LocalDown: max_down = std::max(max_down, i); break;
            case PortKind::Global:
                min_global = std::min(min_global, i);
                max_global = std::max(max_global, i);
                break;
            case PortKind::LocalUp: min_up = std::min(min_up, i); break;
            case PortKind::Unused: break;
            }
        }
        if (!(max_down < min_global && min_global <= max_global && max_global < min_up)) {
            const auto& p = t.ports()[base];
            res.pass = false;
            res.witness = "C-group (" + std::to_string(p.w) + "," + std::to_string(p.c) + ") violates ordering";
            return res;
        }
    }
    return res;
}

CheckResult check_labels(const Topology& t) {
    CheckResult res{"label_ranges", true, {}};
    const int per = t.routers_per_cgroup();
    for (size_t base = 0; base < t.routers().size(); base += per) {
        std::vector<char> seen(per, 0);
        for (int i = 0; i < per; ++i) {
            const int l = t.routers()[base + i].addr.label;
            if (l < 0 || l >= per || seen[l]) {
                res.pass = false;
                res.witness = "router " + std::to_string(base + i) + " label " + std::to_string(l);
                return res;
            }
            seen[l] = 1;
        }
    }
    if (t.config().variant == Variant::SwitchLess) {
        for (size_t i = 0; i < t.ports().size(); ++i) {
            if (t.ports()[i].label < per) {
                res.pass = false;
                res.witness = "port " + std::to_string(i) + " label " + std::to_string(t.ports()[i].label) +
                              " not above core labels";
                return res;
            }
        }
    }
    return res;
}

CheckResult check_port_wiring(const Topology& t) {
    CheckResult res{"port_wiring", true, {}};
    const auto& cfg = t.config();
    const int h = cfg.h(), g = t.num_wgroups();
    for (int id = 0; id < static_cast<int>(t.ports().size()); ++id) {
        const auto& p = t.ports()[id];
        bool expect = p.kind == PortKind::LocalDown || p.kind == PortKind::LocalUp;
        if (p.kind == PortKind::Global) expect = global_peer_group(p.w, p.c * h + (p.index - p.c)) < g;
        const bool wired = p.peer >= 0 && p.channel >= 0;
        std::string why;
        if (expect != wired) why = expect ? "is unwired" : "is unexpectedly wired";
        else if (wired && t.ports()[p.peer].peer != id) why = "peer is not an involution";
        else if (wired) {
            const auto& ch = t.channels()[p.channel];
            if (ch.src != p.host || ch.dst != t.ports()[p.peer].host) why = "channel endpoints disagree";
        }
        if (!why.empty()) {
            res.pass = false;
            res.witness = "port " + std::to_string(id) + " (w" + std::to_string(p.w) + " c" + std::to_string(p.c) +
                          " #" + std::to_string(p.index) + ") " + why;
            return res;
        }
    }
    return res;
}

CheckResult check_local_completeness(const Topology& t) {
    CheckResult res{"local_completeness", true, {}};
    const int ab = t.cgroups_per_wgroup();
    std::map<std::tuple<int, int, int>, int> count;
    for (const auto& ch : t.channels()) {
        if (ch.cls != ChannelClass::LocalLongReach) continue;
        const auto& s = t.routers()[ch.src].addr;
        const auto& d = t.routers()[ch.dst].addr;
        if (s.c < d.c) ++count[{s.w, s.c, d.c}];
    }
    for (int w = 0; w < t.num_wgroups(); ++w)
        for (int x = 0; x < ab; ++x)
            for (int y = x + 1; y < ab; ++y) {
                auto it = count.find({w, x, y});
                const int n = it == count.end() ? 0 : it->second;
                if (n != 1) {
                    res.pass = false;
                    res.witness = "W-group " + std::to_string(w) + " C-groups " + std::to_string(x) + "," +
                                  std::to_string(y) + " share " + std::to_string(n) + " local links";
                    return res;
                }
            }
    res.witness = std::to_string(ab * (ab - 1) / 2) + " local links per W-group";
    return res;
}

CheckResult check_global_completeness(const Topology& t) {
    CheckResult res{"global_completeness", true, {}};
    const int g = t.num_wgroups();
    std::map<std::pair<int, int>, int> count;
    for (const auto& ch : t.channels()) {
        if (ch.cls != ChannelClass::GlobalLongReach) continue;
        const int a = t.routers()[ch.src].addr.w, b = t.routers()[ch.dst].addr.w;
        if (a < b) ++count[{a, b}];
    }
    const bool exact = g == t.config().g_max();
    for (int i = 0; i < g; ++i)
        for (int j = i + 1; j < g; ++j) {
            auto it = count.find({i, j});
            const int n = it == count.end() ? 0 : it->second;
            if (n < 1 || (exact && n != 1)) {
                res.pass = false;
                res.witness = "W-groups " + std::to_string(i) + "," + std::to_string(j) + " share " +
                              std::to_string(n) + " global links";
                return res;
            }
        }
    return res;
}

} // namespace

TopologyReport verify_topology(const Topology& topo) {
    TopologyReport rep;
    rep.checks.push_back(check_duplex(topo));
    rep.checks.push_back(check_directions(topo));
    rep.checks.push_back(check_partition(topo));
    rep.checks.push_back(check_labels(topo));
    rep.checks.push_back(check_port_wiring(topo));
    rep.checks.push_back(check_local_completeness(topo));
    rep.checks.push_back(check_global_completeness(topo));
    if (topo.config().variant == Variant::SwitchLess) {
        auto lr = verify_labeling(topo.labeling());
        rep.checks.push_back({"labeling", lr.ok, lr.witness});
    }
    return rep;
}

} // namespace sldf
