#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sldf/labeling.hpp"

namespace sldf {

enum class Variant : std::uint8_t { SwitchLess, SwitchBased };

enum class ChannelClass : std::uint8_t {
    OnChip,
    ShortReach,
    LocalLongReach,
    GlobalLongReach,
    TerminalLink,
};
inline constexpr int kNumChannelClasses = 5;

enum class Direction : std::uint8_t { Up, Down };

/// Mesh neighbour directions inside a C-group grid. +x is East, +y is South.
enum class MeshDir : std::uint8_t { East, West, North, South };

std::string_view to_string(Variant v);
std::string_view to_string(ChannelClass c);
std::string_view to_string(Direction d);
Variant variant_from_string(std::string_view s);
ChannelClass channel_class_from_string(std::string_view s);

/// Link delay in cycles for each channel class (short reach 1, long reach 8).
int default_latency(ChannelClass c);

struct SwitchPorts {
    int terminal = 0;
    int local = 0;
    int global = 0;
    bool operator==(const SwitchPorts&) const = default;
};

struct TopoConfig {
    Variant variant = Variant::SwitchLess;
    int a = 1;
    int b = 1;
    int m = 1;
    int n = 4;
    int r = 1;
    std::optional<int> h_override;
    std::optional<int> g_override;
    int intra_bw = 1;
    SwitchPorts sw_ports;

    /// C-groups per W-group. For SwitchBased a C-group is one switch, so this
    /// is switches per group.
    int ab() const { return variant == Variant::SwitchLess ? a * b : sw_ports.local + 1; }
    /// Ports per C-group (SwitchBased: local + global ports per switch).
    int k() const { return variant == Variant::SwitchLess ? n * m : sw_ports.local + sw_ports.global; }
    /// Router grid edge of one C-group (1 for SwitchBased).
    int grid() const { return variant == Variant::SwitchLess ? m * r : 1; }
    /// Global ports per C-group (switch-less) or per switch (switch-based).
    int h() const;
    /// Number of W-groups (switch-less) or groups (switch-based).
    int g() const;
    /// Largest g the wiring supports.
    int g_max() const;

    /// Throws ConfigError naming the violated invariant.
    void validate() const;

    bool operator==(const TopoConfig&) const = default;
};

/// Node position in the global total order: (W-group, C-group, label).
struct NodeAddress {
    int w = 0;
    int c = 0;
    int label = 0;
    auto operator<=>(const NodeAddress&) const = default;
};

/// Up iff src < dst lexicographically. Throws std::invalid_argument on src == dst.
Direction classify_channel(const NodeAddress& src, const NodeAddress& dst);

struct Router {
    NodeAddress addr;
    int x = 0;  // grid column within the C-group (switch-less)
    int y = 0;
    int chip = -1;
};

struct Port {
    int w = 0;
    int c = 0;
    int index = 0;
    PortKind kind = PortKind::Unused;
    int label = 0;
    int host = -1;     // router id
    Side side = Side::Top;
    int offset = 0;    // position along the side, in routers
    int peer = -1;     // port id on the far end, -1 if unwired
    int channel = -1;  // outgoing long-reach channel id, -1 if unwired
};

struct Channel {
    int src = -1;
    int dst = -1;
    ChannelClass cls = ChannelClass::OnChip;
    int latency = 1;
    int bandwidth = 1;
    Direction dir = Direction::Up;
    int src_port = -1;
    int dst_port = -1;
};

struct Chip {
    int w = 0;
    int c = 0;
    int index = 0;  // position within the C-group (snake order) or terminal index
    std::vector<int> routers;
};

/// Immutable network instance. Produced by build_switchless, build_switchbased
/// or read_manifest; safe to share between threads once constructed.
class Topology {
public:
    const TopoConfig& config() const { return config_; }
    const CGroupLabeling& labeling() const { return labeling_; }

    std::span<const Router> routers() const { return routers_; }
    std::span<const Port> ports() const { return ports_; }
    std::span<const Channel> channels() const { return channels_; }
    std::span<const Chip> chips() const { return chips_; }

    std::span<const int> out_channels(int router) const;
    std::span<const int> in_channels(int router) const;

    /// Channel leaving `router` towards the mesh neighbour, or -1.
    int mesh_channel(int router, MeshDir d) const { return mesh_[router][static_cast<int>(d)]; }

    int routers_per_cgroup() const { return routers_per_cgroup_; }
    int cgroups_per_wgroup() const { return cgroups_per_wgroup_; }
    int num_wgroups() const { return num_wgroups_; }
    int chips_per_cgroup() const { return chips_per_cgroup_; }

    /// Switch-less: router at grid position `pos` of C-group (w, c).
    /// Switch-based: switch `c` of group `w` (pos ignored).
    int router_id(int w, int c, int pos = 0) const;
    /// Grid position (row-major) of a switch-less router inside its C-group.
    int grid_pos(int router) const { return router % routers_per_cgroup_; }
    /// Switch-less: port id for (w, c, index).
    int port_id(int w, int c, int index) const;

    /// Latency of the terminal attachment (0 for on-chip injection).
    int terminal_latency() const { return terminal_latency_; }

    /// Copy with channel `id` removed (adjacency rebuilt). Test helper for
    /// exercising verify_topology failure paths.
    Topology without_channel(int id) const;

    friend Topology build_switchless(const TopoConfig& config);
    friend Topology build_switchbased(const TopoConfig& config);
    friend Topology read_manifest(std::string_view text);

private:
    void index_adjacency();

    TopoConfig config_;
    CGroupLabeling labeling_;
    std::vector<Router> routers_;
    std::vector<Port> ports_;
    std::vector<Channel> channels_;
    std::vector<Chip> chips_;
    std::vector<int> out_offsets_, out_list_, in_offsets_, in_list_;
    std::vector<std::array<int, 4>> mesh_;
    int routers_per_cgroup_ = 1;
    int cgroups_per_wgroup_ = 1;
    int num_wgroups_ = 1;
    int chips_per_cgroup_ = 1;
    int terminal_latency_ = 0;
};

Topology build_switchless(const TopoConfig& config);
Topology build_switchbased(const TopoConfig& config);
/// Dispatches on config.variant.
Topology build_topology(const TopoConfig& config);

/// Port index inside C-group `c` that carries the local link to C-group `peer`.
int local_port_index(const TopoConfig& config, int c, int peer);
/// Peer C-group of local port `index` of C-group `c`, or -1 for non-local ports.
int local_port_peer(const TopoConfig& config, int c, int index);
/// Kind of port `index` in C-group `c`.
PortKind port_kind(const TopoConfig& config, int c, int index);

/// Destination W-group of flattened global port `t` of W-group `i`: t, or t+1 if t >= i.
int global_peer_group(int i, int t);
/// Inverse of global_peer_group: flattened port of W-group `i` leading to `j`.
int global_port_toward(int i, int j);

struct LocalLink {
    int w = 0;
    int low_c = 0;
    int low_port = 0;   // index in the lower C-group (its LocalUp slot)
    int high_c = 0;
    int high_port = 0;  // index in the higher C-group (== low_c)
};

struct GlobalLink {
    int low_w = 0;
    int low_t = 0;   // flattened global port index in the lower W-group
    int high_w = 0;
    int high_t = 0;
};

/// Local wiring of one W-group. Throws WiringError if k < ab-1+h.
std::vector<LocalLink> wire_local(const TopoConfig& config);
/// Global wiring of the system. Throws WiringError if g > ab*h+1.
std::vector<GlobalLink> wire_global(int g, int ports_per_group);

struct CheckResult {
    std::string name;
    bool pass = true;
    std::string witness;
};

struct TopologyReport {
    std::vector<CheckResult> checks;
    bool all_pass() const;
    const CheckResult* find(std::string_view name) const;
};

TopologyReport verify_topology(const Topology& topo);

} // namespace sldf
