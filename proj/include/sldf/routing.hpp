#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "sldf/topology.hpp"

namespace sldf {

enum class PathMode : std::uint8_t { Minimal, NonMinimal };
enum class VcScheme : std::uint8_t { Baseline, Reduced };

struct RoutingMode {
    PathMode path = PathMode::Minimal;
    VcScheme vc_scheme = VcScheme::Reduced;
    bool misroute_restricted = true;  // Reduced + NonMinimal only
    bool force_single_vc = false;     // broken mode for negative tests

    /// VCs used by a switch-less network under this mode.
    int num_vcs() const;
    bool operator==(const RoutingMode&) const = default;
};

std::string_view to_string(PathMode p);
std::string_view to_string(VcScheme s);
PathMode path_mode_from_string(std::string_view s);
VcScheme vc_scheme_from_string(std::string_view s);
/// "baseline-min", "reduced-nonmin-restricted", ...
std::string mode_name(const RoutingMode& mode);
RoutingMode mode_from_name(std::string_view name);

enum class Phase : std::uint8_t {
    SrcCGroup,
    SrcWGroupSecondCGroup,
    IntermWGroupEntryCGroup,
    IntermWGroupExitCGroup,
    DstWGroupEntryCGroup,
    DstCGroup,
};
std::string_view to_string(Phase p);

/// VC of the input buffers a packet occupies while in `phase`.
int vc_assign(Phase phase, const RoutingMode& mode);

struct RouteState {
    Phase phase = Phase::SrcCGroup;
    std::uint8_t vc = 0;
    bool descending = false;     // up*/down* progress inside the current region
    std::uint8_t globals = 0;    // global hops taken so far
    int inter_w = -1;            // intermediate W-group, -1 for minimal
};

/// One routing decision. channel == -1 means eject at the current router.
struct Hop {
    int channel = -1;
    RouteState next;
};

struct PathStep {
    int channel = -1;
    int vc = 0;
    Phase phase = Phase::SrcCGroup;  // phase after traversing the channel
};

/// Picks the misroute W-group at injection. Returns -1 for a minimal route:
/// Minimal mode, src_w == dst_w, or an empty restricted candidate set.
int select_intermediate_wgroup(int src_w, int dst_w, int g, const RoutingMode& mode, std::mt19937_64& rng);

/// All values select_intermediate_wgroup can return (used for exhaustive checks).
std::vector<int> intermediate_candidates(int src_w, int dst_w, int g, const RoutingMode& mode);

/// Dimension-order (X then Y) route between two grid positions, as positions.
std::vector<int> dor_route(int grid, int from, int to);

/// Routing function over one topology. Immutable after construction.
class Routing {
public:
    Routing(const Topology& topo, RoutingMode mode);

    const Topology& topology() const { return *topo_; }
    const RoutingMode& mode() const { return mode_; }
    /// VCs per channel the simulator must provide.
    int num_vcs() const { return num_vcs_; }

    RouteState initial(int src_router, int dst_router, int inter_w) const;
    /// Throws RoutingError if a required port is missing.
    Hop next(const RouteState& state, int current, int dst_router) const;
    /// Full resource sequence from src to dst. Throws RoutingError on loops.
    std::vector<PathStep> path(int src_router, int dst_router, int inter_w) const;

private:
    int vc_for(const RouteState& s) const;
    Phase phase_after(const RouteState& s, int channel, int dst_router) const;
    int exit_cgroup(int w, int toward_w) const;
    int global_port(int w, int toward_w) const;
    int local_port(int w, int c, int toward_c) const;
    int dor_step(int current, int target) const;
    int updown_step(const RouteState& s, int current, int target) const;
    void build_updown_table();

    const Topology* topo_;
    RoutingMode mode_;
    int num_vcs_ = 1;
    bool use_updown_ = false;
    int wn_ = 0;                        // routers per W-group
    std::vector<std::int16_t> ud_next_; // ((li*2 + desc) * wn + target) -> slot, -1 arrived, -2 none
};

} // namespace sldf
