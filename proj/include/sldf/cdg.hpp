#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sldf/routing.hpp"

namespace sldf {

/// Vertices are (channel, vc) resources, id = channel * num_vcs + vc.
struct ChannelDependencyGraph {
    int num_channels = 0;
    int num_vcs = 1;
    std::vector<int> offsets;  // CSR over vertices
    std::vector<int> targets;
    std::int64_t paths = 0;    // routes walked while building

    int num_vertices() const { return num_channels * num_vcs; }
    std::int64_t num_edges() const { return static_cast<std::int64_t>(targets.size()); }

    /// Builds a graph from an explicit edge list (duplicates allowed).
    static ChannelDependencyGraph from_edges(int num_channels, int num_vcs,
                                             std::vector<std::pair<int, int>> edges);
};

/// Walks every (src router, dst router, misroute choice) route and records
/// consecutive resource pairs.
ChannelDependencyGraph build_cdg(const Routing& routing);

struct CycleWitness {
    int channel = -1;
    int vc = 0;
};

struct DeadlockReport {
    bool acyclic = true;
    std::vector<CycleWitness> cycle;  // closed: last vertex depends on the first
};

DeadlockReport check_deadlock_free(const ChannelDependencyGraph& cdg);

/// One line per resource of the witness cycle: "channel <id> vc <v> <src>-><dst> <class>".
std::string format_cycle(const Topology& topo, const DeadlockReport& rep);

} // namespace sldf
