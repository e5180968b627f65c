#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sldf/topology.hpp"

namespace sldf {

enum class HopClass : std::uint8_t { Global, Local, Terminal, ShortReach, OnChip };
inline constexpr int kNumHopClasses = 5;

HopClass hop_class(ChannelClass c);

using HopCounts = std::array<int, kNumHopClasses>;

/// One delivered packet.
struct PacketTrace {
    int src_chip = -1;
    int dst_chip = -1;
    std::int64_t create_cycle = 0;
    std::int64_t inject_cycle = 0;  // head left the source queue
    std::int64_t eject_cycle = 0;   // tail delivered
    HopCounts hops{};
};

/// pJ/bit per hop. Long-reach covers global, local and terminal hops.
struct EnergyModel {
    double long_reach = 20.0;
    double intra_cgroup = 1.0;  // blended short-reach / on-chip hop
    double packet_energy(const HopCounts& h) const;
};

struct RunStats {
    double offered = 0;   // flits/cycle/chip
    double accepted = 0;
    double lat_mean = 0;  // cycles, creation to tail ejection
    double lat_median = 0;
    double lat_p99 = 0;
    std::int64_t packets = 0;
    int active_sources = 0;
    std::array<double, kNumHopClasses> mean_hops{};
    double energy_pj_per_bit = 0;
    bool stalled = false;  // source queues kept growing
};

/// Mean energy over a set of traces. Throws std::invalid_argument on an empty set.
double energy_per_transmission(const std::vector<PacketTrace>& traces, const EnergyModel& model = {});

} // namespace sldf
