#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "sldf/routing.hpp"
#include "sldf/stats.hpp"
#include "sldf/traffic.hpp"

namespace sldf {

struct SimParams {
    int packet_length = 4;   // flits
    int buffer = 32;         // flits per (input port, VC)
    std::int64_t warmup = 5000;
    std::int64_t measure = 10000;
    std::uint64_t seed = 1;
    double rate = 0;         // offered flits/cycle/chip
    bool trace = false;      // keep a PacketTrace per measured packet
    bool check_invariants = false;  // full credit audit every cycle
    /// Buffer lanes per routing VC. A head claims any free lane of its VC.
    int vc_lanes = 2;
    bool operator==(const SimParams&) const = default;
};

/// Cycle-accurate flit-level simulation of one topology under one routing
/// mode and workload.
///
/// Routers are input-queued with per-(port, VC) buffers and credit flow
/// control. A router routes, allocates and traverses its crossbar in one
/// cycle; channels add their latency. Each cycle runs three phases:
/// deliver link arrivals and credits, let every router with buffered flits
/// forward or eject, then create and inject new packets.
class Simulator {
public:
    Simulator(const Routing& routing, const Traffic& traffic, SimParams params);

    void step();
    std::int64_t cycle() const { return now_; }

    /// Warmup then measurement window. Statistics cover the window only.
    RunStats run();

    /// Stops packet creation, drops packets still waiting in source queues,
    /// then steps until the network is empty. False if flits remain after
    /// `horizon` cycles.
    bool drain_check(std::int64_t horizon);

    /// Queues one packet at the source (bypasses the workload process).
    void enqueue_packet(int src_chip, int dst_chip, int dst_router = -1, int inter_w = -1);
    void set_rate(double rate) { params_.rate = rate; }
    void set_creation(bool on) { creating_ = on; }

    std::int64_t flits_injected() const { return flits_injected_; }
    std::int64_t flits_ejected() const { return flits_ejected_; }
    std::int64_t flits_in_network() const { return flits_injected_ - flits_ejected_; }
    std::int64_t packets_waiting() const;
    /// Deliveries recorded since construction (only when params.trace).
    const std::vector<PacketTrace>& traces() const { return traces_; }

    /// Audits flit conservation and per-(channel, VC) credit accounting.
    /// Throws InvariantViolation.
    void check_invariants() const;

private:
    struct Packet {
        int src_chip = -1;
        int dst_chip = -1;
        int dst_router = -1;
        std::int64_t create = 0;
        std::int64_t inject = 0;
        RouteState state;
        RouteState next_state;
        HopCounts hops{};
    };
    struct Flit {
        std::int32_t packet = -1;
        std::int32_t seq = 0;
    };
    struct Manual {
        std::int64_t create;
        int dst_chip;
        int dst_router;
        int inter_w;
    };
    enum class EventKind : std::uint8_t { Flit, Credit, InjectCredit };
    struct Event {
        EventKind kind;
        int target;  // ivc for Flit, ovc for Credit, injection slot for InjectCredit
        Flit flit;
    };

    void deliver();
    void process_router(int r);
    void create_and_inject();
    void inject_port(int tp);
    int alloc_packet();
    void schedule(int delay, const Event& e);
    void push_flit(int ivc, Flit f);
    void mark_active(int r);
    void eject_tail(int pkt);

    const Routing* routing_;
    const Topology* topo_;
    const Traffic* traffic_;
    SimParams params_;
    int V_ = 1;     // physical VCs per channel
    int lanes_ = 1;
    int C_ = 0;     // network channels; terminal port tp is pseudo-channel C_ + tp
    int T_ = 0;     // terminal ports
    int term_lat_ = 0;
    bool switchless_ = true;

    // Static structure.
    std::vector<int> tp_router_, tp_chip_;
    std::vector<std::vector<int>> chip_tps_;
    std::vector<int> chip_rr_;
    std::vector<int> in_off_, in_ports_;   // per router: pseudo-channels feeding it
    std::vector<int> out_off_, out_ports_; // per router: pseudo-channels leaving it
    std::vector<int> out_local_;           // pseudo-channel -> local output index at its source router
    std::vector<int> eject_tp_of_chip_;    // chip -> terminal port that ejects it
    std::vector<int> pc_bw_, pc_lat_, pc_dst_router_;
    std::vector<int> rr_off_;              // per router offset into rr_
    std::vector<int> rr_;
    std::vector<int> hold_;                // ejection outputs: input VC key mid-packet, -1 if none

    // Input VCs: id = pseudo_channel * V + vc.
    struct InVc {
        std::uint16_t head = 0;
        std::uint16_t count = 0;
        std::int16_t out = -1;     // local output index
        std::int16_t out_vc = -1;  // physical VC claimed by the head
        std::uint8_t valid = 0;    // route computed for the packet at the front
        std::uint8_t vc_class = 0; // VC class chosen by routing
    };
    std::vector<Flit> buf_;
    std::vector<InVc> ivc_;
    std::vector<std::int32_t> router_flits_;

    // Output VCs for network channels: id = channel * V + vc.
    struct OutVc {
        std::int32_t owner = -1;  // input VC holding it, -1 free
        std::int16_t credits = 0;
    };
    std::vector<OutVc> ovc_;
    std::vector<std::int32_t> inflight_flits_, inflight_credits_;
    // Injection credits per (terminal port, VC); slot = tp * V + vc.
    std::vector<std::int16_t> inj_credits_;
    std::vector<std::int32_t> inj_inflight_flits_, inj_inflight_credits_;
    std::vector<int> inj_vc_;

    // Sources.
    std::vector<std::deque<std::int64_t>> src_queue_;
    std::vector<std::deque<Manual>> manual_queue_;
    std::vector<int> inj_packet_;  // packet being injected on each terminal port, -1 none
    std::vector<int> inj_seq_;

    std::vector<Packet> packets_;
    std::vector<int> free_packets_;

    std::vector<std::vector<Event>> wheel_;
    std::vector<int> active_;
    std::vector<std::uint8_t> is_active_;

    // Scratch for arbitration.
    std::vector<int> cand_out_, cand_ivc_;
    std::vector<int> in_cap_, out_cap_;
    std::vector<int> out_count_, out_fill_, bucket_;
    std::vector<std::uint32_t> nonempty_;  // per pseudo-channel: VCs holding flits

    std::mt19937_64 rng_;
    std::int64_t now_ = 0;
    bool creating_ = true;

    std::int64_t flits_injected_ = 0, flits_ejected_ = 0;
    // Measurement window.
    bool measuring_ = false;
    std::int64_t window_flits_ = 0;
    std::vector<double> latencies_;
    HopCounts hop_sum_{};
    double energy_sum_ = 0;
    std::vector<PacketTrace> traces_;
    EnergyModel energy_;
};

} // namespace sldf
