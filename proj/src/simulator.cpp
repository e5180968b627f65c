#include "sldf/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "sldf/errors.hpp"

namespace sldf {

Simulator::Simulator(const Routing& routing, const Traffic& traffic, SimParams params)
    : routing_(&routing), topo_(&routing.topology()), traffic_(&traffic), params_(params), rng_(params.seed) {
    if (params_.packet_length < 1) throw std::invalid_argument("packet_length must be >= 1");
    if (params_.buffer < params_.packet_length) throw std::invalid_argument("buffer must hold a whole packet");
    if (params_.measure <= 0) throw std::invalid_argument("measure must be > 0");
    if (traffic.num_chips() != static_cast<int>(topo_->chips().size()))
        throw std::invalid_argument("traffic built for a different topology");

    const auto& t = *topo_;
    const bool switchless = t.config().variant == Variant::SwitchLess;
    switchless_ = switchless;
    const int nr = static_cast<int>(t.routers().size());
    const int nchips = static_cast<int>(t.chips().size());
    if (params_.vc_lanes < 1) throw std::invalid_argument("vc_lanes must be >= 1");
    lanes_ = params_.vc_lanes;
    V_ = routing.num_vcs() * lanes_;
    if (V_ > 32) throw std::invalid_argument("at most 32 physical VCs per channel");
    C_ = static_cast<int>(t.channels().size());
    term_lat_ = t.terminal_latency();

    chip_tps_.assign(nchips, {});
    if (switchless) {
        T_ = nr;
        for (int r = 0; r < nr; ++r) {
            tp_router_.push_back(r);
            tp_chip_.push_back(t.routers()[r].chip);
        }
        for (int c = 0; c < nchips; ++c) chip_tps_[c] = t.chips()[c].routers;
    } else {
        T_ = nchips;
        for (int c = 0; c < nchips; ++c) {
            tp_router_.push_back(t.chips()[c].routers.front());
            tp_chip_.push_back(c);
            chip_tps_[c] = {c};
        }
    }
    chip_rr_.assign(nchips, 0);

    const int npc = C_ + T_;
    pc_bw_.resize(npc);
    pc_lat_.resize(npc);
    pc_dst_router_.resize(npc);
    int max_lat = std::max(term_lat_, 1);
    for (int c = 0; c < C_; ++c) {
        const auto& ch = t.channels()[c];
        pc_bw_[c] = ch.bandwidth;
        pc_lat_[c] = ch.latency;
        pc_dst_router_[c] = ch.dst;
        if (ch.latency < 1) throw std::invalid_argument("channel latency must be >= 1");
        max_lat = std::max(max_lat, ch.latency);
    }
    for (int tp = 0; tp < T_; ++tp) {
        pc_bw_[C_ + tp] = 1;
        pc_lat_[C_ + tp] = term_lat_;
        pc_dst_router_[C_ + tp] = tp_router_[tp];
    }

    std::vector<std::vector<int>> tps_at(nr);
    for (int tp = 0; tp < T_; ++tp) tps_at[tp_router_[tp]].push_back(tp);
    in_off_.assign(nr + 1, 0);
    out_off_.assign(nr + 1, 0);
    rr_off_.assign(nr + 1, 0);
    out_local_.assign(npc, -1);
    size_t max_in = 0, max_out = 0;
    for (int r = 0; r < nr; ++r) {
        for (int c : t.in_channels(r)) in_ports_.push_back(c);
        for (int tp : tps_at[r]) in_ports_.push_back(C_ + tp);
        int local = 0;
        for (int c : t.out_channels(r)) {
            out_ports_.push_back(c);
            out_local_[c] = local++;
        }
        for (int tp : tps_at[r]) {
            out_ports_.push_back(C_ + tp);
            out_local_[C_ + tp] = local++;
        }
        in_off_[r + 1] = static_cast<int>(in_ports_.size());
        out_off_[r + 1] = static_cast<int>(out_ports_.size());
        rr_off_[r + 1] = out_off_[r + 1];
        max_in = std::max<size_t>(max_in, in_off_[r + 1] - in_off_[r]);
        max_out = std::max<size_t>(max_out, out_off_[r + 1] - out_off_[r]);
    }
    rr_.assign(out_ports_.size(), -1);
    hold_.assign(out_ports_.size(), -1);

    const size_t nivc = static_cast<size_t>(npc) * V_;
    buf_.assign(nivc * params_.buffer, Flit{});
    ivc_.assign(nivc, InVc{});
    router_flits_.assign(nr, 0);

    const size_t novc = static_cast<size_t>(C_) * V_;
    ovc_.assign(novc, OutVc{-1, static_cast<std::int16_t>(params_.buffer)});
    inflight_flits_.assign(novc, 0);
    inflight_credits_.assign(novc, 0);
    inj_credits_.assign(static_cast<size_t>(T_) * V_, static_cast<std::int16_t>(params_.buffer));
    inj_inflight_flits_.assign(static_cast<size_t>(T_) * V_, 0);
    inj_inflight_credits_.assign(static_cast<size_t>(T_) * V_, 0);
    inj_vc_.assign(T_, 0);

    src_queue_.assign(T_, {});
    manual_queue_.assign(T_, {});
    inj_packet_.assign(T_, -1);
    inj_seq_.assign(T_, 0);

    wheel_.assign(std::bit_ceil(static_cast<unsigned>(max_lat + 1)), {});
    is_active_.assign(nr, 0);
    cand_out_.resize(max_in * V_);
    cand_ivc_.resize(max_in * V_);
    in_cap_.resize(max_in);
    out_cap_.resize(max_out);
    out_count_.resize(max_out + 1);
    out_fill_.resize(max_out);
    bucket_.resize(max_in * V_);
    nonempty_.assign(npc, 0);
}

int Simulator::alloc_packet() {
    if (!free_packets_.empty()) {
        const int id = free_packets_.back();
        free_packets_.pop_back();
        packets_[id] = Packet{};
        return id;
    }
    packets_.emplace_back();
    return static_cast<int>(packets_.size()) - 1;
}

void Simulator::schedule(int delay, const Event& e) {
    wheel_[(now_ + delay) & (static_cast<std::int64_t>(wheel_.size()) - 1)].push_back(e);
}

void Simulator::mark_active(int r) {
    if (!is_active_[r]) {
        is_active_[r] = 1;
        active_.push_back(r);
    }
}

void Simulator::push_flit(int ivc, Flit f) {
    const int cap = params_.buffer;
    if (ivc_[ivc].count >= cap)
        throw InvariantViolation("buffer overflow on input VC " + std::to_string(ivc) + " at cycle " +
                                 std::to_string(now_));
    buf_[static_cast<size_t>(ivc) * cap + (ivc_[ivc].head + ivc_[ivc].count) % cap] = f;
    ++ivc_[ivc].count;
    nonempty_[ivc / V_] |= 1u << (ivc % V_);
    const int r = pc_dst_router_[ivc / V_];
    ++router_flits_[r];
    mark_active(r);
}

void Simulator::deliver() {
    auto& slot = wheel_[now_ & (static_cast<std::int64_t>(wheel_.size()) - 1)];
    for (const auto& e : slot) {
        switch (e.kind) {
        case EventKind::Flit: {
            const int pc = e.target / V_;
            if (pc < C_) --inflight_flits_[e.target];
            else --inj_inflight_flits_[e.target - C_ * V_];
            push_flit(e.target, e.flit);
            break;
        }
        case EventKind::Credit:
            --inflight_credits_[e.target];
            if (++ovc_[e.target].credits > params_.buffer)
                throw InvariantViolation("credit overflow on output VC " + std::to_string(e.target));
            break;
        case EventKind::InjectCredit:
            --inj_inflight_credits_[e.target];
            if (++inj_credits_[e.target] > params_.buffer)
                throw InvariantViolation("credit overflow on terminal port " + std::to_string(e.target));
            break;
        }
    }
    slot.clear();
}

void Simulator::eject_tail(int pkt) {
    Packet& p = packets_[pkt];
    const std::int64_t eject = now_ + term_lat_;
    if (measuring_) {
        latencies_.push_back(static_cast<double>(eject - p.create));
        for (int i = 0; i < kNumHopClasses; ++i) hop_sum_[i] += p.hops[i];
        energy_sum_ += energy_.packet_energy(p.hops);
    }
    if (params_.trace) {
        PacketTrace tr;
        tr.src_chip = p.src_chip;
        tr.dst_chip = p.dst_chip;
        tr.create_cycle = p.create;
        tr.inject_cycle = p.inject;
        tr.eject_cycle = eject;
        tr.hops = p.hops;
        traces_.push_back(tr);
    }
    free_packets_.push_back(pkt);
}

void Simulator::process_router(int r) {
    const int in_begin = in_off_[r], n_in = in_off_[r + 1] - in_begin;
    const int out_begin = out_off_[r], n_out = out_off_[r + 1] - out_begin;
    const int cap = params_.buffer;
    const int L = params_.packet_length;
    const bool switchless = topo_->config().variant == Variant::SwitchLess;

    int ncand = 0;
    std::fill(out_count_.begin(), out_count_.begin() + n_out + 1, 0);
    for (int li = 0; li < n_in; ++li) {
        const int pc = in_ports_[in_begin + li];
        in_cap_[li] = pc_bw_[pc];
        for (std::uint32_t mask = nonempty_[pc]; mask; mask &= mask - 1) {
            const int vc = std::countr_zero(mask);
            const int ivc = pc * V_ + vc;
            if (!ivc_[ivc].valid) {
                const Flit& f = buf_[static_cast<size_t>(ivc) * cap + ivc_[ivc].head];
                if (f.seq != 0)
                    throw InvariantViolation("body flit without a route at router " + std::to_string(r));
                Packet& p = packets_[f.packet];
                const Hop h = routing_->next(p.state, r, p.dst_router);
                if (h.channel < 0) {
                    const int tp = switchless ? r : p.dst_chip;
                    ivc_[ivc].out = static_cast<std::int16_t>(out_local_[C_ + tp]);
                    ivc_[ivc].vc_class = 0;
                } else {
                    ivc_[ivc].out = static_cast<std::int16_t>(out_local_[h.channel]);
                    ivc_[ivc].vc_class = h.next.vc;
                }
                p.next_state = h.next;
                ivc_[ivc].valid = 1;
            }
            cand_out_[ncand] = ivc_[ivc].out;
            cand_ivc_[ncand] = li * V_ + vc;
            ++out_count_[ivc_[ivc].out + 1];
            ++ncand;
        }
    }
    if (ncand == 0) return;
    // Bucket candidates by output; each bucket stays in ascending key order.
    for (int oj = 0; oj < n_out; ++oj) out_count_[oj + 1] += out_count_[oj];
    for (int oj = 0; oj < n_out; ++oj) out_fill_[oj] = out_count_[oj];
    for (int i = 0; i < ncand; ++i) bucket_[out_fill_[cand_out_[i]]++] = cand_ivc_[i];

    const int start = static_cast<int>(now_ % n_out);
    for (int step = 0; step < n_out; ++step) {
        const int oj = (start + step) % n_out;
        const int b_begin = out_count_[oj], b_size = out_count_[oj + 1] - b_begin;
        if (b_size == 0) continue;
        const int pc_out = out_ports_[out_begin + oj];
        out_cap_[oj] = pc_bw_[pc_out];
        const bool eject = pc_out >= C_;
        int& rr = rr_[rr_off_[r] + oj];
        int& hold = hold_[rr_off_[r] + oj];
        // Links interleave flits of different VCs: round-robin over input VCs
        // after the last one served. Ejection delivers whole packets: the packet
        // part-way out keeps priority until its tail, then round-robin moves on
        // to the next input port.
        int first = 0;
        if (!eject) {
            while (first < b_size && bucket_[b_begin + first] <= rr) ++first;
        } else {
            if (hold >= 0) {
                while (first < b_size && bucket_[b_begin + first] != hold) ++first;
            }
            if (hold < 0 || first == b_size) {
                first = 0;
                while (first < b_size && bucket_[b_begin + first] / V_ <= rr) ++first;
            }
        }
        if (first == b_size) first = 0;
        for (int k = 0; k < b_size && out_cap_[oj] > 0; ++k) {
            const int key = bucket_[b_begin + (first + k) % b_size];
            const int li = key / V_;
            const int ivc = in_ports_[in_begin + li] * V_ + key % V_;
            while (out_cap_[oj] > 0 && in_cap_[li] > 0 && ivc_[ivc].count > 0 && ivc_[ivc].valid) {
                Flit f = buf_[static_cast<size_t>(ivc) * cap + ivc_[ivc].head];
                Packet& p = packets_[f.packet];
                const bool head = f.seq == 0, tail = f.seq == L - 1;
                if (!eject) {
                    int ovc = -1;
                    if (head) {
                        // Claim the free lane of the packet's VC class with the most credits.
                        const int base = pc_out * V_ + ivc_[ivc].vc_class * lanes_;
                        for (int l = 0; l < lanes_; ++l) {
                            const int cand = base + l;
                            if (ovc_[cand].owner == -1 && ovc_[cand].credits > 0 &&
                                (ovc < 0 || ovc_[cand].credits > ovc_[ovc].credits))
                                ovc = cand;
                        }
                        if (ovc < 0) break;
                        ivc_[ivc].out_vc = ovc % V_;
                    } else {
                        ovc = pc_out * V_ + ivc_[ivc].out_vc;
                        if (ovc_[ovc].owner != ivc || ovc_[ovc].credits == 0) break;
                    }
                    ovc_[ovc].owner = tail ? -1 : ivc;
                    --ovc_[ovc].credits;
                    ++inflight_flits_[ovc];
                    schedule(pc_lat_[pc_out], {EventKind::Flit, ovc, f});
                    if (head) {
                        p.state = p.next_state;
                        ++p.hops[static_cast<int>(hop_class(topo_->channels()[pc_out].cls))];
                    }
                } else {
                    ++flits_ejected_;
                    if (measuring_) ++window_flits_;
                    if (head && term_lat_ > 0) ++p.hops[static_cast<int>(HopClass::Terminal)];
                }
                if (tail) ivc_[ivc].valid = 0;
                ivc_[ivc].head = static_cast<std::uint16_t>((ivc_[ivc].head + 1) % cap);
                if (--ivc_[ivc].count == 0) nonempty_[ivc / V_] &= ~(1u << (ivc % V_));
                --router_flits_[r];
                const int pc_in = ivc / V_;
                if (pc_in < C_) {
                    ++inflight_credits_[ivc];
                    schedule(pc_lat_[pc_in], {EventKind::Credit, ivc, {}});
                } else if (term_lat_ == 0) {
                    ++inj_credits_[ivc - C_ * V_];
                } else {
                    ++inj_inflight_credits_[ivc - C_ * V_];
                    schedule(term_lat_, {EventKind::InjectCredit, ivc - C_ * V_, {}});
                }
                if (eject && tail) eject_tail(f.packet);
                --out_cap_[oj];
                --in_cap_[li];
                if (!eject) {
                    rr = key;
                } else if (tail) {
                    rr = li;
                    if (hold == key) hold = -1;
                } else if (hold < 0) {
                    hold = key;
                }
            }
        }
    }
}

void Simulator::inject_port(int tp) {
    if (inj_packet_[tp] < 0) {
        int dst_chip = -1, dst_router = -1, inter_w = -1;
        std::int64_t create = 0;
        const int src_chip = tp_chip_[tp];
        if (!manual_queue_[tp].empty()) {
            const Manual m = manual_queue_[tp].front();
            manual_queue_[tp].pop_front();
            create = m.create;
            dst_chip = m.dst_chip;
            dst_router = m.dst_router;
            inter_w = m.inter_w;
        } else if (!src_queue_[tp].empty()) {
            create = src_queue_[tp].front();
            src_queue_[tp].pop_front();
            dst_chip = traffic_->destination(src_chip, rng_);
            inter_w = -2;
        } else {
            return;
        }
        const auto& routers = topo_->chips()[dst_chip].routers;
        if (dst_router < 0)
            dst_router = routers.size() == 1
                             ? routers.front()
                             : routers[std::uniform_int_distribution<int>(0, static_cast<int>(routers.size()) - 1)(rng_)];
        const int src_router = tp_router_[tp];
        if (inter_w == -2)
            inter_w = select_intermediate_wgroup(topo_->routers()[src_router].addr.w,
                                                 topo_->routers()[dst_router].addr.w, topo_->num_wgroups(),
                                                 routing_->mode(), rng_);
        const int id = alloc_packet();
        Packet& p = packets_[id];
        p.src_chip = src_chip;
        p.dst_chip = dst_chip;
        p.dst_router = dst_router;
        p.create = create;
        p.inject = now_;
        p.state = routing_->initial(src_router, dst_router, inter_w);
        if (term_lat_ > 0) ++p.hops[static_cast<int>(HopClass::Terminal)];
        inj_packet_[tp] = id;
        inj_seq_[tp] = 0;
        // Injection buffers act as virtual output queues keyed by the first hop.
        const Hop first = routing_->next(p.state, src_router, dst_router);
        const int out = first.channel < 0 ? out_local_[C_ + (switchless_ ? src_router : dst_chip)]
                                          : out_local_[first.channel];
        inj_vc_[tp] = out % V_;
    }
    const int slot = tp * V_ + inj_vc_[tp];
    if (inj_credits_[slot] == 0) return;
    --inj_credits_[slot];
    const Flit f{inj_packet_[tp], inj_seq_[tp]};
    const int ivc = C_ * V_ + slot;
    if (term_lat_ == 0) {
        push_flit(ivc, f);
    } else {
        ++inj_inflight_flits_[slot];
        schedule(term_lat_, {EventKind::Flit, ivc, f});
    }
    ++flits_injected_;
    if (++inj_seq_[tp] == params_.packet_length) inj_packet_[tp] = -1;
}

void Simulator::create_and_inject() {
    if (creating_ && params_.rate > 0) {
        const double per_cycle = params_.rate / params_.packet_length;
        const int whole = static_cast<int>(std::floor(per_cycle));
        const double frac = per_cycle - whole;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const int nchips = static_cast<int>(chip_tps_.size());
        for (int c = 0; c < nchips; ++c) {
            if (!traffic_->is_active(c)) continue;
            int n = whole;
            if (frac > 0 && u(rng_) < frac) ++n;
            for (int i = 0; i < n; ++i) {
                const auto& tps = chip_tps_[c];
                const int tp = tps[chip_rr_[c]++ % tps.size()];
                src_queue_[tp].push_back(now_);
            }
        }
    }
    for (int tp = 0; tp < T_; ++tp)
        if (inj_packet_[tp] >= 0 || !src_queue_[tp].empty() || !manual_queue_[tp].empty()) inject_port(tp);
}

void Simulator::step() {
    deliver();
    for (size_t i = 0; i < active_.size(); ++i) process_router(active_[i]);
    size_t keep = 0;
    for (int r : active_) {
        if (router_flits_[r] > 0) active_[keep++] = r;
        else is_active_[r] = 0;
    }
    active_.resize(keep);
    create_and_inject();
    if (params_.check_invariants) check_invariants();
    ++now_;
}

void Simulator::enqueue_packet(int src_chip, int dst_chip, int dst_router, int inter_w) {
    if (src_chip == dst_chip) throw std::invalid_argument("enqueue_packet: source equals destination");
    const auto& tps = chip_tps_.at(src_chip);
    const int tp = tps[chip_rr_[src_chip]++ % tps.size()];
    manual_queue_[tp].push_back({now_, dst_chip, dst_router, inter_w});
}

std::int64_t Simulator::packets_waiting() const {
    std::int64_t n = 0;
    for (int tp = 0; tp < T_; ++tp) n += src_queue_[tp].size() + manual_queue_[tp].size();
    return n;
}

RunStats Simulator::run() {
    for (std::int64_t i = 0; i < params_.warmup; ++i) step();
    measuring_ = true;
    window_flits_ = 0;
    latencies_.clear();
    hop_sum_ = {};
    energy_sum_ = 0;
    const std::int64_t waiting_before = packets_waiting();
    for (std::int64_t i = 0; i < params_.measure; ++i) step();
    measuring_ = false;

    RunStats s;
    s.offered = params_.rate;
    s.active_sources = traffic_->num_active_sources();
    if (s.active_sources > 0)
        s.accepted = static_cast<double>(window_flits_) / (static_cast<double>(params_.measure) * s.active_sources);
    s.packets = static_cast<std::int64_t>(latencies_.size());
    if (!latencies_.empty()) {
        std::vector<double> lat = latencies_;
        std::sort(lat.begin(), lat.end());
        s.lat_mean = std::accumulate(lat.begin(), lat.end(), 0.0) / static_cast<double>(lat.size());
        const size_t n = lat.size();
        s.lat_median = n % 2 ? lat[n / 2] : 0.5 * (lat[n / 2 - 1] + lat[n / 2]);
        s.lat_p99 = lat[std::min(n - 1, static_cast<size_t>(std::ceil(0.99 * static_cast<double>(n))) - 1)];
        for (int i = 0; i < kNumHopClasses; ++i) s.mean_hops[i] = hop_sum_[i] / static_cast<double>(n);
        s.energy_pj_per_bit = energy_sum_ / static_cast<double>(n);
    }
    const double created = params_.rate / params_.packet_length * static_cast<double>(params_.measure) *
                           s.active_sources;
    s.stalled = static_cast<double>(packets_waiting() - waiting_before) > 0.02 * created + s.active_sources;
    return s;
}

bool Simulator::drain_check(std::int64_t horizon) {
    creating_ = false;
    for (auto& q : src_queue_) q.clear();
    for (auto& q : manual_queue_) q.clear();
    auto busy = [&] {
        if (flits_in_network() > 0) return true;
        return std::any_of(inj_packet_.begin(), inj_packet_.end(), [](int p) { return p >= 0; });
    };
    for (std::int64_t i = 0; i < horizon && busy(); ++i) step();
    return !busy();
}

void Simulator::check_invariants() const {
    const int cap = params_.buffer;
    std::int64_t in_buffers = 0, in_flight = 0;
    for (int ovc = 0; ovc < C_ * V_; ++ovc) {
        const int sum = ovc_[ovc].credits + ivc_[ovc].count + inflight_flits_[ovc] + inflight_credits_[ovc];
        if (sum != cap || ovc_[ovc].credits < 0)
            throw InvariantViolation("credit accounting broken on channel " + std::to_string(ovc / V_) + " vc " +
                                     std::to_string(ovc % V_) + " at cycle " + std::to_string(now_));
        in_buffers += ivc_[ovc].count;
        in_flight += inflight_flits_[ovc];
    }
    for (int slot = 0; slot < T_ * V_; ++slot) {
        const int ivc = C_ * V_ + slot;
        const int sum =
            inj_credits_[slot] + ivc_[ivc].count + inj_inflight_flits_[slot] + inj_inflight_credits_[slot];
        if (sum != cap || inj_credits_[slot] < 0)
            throw InvariantViolation("credit accounting broken on terminal port " + std::to_string(slot / V_));
        in_buffers += ivc_[ivc].count;
        in_flight += inj_inflight_flits_[slot];
    }
    if (in_buffers + in_flight != flits_injected_ - flits_ejected_)
        throw InvariantViolation("flit conservation broken at cycle " + std::to_string(now_) + ": " +
                                 std::to_string(in_buffers + in_flight) + " in network, " +
                                 std::to_string(flits_injected_ - flits_ejected_) + " expected");
    const std::int64_t counted = std::accumulate(router_flits_.begin(), router_flits_.end(), std::int64_t{0});
    if (counted != in_buffers) throw InvariantViolation("router flit counters disagree with buffers");
}

} // namespace sldf
