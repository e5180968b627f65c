#include "sldf/traffic.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "sldf/errors.hpp"

namespace sldf {

std::string_view to_string(PatternKind p) {
    switch (p) {
    case PatternKind::Uniform: return "uniform";
    case PatternKind::BitReverse: return "bitrev";
    case PatternKind::BitShuffle: return "shuffle";
    case PatternKind::BitTranspose: return "transpose";
    case PatternKind::Hotspot: return "hotspot";
    case PatternKind::WorstCase: return "worstcase";
    case PatternKind::AllReduceUni: return "allreduce-uni";
    case PatternKind::AllReduceBi: return "allreduce-bi";
    }
    return "?";
}

std::string_view to_string(Scope s) {
    switch (s) {
    case Scope::IntraCGroup: return "cgroup";
    case Scope::IntraWGroup: return "wgroup";
    case Scope::Global: return "global";
    }
    return "?";
}

PatternKind pattern_from_string(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(PatternKind::AllReduceBi); ++i) {
        auto p = static_cast<PatternKind>(i);
        if (to_string(p) == s) return p;
    }
    throw std::invalid_argument("unknown pattern: " + std::string(s));
}

Scope scope_from_string(std::string_view s) {
    for (auto v : {Scope::IntraCGroup, Scope::IntraWGroup, Scope::Global})
        if (to_string(v) == s) return v;
    throw std::invalid_argument("unknown scope: " + std::string(s));
}

std::uint32_t bit_reverse(std::uint32_t x, int bits) {
    std::uint32_t y = 0;
    for (int i = 0; i < bits; ++i) y |= ((x >> i) & 1u) << (bits - 1 - i);
    return y;
}

namespace {

std::uint32_t rotl(std::uint32_t x, int bits, int by) {
    if (bits == 0) return x;
    by %= bits;
    const std::uint32_t mask = bits >= 32 ? ~0u : ((1u << bits) - 1);
    return ((x << by) | (x >> (bits - by))) & mask;
}

} // namespace

std::uint32_t bit_shuffle(std::uint32_t x, int bits) { return rotl(x, bits, 1); }

std::uint32_t bit_transpose(std::uint32_t x, int bits) { return rotl(x, bits, (bits + 1) / 2); }

Traffic::Traffic(const Topology& topo, TrafficSpec spec) : spec_(std::move(spec)) {
    num_chips_ = static_cast<int>(topo.chips().size());
    num_wgroups_ = topo.num_wgroups();
    chips_per_wgroup_ = topo.chips_per_cgroup() * topo.cgroups_per_wgroup();
    switch (spec_.scope) {
    case Scope::IntraCGroup: block_ = topo.chips_per_cgroup(); break;
    case Scope::IntraWGroup: block_ = chips_per_wgroup_; break;
    case Scope::Global: block_ = num_chips_; break;
    }
    active_.assign(num_chips_, 1);

    const auto kind = spec_.kind;
    const bool bitperm =
        kind == PatternKind::BitReverse || kind == PatternKind::BitShuffle || kind == PatternKind::BitTranspose;
    if (bitperm) {
        if (!std::has_single_bit(static_cast<unsigned>(block_)) && !spec_.pad)
            throw PatternError(std::string(to_string(kind)) + " needs a power-of-two population, got " +
                               std::to_string(block_));
        bits_ = std::countr_zero(std::bit_ceil(static_cast<unsigned>(block_)));
    }
    if (kind == PatternKind::Hotspot) {
        if (spec_.hotspot_groups.empty()) throw PatternError("hotspot needs at least one W-group");
        for (int w : spec_.hotspot_groups)
            if (w < 0 || w >= num_wgroups_) throw PatternError("hotspot W-group " + std::to_string(w) + " out of range");
        std::sort(spec_.hotspot_groups.begin(), spec_.hotspot_groups.end());
        spec_.hotspot_groups.erase(std::unique(spec_.hotspot_groups.begin(), spec_.hotspot_groups.end()),
                                   spec_.hotspot_groups.end());
        if (spec_.hotspot_groups.size() * chips_per_wgroup_ < 2) throw PatternError("hotspot set has one chip");
        for (int c = 0; c < num_chips_; ++c)
            active_[c] = std::binary_search(spec_.hotspot_groups.begin(), spec_.hotspot_groups.end(),
                                            c / chips_per_wgroup_);
    } else if (kind == PatternKind::WorstCase) {
        if (num_wgroups_ < 2) throw PatternError("worst-case traffic needs at least 2 W-groups");
    } else if (block_ < 2) {
        throw PatternError(std::string(to_string(kind)) + " needs at least 2 chips per block");
    }

    if (bitperm) {
        for (int c = 0; c < num_chips_; ++c) {
            const auto rel = static_cast<std::uint32_t>(c % block_);
            std::uint32_t d = 0;
            if (kind == PatternKind::BitReverse) d = bit_reverse(rel, bits_);
            else if (kind == PatternKind::BitShuffle) d = bit_shuffle(rel, bits_);
            else d = bit_transpose(rel, bits_);
            if (d == rel || d >= static_cast<std::uint32_t>(block_)) active_[c] = 0;
        }
    }
    const bool blockwise = kind != PatternKind::Hotspot && kind != PatternKind::WorstCase;
    if (spec_.active_blocks < 0) throw PatternError("active_blocks must be >= 0");
    if (blockwise && spec_.active_blocks > 0) {
        const int limit = std::min(num_chips_, spec_.active_blocks * block_);
        for (int c = limit; c < num_chips_; ++c) active_[c] = 0;
    }
    num_active_ = static_cast<int>(std::count(active_.begin(), active_.end(), 1));
}

int Traffic::destination(int src, std::mt19937_64& rng) const {
    const int base = src - src % block_;
    const auto rel = static_cast<std::uint32_t>(src - base);
    auto uniform_except = [&](int lo, int size, int self) {
        int d = std::uniform_int_distribution<int>(0, size - 2)(rng) + lo;
        if (d >= self) ++d;
        return d;
    };
    switch (spec_.kind) {
    case PatternKind::Uniform: return uniform_except(base, block_, src);
    case PatternKind::BitReverse: return base + static_cast<int>(bit_reverse(rel, bits_));
    case PatternKind::BitShuffle: return base + static_cast<int>(bit_shuffle(rel, bits_));
    case PatternKind::BitTranspose: return base + static_cast<int>(bit_transpose(rel, bits_));
    case PatternKind::Hotspot: {
        const int n = static_cast<int>(spec_.hotspot_groups.size()) * chips_per_wgroup_;
        const int self = std::lower_bound(spec_.hotspot_groups.begin(), spec_.hotspot_groups.end(),
                                          src / chips_per_wgroup_) - spec_.hotspot_groups.begin();
        const int self_idx = self * chips_per_wgroup_ + src % chips_per_wgroup_;
        const int idx = uniform_except(0, n, self_idx);
        return spec_.hotspot_groups[idx / chips_per_wgroup_] * chips_per_wgroup_ + idx % chips_per_wgroup_;
    }
    case PatternKind::WorstCase: {
        const int w = (src / chips_per_wgroup_ + 1) % num_wgroups_;
        return w * chips_per_wgroup_ + std::uniform_int_distribution<int>(0, chips_per_wgroup_ - 1)(rng);
    }
    case PatternKind::AllReduceUni: return base + static_cast<int>((rel + 1) % block_);
    case PatternKind::AllReduceBi: {
        const bool fwd = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
        return base + static_cast<int>((rel + (fwd ? 1 : block_ - 1)) % block_);
    }
    }
    throw PatternError("unknown pattern");
}

} // namespace sldf
