#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "sldf/topology.hpp"

namespace sldf {

enum class PatternKind : std::uint8_t {
    Uniform,
    BitReverse,
    BitShuffle,
    BitTranspose,
    Hotspot,
    WorstCase,
    AllReduceUni,
    AllReduceBi,
};

enum class Scope : std::uint8_t { IntraCGroup, IntraWGroup, Global };

std::string_view to_string(PatternKind p);
std::string_view to_string(Scope s);
PatternKind pattern_from_string(std::string_view s);
Scope scope_from_string(std::string_view s);

struct TrafficSpec {
    PatternKind kind = PatternKind::Uniform;
    Scope scope = Scope::Global;
    std::vector<int> hotspot_groups{0, 1, 2, 3};
    /// Number of scope blocks (C-groups or W-groups) with active sources; 0 = all.
    int active_blocks = 0;
    /// Bit permutations on a non-power-of-two block: index over ceil(log2)
    /// bits and silence sources whose image falls outside the block.
    bool pad = false;
    bool operator==(const TrafficSpec&) const = default;
};

/// Bit permutations on a B-bit index. Transpose with odd B rotates by ceil(B/2).
std::uint32_t bit_reverse(std::uint32_t x, int bits);
std::uint32_t bit_shuffle(std::uint32_t x, int bits);
std::uint32_t bit_transpose(std::uint32_t x, int bits);

/// Destination generator over the chip population of one topology.
///
/// Chips are numbered in label order (W-group, C-group, snake position), so
/// consecutive chips of a C-group are mesh neighbours. Scope blocks are
/// contiguous id ranges. Permutation fixed points and chips outside the
/// active set are silent sources.
class Traffic {
public:
    /// Throws PatternError when the pattern cannot be applied to the population.
    Traffic(const Topology& topo, TrafficSpec spec);

    const TrafficSpec& spec() const { return spec_; }
    int num_chips() const { return num_chips_; }
    int block_size() const { return block_; }
    bool is_active(int chip) const { return active_[chip] != 0; }
    int num_active_sources() const { return num_active_; }

    /// Destination chip for one packet from an active source.
    int destination(int src_chip, std::mt19937_64& rng) const;

private:
    TrafficSpec spec_;
    int num_chips_ = 0;
    int block_ = 1;
    int bits_ = 0;
    int chips_per_wgroup_ = 1;
    int num_wgroups_ = 1;
    std::vector<char> active_;
    int num_active_ = 0;
};

} // namespace sldf
