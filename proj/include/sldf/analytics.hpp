#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "sldf/topology.hpp"

namespace sldf {

/// Off-chip hop counts on a worst-case minimal path.
struct DiameterTerms {
    int global = 0;       // H_g
    int local = 0;        // H_l
    int short_reach = 0;  // H_sr
    int terminal = 0;     // H_l*, chip-to-switch links
    bool operator==(const DiameterTerms&) const = default;
};

struct BoundsReport {
    double t_global = 0;  // flits/cycle/chip
    double t_local = 0;
    double t_cg = 0;
    int b_cg = 0;         // full-duplex links across a C-group bisection
    DiameterTerms diameter;
};

/// Chip count ab * m^2 * g. SwitchBased: terminals per switch * switches.
std::int64_t analytic_scale(const TopoConfig& config);

BoundsReport analytic_bounds(const TopoConfig& config);

/// (n, ab) = (3m, 2m^2).
std::pair<int, int> balanced_config(int m);

/// "H_g + 2H_l + 30H_sr" style rendering.
std::string format_diameter(const DiameterTerms& d);

} // namespace sldf
