#include "sldf/analytics.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace sldf {

std::int64_t analytic_scale(const TopoConfig& config) {
    if (config.variant == Variant::SwitchBased)
        return std::int64_t{config.sw_ports.terminal} * config.ab() * config.g();
    return std::int64_t{config.ab()} * config.m * config.m * config.g();
}

BoundsReport analytic_bounds(const TopoConfig& config) {
    BoundsReport b;
    const double m2 = static_cast<double>(config.m) * config.m;
    if (config.variant == Variant::SwitchBased) {
        const double t = config.sw_ports.terminal;
        // One terminal link per chip caps every rate at 1.
        b.t_global = std::min(1.0, config.h() / t);
        b.t_local = std::min(1.0, config.ab() / t);
        b.t_cg = 1.0;
        b.b_cg = 0;
        b.diameter = {1, 2, 0, 2};
        return b;
    }
    b.t_global = config.h() / m2;
    b.t_local = config.ab() / m2;
    b.t_cg = static_cast<double>(config.n) / config.m;
    b.b_cg = config.n * config.m / 2;
    b.diameter = {1, 2, 8 * config.m - 2};
    return b;
}

std::pair<int, int> balanced_config(int m) {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    return {3 * m, 2 * m * m};
}

std::string format_diameter(const DiameterTerms& d) {
    std::ostringstream os;
    auto term = [&](int n, const char* sym, bool first) {
        if (!first) os << " + ";
        if (n != 1) os << n;
        os << sym;
    };
    term(d.global, "H_g", true);
    term(d.local, "H_l", false);
    if (d.terminal) term(d.terminal, "H_l*", false);
    if (d.short_reach) term(d.short_reach, "H_sr", false);
    return os.str();
}

} // namespace sldf
