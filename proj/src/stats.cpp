#include "sldf/stats.hpp"

#include <stdexcept>

namespace sldf {

HopClass hop_class(ChannelClass c) {
    switch (c) {
    case ChannelClass::GlobalLongReach: return HopClass::Global;
    case ChannelClass::LocalLongReach: return HopClass::Local;
    case ChannelClass::TerminalLink: return HopClass::Terminal;
    case ChannelClass::ShortReach: return HopClass::ShortReach;
    case ChannelClass::OnChip: return HopClass::OnChip;
    }
    return HopClass::OnChip;
}

double EnergyModel::packet_energy(const HopCounts& h) const {
    const auto at = [&](HopClass c) { return h[static_cast<int>(c)]; };
    return long_reach * (at(HopClass::Global) + at(HopClass::Local) + at(HopClass::Terminal)) +
           intra_cgroup * (at(HopClass::ShortReach) + at(HopClass::OnChip));
}

double energy_per_transmission(const std::vector<PacketTrace>& traces, const EnergyModel& model) {
    if (traces.empty()) throw std::invalid_argument("energy_per_transmission: empty trace");
    double sum = 0;
    for (const auto& t : traces) sum += model.packet_energy(t.hops);
    return sum / static_cast<double>(traces.size());
}

} // namespace sldf
