#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sldf {

enum class PortKind : std::uint8_t { LocalDown, Global, LocalUp, Unused };
enum class Side : std::uint8_t { Top, Right, Bottom, Left };

std::string_view to_string(PortKind k);
std::string_view to_string(Side s);
PortKind port_kind_from_string(std::string_view s);
Side side_from_string(std::string_view s);

/// Router and port labels of one C-group, plus where each port attaches.
///
/// Router positions are row-major (`pos = y * grid + x`). Interior routers
/// take the lowest labels in row-major order; perimeter routers follow in a
/// clockwise walk that starts at corner (0,0) and ends at (0,1). Port `i`
/// carries label `grid*grid + i`, and port indices follow the same walk, so
/// port order, host order and label order agree.
struct CGroupLabeling {
    int grid = 1;
    int k = 0;
    std::vector<int> router_label;  // by grid position
    std::vector<int> port_label;    // by port index
    std::vector<int> port_host;     // grid position of the hosting router
    std::vector<Side> port_side;
    std::vector<int> port_offset;
    std::vector<int> walk;          // perimeter positions in walk order

    int num_routers() const { return grid * grid; }
    int port_base() const { return grid * grid; }
    /// Highest-labelled router; every other router has a higher neighbour.
    int apex() const;
    /// Position holding `label`, or -1.
    int position_of_label(int label) const;
};

/// Builds the labeling for a grid x grid router mesh with k perimeter ports
/// (k/4 per side). Throws std::invalid_argument if k is not a positive
/// multiple of 4 and LabelingError if the result fails verify_labeling.
CGroupLabeling label_ports(int grid, int k);

/// Grid neighbours of `pos` (up to four).
std::vector<int> grid_neighbors(int grid, int pos);

/// Shortest up*/down*-legal route between two routers of the C-group under
/// the labeling (any number of up hops, then only down hops). Ties resolve
/// to the neighbour with the lowest position. Returns the visited positions
/// including both ends, or nullopt when no legal route exists.
std::optional<std::vector<int>> updown_route(const CGroupLabeling& lab, int from, int to);

/// True if a strictly increasing-label path leads from `from` to `to`.
bool up_only_path_exists(const CGroupLabeling& lab, int from, int to);

struct LabelingReport {
    bool ok = true;
    std::string condition;  // "c1" or "c2" on failure
    int first = -1;         // port index (c1: port, c2: lower port)
    int second = -1;        // c1: core position, c2: higher port
    std::string witness;
};

/// Exhaustive check of the two port conditions.
///  c1: every port host and every core are joined, both ways, by a produced
///      up*/down*-legal route.
///  c2: for every port pair with label(i) < label(j), an up-only path leads
///      from host(i) to host(j).
LabelingReport verify_labeling(const CGroupLabeling& lab);

} // namespace sldf
