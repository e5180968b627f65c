#include "sldf/labeling.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "sldf/errors.hpp"

namespace sldf {

std::string_view to_string(PortKind k) {
    switch (k) {
    case PortKind::LocalDown: return "local_down";
    case PortKind::Global: return "global";
    case PortKind::LocalUp: return "local_up";
    case PortKind::Unused: return "unused";
    }
    return "?";
}

std::string_view to_string(Side s) {
    switch (s) {
    case Side::Top: return "top";
    case Side::Right: return "right";
    case Side::Bottom: return "bottom";
    case Side::Left: return "left";
    }
    return "?";
}

PortKind port_kind_from_string(std::string_view s) {
    for (auto k : {PortKind::LocalDown, PortKind::Global, PortKind::LocalUp, PortKind::Unused})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown port kind: " + std::string(s));
}

Side side_from_string(std::string_view s) {
    for (auto v : {Side::Top, Side::Right, Side::Bottom, Side::Left})
        if (to_string(v) == s) return v;
    throw std::invalid_argument("unknown side: " + std::string(s));
}

int CGroupLabeling::apex() const {
    return static_cast<int>(std::max_element(router_label.begin(), router_label.end()) - router_label.begin());
}

int CGroupLabeling::position_of_label(int label) const {
    auto it = std::find(router_label.begin(), router_label.end(), label);
    return it == router_label.end() ? -1 : static_cast<int>(it - router_label.begin());
}

std::vector<int> grid_neighbors(int grid, int pos) {
    std::vector<int> out;
    out.reserve(4);
    const int x = pos % grid, y = pos / grid;
    if (x + 1 < grid) out.push_back(pos + 1);
    if (x > 0) out.push_back(pos - 1);
    if (y > 0) out.push_back(pos - grid);
    if (y + 1 < grid) out.push_back(pos + grid);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

std::vector<int> perimeter_walk(int grid) {
    if (grid == 1) return {0};
    std::vector<int> walk;
    walk.reserve(4 * (grid - 1));
    for (int x = 0; x < grid - 1; ++x) walk.push_back(x);                          // top, left to right
    for (int y = 0; y < grid - 1; ++y) walk.push_back(y * grid + grid - 1);        // right, downwards
    for (int x = grid - 1; x > 0; --x) walk.push_back((grid - 1) * grid + x);      // bottom, right to left
    for (int y = grid - 1; y > 0; --y) walk.push_back(y * grid);                   // left, upwards
    return walk;
}

} // namespace

CGroupLabeling label_ports(int grid, int k) {
    if (grid < 1) throw std::invalid_argument("grid must be >= 1");
    if (k <= 0 || k % 4 != 0) throw std::invalid_argument("port count must be a positive multiple of 4");

    CGroupLabeling lab;
    lab.grid = grid;
    lab.k = k;
    lab.walk = perimeter_walk(grid);
    lab.router_label.assign(grid * grid, -1);

    int next = 0;
    for (int y = 1; y + 1 < grid; ++y)
        for (int x = 1; x + 1 < grid; ++x) lab.router_label[y * grid + x] = next++;
    for (int pos : lab.walk) lab.router_label[pos] = next++;

    const int per_side = k / 4;
    const int side_len = std::max(grid - 1, 1);
    for (int s = 0; s < 4; ++s) {
        for (int j = 0; j < per_side; ++j) {
            // ceil((j+1) * side_len / per_side) - 1: the last port of a side
            // lands on its last router, so port k-1 sits on the apex.
            const int offset = grid == 1 ? 0 : ((j + 1) * side_len + per_side - 1) / per_side - 1;
            const int walk_idx = grid == 1 ? 0 : s * side_len + offset;
            const int index = s * per_side + j;
            lab.port_label.push_back(lab.port_base() + index);
            lab.port_host.push_back(lab.walk[walk_idx]);
            lab.port_side.push_back(static_cast<Side>(s));
            lab.port_offset.push_back(offset);
        }
    }

    auto report = verify_labeling(lab);
    if (!report.ok) throw LabelingError("label_ports produced an invalid labeling: " + report.witness);
    return lab;
}

std::optional<std::vector<int>> updown_route(const CGroupLabeling& lab, int from, int to) {
    if (from == to) return std::vector<int>{from};
    const int n = lab.num_routers();
    // State = pos * 2 + descending.
    std::vector<int> parent(2 * n, -2);
    std::deque<int> q{from * 2};
    parent[from * 2] = -1;
    int found = -1;
    while (!q.empty() && found < 0) {
        const int s = q.front();
        q.pop_front();
        const int v = s / 2;
        const bool desc = s % 2;
        for (int u : grid_neighbors(lab.grid, v)) {
            const bool up = lab.router_label[v] < lab.router_label[u];
            if (up && desc) continue;
            const int ns = u * 2 + (up ? 0 : 1);
            if (parent[ns] != -2) continue;
            parent[ns] = s;
            if (u == to) {
                found = ns;
                break;
            }
            q.push_back(ns);
        }
    }
    if (found < 0) return std::nullopt;
    std::vector<int> path;
    for (int s = found; s >= 0; s = parent[s]) path.push_back(s / 2);
    std::reverse(path.begin(), path.end());
    return path;
}

bool up_only_path_exists(const CGroupLabeling& lab, int from, int to) {
    if (from == to) return true;
    std::vector<char> seen(lab.num_routers(), 0);
    std::vector<int> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int u : grid_neighbors(lab.grid, v)) {
            if (seen[u] || lab.router_label[u] <= lab.router_label[v]) continue;
            if (u == to) return true;
            seen[u] = 1;
            stack.push_back(u);
        }
    }
    return false;
}

LabelingReport verify_labeling(const CGroupLabeling& lab) {
    LabelingReport rep;
    const int n = lab.num_routers();

    for (int p = 0; p < lab.k; ++p) {
        const int host = lab.port_host[p];
        for (int core = 0; core < n; ++core) {
            if (!updown_route(lab, host, core) || !updown_route(lab, core, host)) {
                std::ostringstream os;
                os << "c1: port " << p << " (label " << lab.port_label[p] << ", host " << host
                   << ") has no legal route to/from core " << core << " (label " << lab.router_label[core] << ")";
                return {false, "c1", p, core, os.str()};
            }
        }
    }

    std::vector<int> order(lab.k);
    for (int i = 0; i < lab.k; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int x, int y) { return lab.port_label[x] < lab.port_label[y]; });
    for (int a = 0; a < lab.k; ++a) {
        for (int b = a + 1; b < lab.k; ++b) {
            const int i = order[a], j = order[b];
            if (!up_only_path_exists(lab, lab.port_host[i], lab.port_host[j])) {
                std::ostringstream os;
                os << "c2: no up-only path from port " << i << " (label " << lab.port_label[i] << ", host "
                   << lab.port_host[i] << ") to port " << j << " (label " << lab.port_label[j] << ", host "
                   << lab.port_host[j] << ")";
                return {false, "c2", i, j, os.str()};
            }
        }
    }
    return rep;
}

} // namespace sldf
