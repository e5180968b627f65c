#include "sldf/cdg.hpp"

#include <algorithm>
#include <sstream>

namespace sldf {

ChannelDependencyGraph ChannelDependencyGraph::from_edges(int num_channels, int num_vcs,
                                                          std::vector<std::pair<int, int>> edges) {
    ChannelDependencyGraph g;
    g.num_channels = num_channels;
    g.num_vcs = num_vcs;
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.offsets.assign(g.num_vertices() + 1, 0);
    for (auto [a, b] : edges) ++g.offsets[a + 1];
    for (int i = 0; i < g.num_vertices(); ++i) g.offsets[i + 1] += g.offsets[i];
    g.targets.reserve(edges.size());
    for (auto [a, b] : edges) g.targets.push_back(b);
    return g;
}

ChannelDependencyGraph build_cdg(const Routing& routing) {
    const auto& topo = routing.topology();
    const int nv = routing.num_vcs();
    const int nr = static_cast<int>(topo.routers().size());
    const int g = topo.num_wgroups();
    std::vector<std::pair<int, int>> edges;
    std::int64_t paths = 0;
    auto walk = [&](int s, int d, int inter) {
        const auto p = routing.path(s, d, inter);
        ++paths;
        for (size_t i = 1; i < p.size(); ++i)
            edges.emplace_back(p[i - 1].channel * nv + p[i - 1].vc, p[i].channel * nv + p[i].vc);
    };
    for (int s = 0; s < nr; ++s) {
        const int ws = topo.routers()[s].addr.w;
        for (int d = 0; d < nr; ++d) {
            if (s == d) continue;
            const int wd = topo.routers()[d].addr.w;
            const auto cands = intermediate_candidates(ws, wd, g, routing.mode());
            if (cands.empty()) walk(s, d, -1);
            for (int w : cands) walk(s, d, w);
        }
        if (edges.size() > (1u << 24)) {
            std::sort(edges.begin(), edges.end());
            edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        }
    }
    auto cdg = ChannelDependencyGraph::from_edges(static_cast<int>(topo.channels().size()), nv, std::move(edges));
    cdg.paths = paths;
    return cdg;
}

DeadlockReport check_deadlock_free(const ChannelDependencyGraph& cdg) {
    DeadlockReport rep;
    const int n = cdg.num_vertices();
    std::vector<std::uint8_t> color(n, 0);  // 0 new, 1 on stack, 2 done
    std::vector<int> parent(n, -1);
    std::vector<std::pair<int, int>> stack;  // vertex, next edge offset
    for (int root = 0; root < n; ++root) {
        if (color[root]) continue;
        stack.push_back({root, cdg.offsets[root]});
        color[root] = 1;
        while (!stack.empty()) {
            auto& [v, e] = stack.back();
            if (e == cdg.offsets[v + 1]) {
                color[v] = 2;
                stack.pop_back();
                continue;
            }
            const int u = cdg.targets[e++];
            if (color[u] == 0) {
                color[u] = 1;
                parent[u] = v;
                stack.push_back({u, cdg.offsets[u]});
            } else if (color[u] == 1) {
                rep.acyclic = false;
                std::vector<int> cyc;
                for (int x = v; x != u; x = parent[x]) cyc.push_back(x);
                cyc.push_back(u);
                std::reverse(cyc.begin(), cyc.end());
                for (int x : cyc) rep.cycle.push_back({x / cdg.num_vcs, x % cdg.num_vcs});
                return rep;
            }
        }
    }
    return rep;
}

std::string format_cycle(const Topology& topo, const DeadlockReport& rep) {
    std::ostringstream os;
    auto addr = [&](int r) {
        const auto& a = topo.routers()[r].addr;
        std::ostringstream s;
        s << "(" << a.w << "," << a.c << "," << a.label << ")";
        return s.str();
    };
    for (const auto& w : rep.cycle) {
        const auto& ch = topo.channels()[w.channel];
        os << "channel " << w.channel << " vc " << w.vc << ' ' << addr(ch.src) << "->" << addr(ch.dst) << ' '
           << to_string(ch.cls) << '\n';
    }
    return os.str();
}

} // namespace sldf
