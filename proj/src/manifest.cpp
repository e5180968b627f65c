#include "sldf/manifest.hpp"

#include <charconv>
#include <sstream>
#include <vector>

#include "sldf/errors.hpp"

namespace sldf {

namespace {

constexpr std::string_view kHeader = "# sldf-topology v1";

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

int to_int(std::string_view s, int line) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ParseError(line, "expected integer, got '" + std::string(s) + "'");
    return v;
}

template <class F>
auto guarded(int line, F&& f) {
    try {
        return f();
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(line, e.what());
    }
}

} // namespace

std::string format_topo_config_line(const TopoConfig& c) {
    std::ostringstream os;
    os << "config variant=" << to_string(c.variant) << " a=" << c.a << " b=" << c.b << " m=" << c.m << " n=" << c.n
       << " r=" << c.r << " h=";
    if (c.h_override) os << *c.h_override; else os << '-';
    os << " g=";
    if (c.g_override) os << *c.g_override; else os << '-';
    os << " intra_bw=" << c.intra_bw << " sw=" << c.sw_ports.terminal << ',' << c.sw_ports.local << ','
       << c.sw_ports.global;
    return os.str();
}

TopoConfig parse_topo_config_line(std::string_view line, int line_no) {
    auto tok = split_ws(line);
    if (tok.empty() || tok[0] != "config") throw ParseError(line_no, "expected config record");
    TopoConfig c;
    for (size_t i = 1; i < tok.size(); ++i) {
        const auto eq = tok[i].find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
        const auto key = tok[i].substr(0, eq);
        const auto val = tok[i].substr(eq + 1);
        if (key == "variant") c.variant = guarded(line_no, [&] { return variant_from_string(val); });
        else if (key == "a") c.a = to_int(val, line_no);
        else if (key == "b") c.b = to_int(val, line_no);
        else if (key == "m") c.m = to_int(val, line_no);
        else if (key == "n") c.n = to_int(val, line_no);
        else if (key == "r") c.r = to_int(val, line_no);
        else if (key == "h") { if (val != "-") c.h_override = to_int(val, line_no); }
        else if (key == "g") { if (val != "-") c.g_override = to_int(val, line_no); }
        else if (key == "intra_bw") c.intra_bw = to_int(val, line_no);
        else if (key == "sw") {
            auto c1 = val.find(','), c2 = val.rfind(',');
            if (c1 == std::string_view::npos || c1 == c2) throw ParseError(line_no, "sw expects t,l,gl");
            c.sw_ports = {to_int(val.substr(0, c1), line_no), to_int(val.substr(c1 + 1, c2 - c1 - 1), line_no),
                          to_int(val.substr(c2 + 1), line_no)};
        } else throw ParseError(line_no, "unknown config key '" + std::string(key) + "'");
    }
    return c;
}

std::string write_manifest(const Topology& t) {
    std::ostringstream os;
    os << kHeader << '\n' << format_topo_config_line(t.config()) << '\n';
    for (size_t i = 0; i < t.routers().size(); ++i) {
        const auto& r = t.routers()[i];
        os << "router " << i << ' ' << r.addr.w << ' ' << r.addr.c << ' ' << r.addr.label << ' ' << r.x << ' '
           << r.y << ' ' << r.chip << '\n';
    }
    for (size_t i = 0; i < t.chips().size(); ++i) {
        const auto& c = t.chips()[i];
        os << "chip " << i << ' ' << c.w << ' ' << c.c << ' ' << c.index;
        for (int r : c.routers) os << ' ' << r;
        os << '\n';
    }
    for (size_t i = 0; i < t.ports().size(); ++i) {
        const auto& p = t.ports()[i];
        os << "port " << i << ' ' << p.w << ' ' << p.c << ' ' << p.index << ' ' << to_string(p.kind) << ' '
           << p.label << ' ' << p.host << ' ' << to_string(p.side) << ' ' << p.offset << ' ' << p.peer << ' '
           << p.channel << '\n';
    }
    for (size_t i = 0; i < t.channels().size(); ++i) {
        const auto& c = t.channels()[i];
        os << "channel " << i << ' ' << c.src << ' ' << c.dst << ' ' << to_string(c.cls) << ' ' << c.latency << ' '
           << c.bandwidth << ' ' << to_string(c.dir) << ' ' << c.src_port << ' ' << c.dst_port << '\n';
    }
    return os.str();
}

Topology read_manifest(std::string_view text) {
    Topology t;
    bool have_header = false, have_config = false;
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        auto tok = split_ws(line);
        if (tok.empty()) {
            if (end == text.size()) break;
            continue;
        }
        if (!have_header) {
            if (line.substr(0, kHeader.size()) != kHeader) throw ParseError(line_no, "missing '# sldf-topology v1' header");
            have_header = true;
            continue;
        }
        if (tok[0].starts_with("#")) continue;
        if (tok[0] == "config") {
            t.config_ = parse_topo_config_line(line, line_no);
            guarded(line_no, [&] { t.config_.validate(); return 0; });
            have_config = true;
            continue;
        }
        if (!have_config) throw ParseError(line_no, "record before config line");
        auto need = [&](size_t n) {
            if (tok.size() < n) throw ParseError(line_no, "too few fields for " + std::string(tok[0]));
        };
        auto expect_id = [&](size_t size) {
            if (to_int(tok[1], line_no) != static_cast<int>(size)) throw ParseError(line_no, "record out of order");
        };
        if (tok[0] == "router") {
            need(8);
            expect_id(t.routers_.size());
            Router r;
            r.addr = {to_int(tok[2], line_no), to_int(tok[3], line_no), to_int(tok[4], line_no)};
            r.x = to_int(tok[5], line_no);
            r.y = to_int(tok[6], line_no);
            r.chip = to_int(tok[7], line_no);
            t.routers_.push_back(r);
        } else if (tok[0] == "chip") {
            need(5);
            expect_id(t.chips_.size());
            Chip c{to_int(tok[2], line_no), to_int(tok[3], line_no), to_int(tok[4], line_no), {}};
            for (size_t i = 5; i < tok.size(); ++i) c.routers.push_back(to_int(tok[i], line_no));
            t.chips_.push_back(std::move(c));
        } else if (tok[0] == "port") {
            need(12);
            expect_id(t.ports_.size());
            Port p;
            p.w = to_int(tok[2], line_no);
            p.c = to_int(tok[3], line_no);
            p.index = to_int(tok[4], line_no);
            p.kind = guarded(line_no, [&] { return port_kind_from_string(tok[5]); });
            p.label = to_int(tok[6], line_no);
            p.host = to_int(tok[7], line_no);
            p.side = guarded(line_no, [&] { return side_from_string(tok[8]); });
            p.offset = to_int(tok[9], line_no);
            p.peer = to_int(tok[10], line_no);
            p.channel = to_int(tok[11], line_no);
            t.ports_.push_back(p);
        } else if (tok[0] == "channel") {
            need(10);
            expect_id(t.channels_.size());
            Channel c;
            c.src = to_int(tok[2], line_no);
            c.dst = to_int(tok[3], line_no);
            c.cls = guarded(line_no, [&] { return channel_class_from_string(tok[4]); });
            c.latency = to_int(tok[5], line_no);
            c.bandwidth = to_int(tok[6], line_no);
            if (tok[7] == "up") c.dir = Direction::Up;
            else if (tok[7] == "down") c.dir = Direction::Down;
            else throw ParseError(line_no, "direction must be up or down");
            c.src_port = to_int(tok[8], line_no);
            c.dst_port = to_int(tok[9], line_no);
            t.channels_.push_back(c);
        } else {
            throw ParseError(line_no, "unknown record '" + std::string(tok[0]) + "'");
        }
        if (end == text.size()) break;
    }
    if (!have_config) throw ParseError(line_no, "missing config line");

    const auto& cfg = t.config_;
    const int nr = static_cast<int>(t.routers_.size());
    for (const auto& c : t.channels_)
        if (c.src < 0 || c.src >= nr || c.dst < 0 || c.dst >= nr)
            throw ParseError(line_no, "channel endpoint out of range");
    for (const auto& c : t.chips_)
        for (int r : c.routers)
            if (r < 0 || r >= nr) throw ParseError(line_no, "chip router out of range");

    t.cgroups_per_wgroup_ = cfg.ab();
    t.num_wgroups_ = cfg.g();
    if (cfg.variant == Variant::SwitchLess) {
        const int W = cfg.grid();
        t.routers_per_cgroup_ = W * W;
        t.chips_per_cgroup_ = cfg.m * cfg.m;
        t.terminal_latency_ = 0;
        t.labeling_ = guarded(line_no, [&] { return label_ports(W, cfg.k()); });
        if (nr < W * W || static_cast<int>(t.ports_.size()) < cfg.k())
            throw ParseError(line_no, "manifest too small for its config");
        for (int p = 0; p < W * W; ++p) t.labeling_.router_label[p] = t.routers_[p].addr.label;
        for (int i = 0; i < cfg.k(); ++i) {
            const auto& p = t.ports_[i];
            t.labeling_.port_label[i] = p.label;
            t.labeling_.port_host[i] = p.host;
            t.labeling_.port_side[i] = p.side;
            t.labeling_.port_offset[i] = p.offset;
        }
    } else {
        t.routers_per_cgroup_ = 1;
        t.chips_per_cgroup_ = cfg.sw_ports.terminal;
        t.terminal_latency_ = default_latency(ChannelClass::TerminalLink);
    }
    t.index_adjacency();
    return t;
}

} // namespace sldf
