#pragma once

#include <string>
#include <string_view>

#include "sldf/topology.hpp"

namespace sldf {

/// Text manifest, one record per line:
///
///   # sldf-topology v1
///   config variant=<v> a= b= m= n= r= h=<n|-> g=<n|-> intra_bw= sw=<t>,<l>,<gl>
///   router <id> <w> <c> <label> <x> <y> <chip>
///   chip <id> <w> <c> <index> <router>...
///   port <id> <w> <c> <index> <kind> <label> <host> <side> <offset> <peer> <channel>
///   channel <id> <src> <dst> <class> <latency> <bandwidth> <up|down> <src_port> <dst_port>
///
/// Records appear in id order, so two manifests of equal topologies diff clean.
std::string write_manifest(const Topology& topo);

/// Throws ParseError (with line number) on malformed input.
Topology read_manifest(std::string_view text);

/// Parses only the config line of a manifest.
TopoConfig parse_topo_config_line(std::string_view line, int line_no = 1);
std::string format_topo_config_line(const TopoConfig& config);

} // namespace sldf
