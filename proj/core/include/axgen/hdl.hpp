#pragma once

#include <string>
#include <string_view>

#include "axgen/netlist.hpp"
#include "axgen/qarith.hpp"

namespace axgen::hdl {

/// Structural Verilog-2001 for a netlist. Full and half adders are emitted as
/// small gate-level modules and instantiated once per FA/HA node, so the
/// instance count in the text equals the node count. Output is a pure
/// function of the arguments.
std::string emit_verilog(const netlist::Netlist& net, std::string_view module_name);

/// Same, with a comment header describing the network the netlist came from.
std::string emit_verilog(const netlist::Netlist& net, std::string_view module_name,
                         const qarith::ApproxMlp& mlp);

/// Identifier made of [A-Za-z0-9_] that does not start with a digit.
std::string sanitize_identifier(std::string_view name);

}  // namespace axgen::hdl
