#include "axgen/hdl.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "axgen/hash.hpp"
#include "axgen/serialize.hpp"

namespace axgen {

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

namespace hdl {

namespace {

using netlist::NodeKind;

constexpr std::string_view kCellLibrary =
    "module axgen_fa (a, b, ci, s, co);\n"
    "  input a, b, ci;\n"
    "  output s, co;\n"
    "  wire ab, ac, bc;\n"
    "  xor g_s (s, a, b, ci);\n"
    "  and g_ab (ab, a, b);\n"
    "  and g_ac (ac, a, ci);\n"
    "  and g_bc (bc, b, ci);\n"
    "  or g_co (co, ab, ac, bc);\n"
    "endmodule\n"
    "\n"
    "module axgen_ha (a, b, s, co);\n"
    "  input a, b;\n"
    "  output s, co;\n"
    "  xor g_s (s, a, b);\n"
    "  and g_co (co, a, b);\n"
    "endmodule\n";

class Writer {
public:
    explicit Writer(const netlist::Netlist& net) : net_(net), ref_(net.wires.size()) {
        for (const auto& node : net.nodes) {
            if (node.kind == NodeKind::Const0) ref_[node.outputs[0]] = "1'b0";
            if (node.kind == NodeKind::Const1) ref_[node.outputs[0]] = "1'b1";
        }
        for (const auto& port : net.inputs)
            for (std::size_t b = 0; b < port.bits.size(); ++b)
                ref_[port.bits[b]] = fmt::format("{}[{}]", port.name, b);
        for (std::size_t w = 0; w < ref_.size(); ++w)
            if (ref_[w].empty()) ref_[w] = sanitize_identifier(net.wires[w].name);
    }

    std::string module(std::string_view name) const {
        std::string out;
        std::vector<std::string> ports;
        for (const auto& p : net_.inputs) ports.push_back(p.name);
        for (const auto& p : net_.outputs) ports.push_back(p.name);
        out += fmt::format("module {} ({});\n", sanitize_identifier(name), fmt::join(ports, ", "));
        for (const auto& p : net_.inputs) out += fmt::format("  input [{}:0] {};\n", p.bits.size() - 1, p.name);
        for (const auto& p : net_.outputs)
            out += fmt::format("  output {}[{}:0] {};\n", p.is_signed ? "signed " : "", p.bits.size() - 1, p.name);

        bool first = true;
        for (const auto& node : net_.nodes) {
            if (!drives_internal_wire(node.kind)) continue;
            for (auto w : node.outputs) {
                if (first) out += "\n";
                first = false;
                out += fmt::format("  wire {};\n", ref_[w]);
            }
        }
        out += "\n";
        for (const auto& node : net_.nodes) out += instance(node);
        out += "\n";
        for (const auto& p : net_.outputs)
            for (std::size_t b = 0; b < p.bits.size(); ++b)
                out += fmt::format("  assign {}[{}] = {};\n", p.name, b, ref_[p.bits[b]]);
        out += "endmodule\n";
        return out;
    }

private:
    static bool drives_internal_wire(NodeKind k) {
        return k == NodeKind::Not || k == NodeKind::And || k == NodeKind::Or || k == NodeKind::FA || k == NodeKind::HA;
    }

    std::string instance(const netlist::Node& n) const {
        auto in = [&](std::size_t k) -> const std::string& { return ref_[n.inputs[k]]; };
        auto out = [&](std::size_t k) -> const std::string& { return ref_[n.outputs[k]]; };
        switch (n.kind) {
            case NodeKind::Not: return fmt::format("  not g{} ({}, {});\n", n.id, out(0), in(0));
            case NodeKind::And: return fmt::format("  and g{} ({}, {}, {});\n", n.id, out(0), in(0), in(1));
            case NodeKind::Or: return fmt::format("  or g{} ({}, {}, {});\n", n.id, out(0), in(0), in(1));
            case NodeKind::FA:
                return fmt::format("  axgen_fa u_fa{} (.a({}), .b({}), .ci({}), .s({}), .co({}));\n", n.id, in(0),
                                   in(1), in(2), out(0), out(1));
            case NodeKind::HA:
                return fmt::format("  axgen_ha u_ha{} (.a({}), .b({}), .s({}), .co({}));\n", n.id, in(0), in(1),
                                   out(0), out(1));
            default: return {};
        }
    }

    const netlist::Netlist& net_;
    std::vector<std::string> ref_;
};

std::string counts_comment(const netlist::Netlist& net) {
    const auto& md = net.metadata;
    return fmt::format("// reduction FAs: {}\n// final-adder FAs: {}, HAs: {}\n", md.fa_count_reduction,
                       md.fa_count_final_adder, md.ha_count_final_adder);
}

}  // namespace

std::string sanitize_identifier(std::string_view name) {
    std::string id;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
        id.push_back(ok ? c : '_');
    }
    if (id.empty() || (id.front() >= '0' && id.front() <= '9')) id.insert(id.begin(), '_');
    return id;
}

std::string emit_verilog(const netlist::Netlist& net, std::string_view module_name) {
    std::string out = "// Generated by axgen. Structural approximate MLP netlist.\n";
    out += counts_comment(net);
    out += "\n";
    out += kCellLibrary;
    out += "\n";
    out += Writer(net).module(module_name);
    return out;
}

std::string emit_verilog(const netlist::Netlist& net, std::string_view module_name, const qarith::ApproxMlp& mlp) {
    const auto& cfg = mlp.config;
    std::string out = "// Generated by axgen. Structural approximate MLP netlist.\n";
    out += fmt::format("// theta hash: {}\n", hex64(fnv1a64(serialize::to_json(mlp).dump())));
    out += fmt::format("// topology: {}\n", fmt::join(mlp.topology, ","));
    out += fmt::format("// config: w_in={} w_hidden={} n_bits={} bias_bits={} qrelu_shift=[{}]\n", cfg.w_in,
                       cfg.w_hidden, cfg.n_bits, cfg.bias_bits, fmt::join(cfg.qrelu_shift, ","));
    out += counts_comment(net);
    out += "\n";
    out += kCellLibrary;
    out += "\n";
    out += Writer(net).module(module_name);
    return out;
}

}  // namespace hdl
}  // namespace axgen
