#include "axgen/netlist.hpp"

#include <algorithm>
#include <array>
#include <optional>

#include <fmt/format.h>

#include "axgen/error.hpp"

namespace axgen::netlist {

namespace {

constexpr std::array<std::string_view, 9> kKindNames = {"INPUT", "OUTPUT", "CONST0", "CONST1", "NOT",
                                                        "AND",   "OR",     "FA",     "HA"};

struct Arity {
    std::size_t in;
    std::size_t out;
};

Arity arity(NodeKind kind) {
    switch (kind) {
        case NodeKind::Input: return {0, 1};
        case NodeKind::Output: return {1, 0};
        case NodeKind::Const0:
        case NodeKind::Const1: return {0, 1};
        case NodeKind::Not: return {1, 1};
        case NodeKind::And:
        case NodeKind::Or: return {2, 1};
        case NodeKind::FA: return {3, 2};
        case NodeKind::HA: return {2, 2};
    }
    return {0, 0};
}

class Builder {
public:
    Builder() {
        const0_ = add(NodeKind::Const0, {}, {"const0"})[0];
        const1_ = add(NodeKind::Const1, {}, {"const1"})[0];
    }

    Port input_port(std::string name, int width) {
        Port port{name, {}, false};
        for (int b = 0; b < width; ++b)
            port.bits.push_back(add(NodeKind::Input, {}, {fmt::format("{}_{}", name, b)})[0]);
        net_.inputs.push_back(port);
        return port;
    }

    void output_port(std::string name, const std::vector<WireId>& bits) {
        for (WireId w : bits) add(NodeKind::Output, {w}, {});
        net_.outputs.push_back({std::move(name), bits, true});
    }

    /// Adder tree for one neuron; returns the accumulator bits, LSB first.
    std::vector<WireId> neuron(const qarith::ApproxNeuron& n, int act_width,
                               const std::vector<std::vector<WireId>>& acts, NeuronStats& stats) {
        const NeuronLayout layout = layout_neuron(n, act_width);
        const auto width = static_cast<std::size_t>(layout.width);
        stats.acc_width = layout.width;
        stats.folded_bias = layout.folding.folded_bias;

        // Complement each activation bit at most once per neuron.
        std::vector<std::vector<WireId>> inverted(acts.size());
        std::vector<std::vector<WireId>> columns(width);
        for (std::size_t c = 0; c < width; ++c) {
            for (const SummandBit& sb : layout.columns[c]) {
                WireId w = acts[sb.input][static_cast<std::size_t>(sb.bit)];
                if (sb.inverted) {
                    auto& inv = inverted[sb.input];
                    if (inv.empty()) inv.assign(acts[sb.input].size(), kNoWire);
                    if (inv[sb.bit] == kNoWire) inv[sb.bit] = add(NodeKind::Not, {w}, {""})[0];
                    w = inv[sb.bit];
                }
                columns[c].push_back(w);
            }
            if (layout.constant_bit(static_cast<int>(c))) columns[c].push_back(const1_);
        }

        // Synchronous 3:2 passes; bits consumed oldest first. A column's next
        // contents are its leftovers, then its sums, then carries from below.
        for (;;) {
            bool any = false;
            std::vector<std::vector<WireId>> next(width), carries(width);
            for (std::size_t c = 0; c < width; ++c) {
                const auto& col = columns[c];
                const std::size_t fas = col.size() / 3;
                any = any || fas > 0;
                std::vector<WireId> sums;
                for (std::size_t f = 0; f < fas; ++f) {
                    auto out = add(NodeKind::FA, {col[3 * f], col[3 * f + 1], col[3 * f + 2]}, {"", ""});
                    sums.push_back(out[0]);
                    if (c + 1 < width) carries[c + 1].push_back(out[1]);
                }
                stats.reduction_fa += static_cast<std::int64_t>(fas);
                next[c].assign(col.begin() + static_cast<std::ptrdiff_t>(3 * fas), col.end());
                next[c].insert(next[c].end(), sums.begin(), sums.end());
            }
            if (!any) break;
            for (std::size_t c = 0; c < width; ++c) next[c].insert(next[c].end(), carries[c].begin(), carries[c].end());
            columns = std::move(next);
        }

        std::vector<WireId> result(width);
        std::optional<WireId> carry;
        for (std::size_t c = 0; c < width; ++c) {
            std::vector<WireId> bits = columns[c];
            if (carry) bits.push_back(*carry);
            carry.reset();
            switch (bits.size()) {
                case 0: result[c] = const0_; break;
                case 1: result[c] = bits[0]; break;
                case 2: {
                    auto out = add(NodeKind::HA, {bits[0], bits[1]}, {"", ""});
                    ++stats.final_ha;
                    result[c] = out[0];
                    carry = out[1];
                    break;
                }
                case 3: {
                    auto out = add(NodeKind::FA, {bits[0], bits[1], bits[2]}, {"", ""});
                    ++stats.final_fa;
                    result[c] = out[0];
                    carry = out[1];
                    break;
                }
                default: throw InvariantError("column holds more than two bits after reduction");
            }
        }
        return result;
    }

    /// clamp(max(0, v) >> shift, 0, 2^w_out - 1) on a two's-complement word.
    std::vector<WireId> qrelu(const std::vector<WireId>& v, int shift, int w_out) {
        const auto width = static_cast<int>(v.size());
        const int msb = width - 1;  // sign bit; value bits are [0, msb)
        std::vector<WireId> out(static_cast<std::size_t>(w_out), const0_);
        if (msb <= shift) return out;

        const WireId positive = add(NodeKind::Not, {v[msb]}, {""})[0];
        std::optional<WireId> overflow;
        for (int p = shift + w_out; p < msb; ++p)
            overflow = overflow ? add(NodeKind::Or, {*overflow, v[p]}, {""})[0] : v[p];

        for (int i = 0; i < w_out; ++i) {
            const int p = shift + i;
            std::optional<WireId> bit;
            if (p < msb) bit = v[p];
            if (bit && overflow) bit = add(NodeKind::Or, {*bit, *overflow}, {""})[0];
            else if (!bit) bit = overflow;
            if (bit) out[i] = add(NodeKind::And, {positive, *bit}, {""})[0];
        }
        return out;
    }

    Netlist finish() {
        auto& md = net_.metadata;
        for (const auto& s : md.neurons) {
            md.fa_count_reduction += s.reduction_fa;
            md.fa_count_final_adder += s.final_fa;
            md.ha_count_final_adder += s.final_ha;
        }
        check_well_formed(net_);
        return std::move(net_);
    }

    Metadata& metadata() { return net_.metadata; }

private:
    static constexpr WireId kNoWire = ~WireId{0};

    std::vector<WireId> add(NodeKind kind, std::vector<WireId> inputs, std::vector<std::string> output_names) {
        const auto id = static_cast<NodeId>(net_.nodes.size());
        Node node{id, kind, std::move(inputs), {}};
        for (auto& name : output_names) {
            const auto w = static_cast<WireId>(net_.wires.size());
            if (name.empty()) name = fmt::format("w{}", w);
            net_.wires.push_back({w, std::move(name), id});
            node.outputs.push_back(w);
        }
        net_.nodes.push_back(node);
        return node.outputs;
    }

    Netlist net_;
    WireId const0_ = 0;
    WireId const1_ = 0;
};

}  // namespace

std::string_view to_string(NodeKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

NodeKind node_kind_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == name) return static_cast<NodeKind>(i);
    throw DataError(fmt::format("unknown node kind '{}'", name));
}

std::size_t Netlist::count(NodeKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [kind](const Node& n) { return n.kind == kind; }));
}

Netlist build(const qarith::ApproxMlp& mlp) {
    qarith::validate(mlp);
    Builder b;
    std::vector<std::vector<WireId>> acts;
    for (int i = 0; i < mlp.topology.front(); ++i) acts.push_back(b.input_port(fmt::format("x{}", i), mlp.config.w_in).bits);

    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        std::vector<std::vector<WireId>> next;
        for (std::size_t j = 0; j < mlp.layers[l].size(); ++j) {
            NeuronStats stats;
            stats.layer = static_cast<int>(l);
            stats.index = static_cast<int>(j);
            auto acc = b.neuron(mlp.layers[l][j], mlp.act_width(l), acts, stats);
            b.metadata().neurons.push_back(stats);
            if (mlp.is_output_layer(l))
                b.output_port(fmt::format("y{}", j), acc);
            else
                next.push_back(b.qrelu(acc, mlp.config.qrelu_shift[l], mlp.config.w_hidden));
        }
        acts = std::move(next);
    }
    return b.finish();
}

Netlist build_neuron(const qarith::ApproxNeuron& neuron, int act_width) {
    Builder b;
    std::vector<std::vector<WireId>> acts;
    for (std::size_t i = 0; i < neuron.fan_in(); ++i) acts.push_back(b.input_port(fmt::format("x{}", i), act_width).bits);
    NeuronStats stats;
    b.output_port("y0", b.neuron(neuron, act_width, acts, stats));
    b.metadata().neurons.push_back(stats);
    return b.finish();
}

std::vector<NodeId> check_well_formed(const Netlist& net) {
    const std::size_t n_nodes = net.nodes.size();
    std::vector<int> drivers(net.wires.size(), 0);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const Node& node = net.nodes[i];
        if (node.id != i) throw InvariantError(fmt::format("node {} stored at slot {}", node.id, i));
        const Arity a = arity(node.kind);
        if (node.inputs.size() != a.in || node.outputs.size() != a.out)
            throw InvariantError(fmt::format("node {} ({}) has {} inputs / {} outputs", i, to_string(node.kind),
                                             node.inputs.size(), node.outputs.size()));
        for (WireId w : node.inputs)
            if (w >= net.wires.size()) throw InvariantError(fmt::format("node {} reads unknown wire {}", i, w));
        for (WireId w : node.outputs) {
            if (w >= net.wires.size() || net.wires[w].driver != i)
                throw InvariantError(fmt::format("wire {} driver mismatch at node {}", w, i));
            ++drivers[w];
        }
    }
    for (std::size_t w = 0; w < drivers.size(); ++w)
        if (drivers[w] != 1) throw InvariantError(fmt::format("wire {} has {} drivers", w, drivers[w]));

    // Kahn's algorithm; a leftover node means a combinational loop.
    std::vector<std::vector<NodeId>> fanout(n_nodes);
    std::vector<std::size_t> pending(n_nodes, 0);
    for (const Node& node : net.nodes)
        for (WireId w : node.inputs) {
            fanout[net.wires[w].driver].push_back(node.id);
            ++pending[node.id];
        }
    std::vector<NodeId> order;
    order.reserve(n_nodes);
    for (NodeId i = 0; i < n_nodes; ++i)
        if (pending[i] == 0) order.push_back(i);
    for (std::size_t head = 0; head < order.size(); ++head)
        for (NodeId succ : fanout[order[head]])
            if (--pending[succ] == 0) order.push_back(succ);
    if (order.size() != n_nodes)
        throw InvariantError(fmt::format("combinational loop: {} of {} nodes unreachable in topological order",
                                         n_nodes - order.size(), n_nodes));
    for (const Port& p : net.outputs)
        for (WireId w : p.bits)
            if (w >= net.wires.size()) throw InvariantError(fmt::format("port {} names unknown wire {}", p.name, w));
    return order;
}

std::vector<std::vector<std::int64_t>> simulate_batch(const Netlist& net,
                                                      std::span<const std::vector<std::uint32_t>> xs) {
    const auto order = check_well_formed(net);
    for (const auto& x : xs) {
        if (x.size() != net.inputs.size())
            throw DataError(fmt::format("netlist expects {} inputs, got {}", net.inputs.size(), x.size()));
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto width = net.inputs[i].bits.size();
            if (width < 32 && (x[i] >> width) != 0)
                throw DataError(fmt::format("input {} value {} exceeds {} bits", i, x[i], width));
        }
    }

    // Which (port, bit) each input wire carries.
    std::vector<std::pair<std::size_t, std::size_t>> input_slot(net.wires.size());
    for (std::size_t p = 0; p < net.inputs.size(); ++p)
        for (std::size_t b = 0; b < net.inputs[p].bits.size(); ++b) input_slot[net.inputs[p].bits[b]] = {p, b};

    std::vector<std::vector<std::int64_t>> results(xs.size(), std::vector<std::int64_t>(net.outputs.size()));
    std::vector<std::uint64_t> value(net.wires.size());
    for (std::size_t base = 0; base < xs.size(); base += 64) {
        const std::size_t lanes = std::min<std::size_t>(64, xs.size() - base);
        for (NodeId id : order) {
            const Node& n = net.nodes[id];
            auto in = [&](std::size_t k) { return value[n.inputs[k]]; };
            switch (n.kind) {
                case NodeKind::Input: {
                    const auto [p, b] = input_slot[n.outputs[0]];
                    std::uint64_t word = 0;
                    for (std::size_t lane = 0; lane < lanes; ++lane)
                        word |= static_cast<std::uint64_t>((xs[base + lane][p] >> b) & 1u) << lane;
                    value[n.outputs[0]] = word;
                    break;
                }
                case NodeKind::Output: break;
                case NodeKind::Const0: value[n.outputs[0]] = 0; break;
                case NodeKind::Const1: value[n.outputs[0]] = ~std::uint64_t{0}; break;
                case NodeKind::Not: value[n.outputs[0]] = ~in(0); break;
                case NodeKind::And: value[n.outputs[0]] = in(0) & in(1); break;
                case NodeKind::Or: value[n.outputs[0]] = in(0) | in(1); break;
                case NodeKind::FA: {
                    const auto a = in(0), b = in(1), c = in(2);
                    value[n.outputs[0]] = a ^ b ^ c;
                    value[n.outputs[1]] = (a & b) | (a & c) | (b & c);
                    break;
                }
                case NodeKind::HA: {
                    const auto a = in(0), b = in(1);
                    value[n.outputs[0]] = a ^ b;
                    value[n.outputs[1]] = a & b;
                    break;
                }
            }
        }
        for (std::size_t o = 0; o < net.outputs.size(); ++o) {
            const Port& port = net.outputs[o];
            const std::size_t width = port.bits.size();
            for (std::size_t lane = 0; lane < lanes; ++lane) {
                std::uint64_t raw = 0;
                for (std::size_t b = 0; b < width; ++b) raw |= ((value[port.bits[b]] >> lane) & 1u) << b;
                std::int64_t v = static_cast<std::int64_t>(raw);
                if (port.is_signed && width > 0 && width < 64 && ((raw >> (width - 1)) & 1u))
                    v = static_cast<std::int64_t>(raw | (~std::uint64_t{0} << width));
                results[base + lane][o] = v;
            }
        }
    }
    return results;
}

std::vector<std::int64_t> simulate(const Netlist& net, std::span<const std::uint32_t> x) {
    std::vector<std::vector<std::uint32_t>> one{std::vector<std::uint32_t>(x.begin(), x.end())};
    return simulate_batch(net, one).front();
}

std::int64_t folded_preact(const qarith::ApproxNeuron& neuron, int act_width, std::span<const std::uint32_t> x) {
    if (x.size() != neuron.fan_in())
        throw DataError(fmt::format("neuron expects {} inputs, got {}", neuron.fan_in(), x.size()));
    const int width = acc_width(neuron, act_width);
    const auto folded = fold_negations(neuron);
    const std::uint64_t mask = (std::uint64_t{1} << width) - 1;
    std::uint64_t acc = static_cast<std::uint64_t>(folded.folded_bias);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto term = qarith::masked_shift(x[i], neuron.inputs[i].mask, neuron.inputs[i].shift);
        acc += folded.complemented[i] ? (~term & mask) : term;
    }
    acc &= mask;
    if ((acc >> (width - 1)) & 1u) acc |= ~mask;
    return static_cast<std::int64_t>(acc);
}

}  // namespace axgen::netlist
