#include "axgen/serialize.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "axgen/error.hpp"

namespace axgen::serialize {

namespace {

json header(std::string_view kind, int version) {
    return json{{"format", fmt::format("axgen.{}", kind)}, {"version", version}};
}

void check_header(const json& j, std::string_view kind, int version) {
    if (!j.is_object()) throw DataError(fmt::format("expected a JSON object for axgen.{}", kind));
    const auto expected = fmt::format("axgen.{}", kind);
    if (j.value("format", std::string{}) != expected)
        throw DataError(fmt::format("document format is '{}', expected '{}'", j.value("format", std::string{"?"}), expected));
    const int v = j.value("version", 0);
    if (v < 1 || v > version) throw DataError(fmt::format("unsupported {} version {}", expected, v));
}

template <typename T>
T get(const json& j, const char* key) {
    if (!j.contains(key)) throw DataError(fmt::format("missing key '{}'", key));
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw DataError(fmt::format("key '{}': {}", key, e.what()));
    }
}

}  // namespace

json to_json(const datio::QuantDataset& ds) {
    json j = header("dataset", kDatasetVersion);
    j["name"] = ds.name;
    j["w_in"] = ds.w_in;
    j["feature_names"] = ds.feature_names;
    j["class_names"] = ds.class_names;
    j["features"] = ds.features;
    j["labels"] = ds.labels;
    j["train_idx"] = ds.split.train;
    j["test_idx"] = ds.split.test;
    j["scaling"] = {{"min", ds.scaling.min}, {"max", ds.scaling.max}};
    return j;
}

datio::QuantDataset dataset_from_json(const json& j) {
    check_header(j, "dataset", kDatasetVersion);
    datio::QuantDataset ds;
    ds.name = j.value("name", std::string{});
    ds.w_in = get<int>(j, "w_in");
    ds.feature_names = get<std::vector<std::string>>(j, "feature_names");
    ds.class_names = get<std::vector<std::string>>(j, "class_names");
    ds.features = get<std::vector<std::vector<std::uint32_t>>>(j, "features");
    ds.labels = get<std::vector<int>>(j, "labels");
    ds.split.train = get<std::vector<std::size_t>>(j, "train_idx");
    ds.split.test = get<std::vector<std::size_t>>(j, "test_idx");
    const auto& sc = j.at("scaling");
    ds.scaling.min = get<std::vector<double>>(sc, "min");
    ds.scaling.max = get<std::vector<double>>(sc, "max");

    if (ds.labels.size() != ds.features.size()) throw DataError("dataset: label count differs from row count");
    const std::uint32_t top = (1u << ds.w_in) - 1;
    for (const auto& row : ds.features) {
        if (row.size() != ds.feature_names.size()) throw DataError("dataset: ragged feature matrix");
        for (auto v : row)
            if (v > top) throw DataError(fmt::format("dataset: feature value {} exceeds {} bits", v, ds.w_in));
    }
    for (int l : ds.labels)
        if (l < 0 || l >= ds.num_classes()) throw DataError(fmt::format("dataset: label {} out of range", l));
    for (const auto* idx : {&ds.split.train, &ds.split.test})
        for (auto i : *idx)
            if (i >= ds.rows()) throw DataError(fmt::format("dataset: split index {} out of range", i));
    std::vector<int> seen(ds.rows(), 0);
    for (const auto* idx : {&ds.split.train, &ds.split.test})
        for (auto i : *idx) ++seen[i];
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (seen[i] != 1)
            throw DataError(fmt::format("dataset: row {} appears {} times in the train/test split", i, seen[i]));
    return ds;
}

json to_json(const qarith::MlpConfig& cfg) {
    return {{"w_in", cfg.w_in},
            {"w_hidden", cfg.w_hidden},
            {"n_bits", cfg.n_bits},
            {"bias_bits", cfg.bias_bits},
            {"qrelu_shift", cfg.qrelu_shift},
            {"evolve_qrelu_shift", cfg.evolve_qrelu_shift}};
}

qarith::MlpConfig mlp_config_from_json(const json& j) {
    qarith::MlpConfig cfg;
    cfg.w_in = j.value("w_in", cfg.w_in);
    cfg.w_hidden = j.value("w_hidden", cfg.w_hidden);
    cfg.n_bits = j.value("n_bits", cfg.n_bits);
    cfg.bias_bits = j.value("bias_bits", cfg.bias_bits);
    cfg.qrelu_shift = j.value("qrelu_shift", cfg.qrelu_shift);
    cfg.evolve_qrelu_shift = j.value("evolve_qrelu_shift", cfg.evolve_qrelu_shift);
    return cfg;
}

json to_json(const qarith::ApproxMlp& mlp) {
    json j = header("mlp", kMlpVersion);
    j["topology"] = mlp.topology;
    j["config"] = to_json(mlp.config);
    json layers = json::array();
    for (const auto& layer : mlp.layers) {
        json neurons = json::array();
        for (const auto& n : layer) {
            std::vector<std::uint32_t> m;
            std::vector<int> s, k;
            for (const auto& syn : n.inputs) {
                m.push_back(syn.mask);
                s.push_back(syn.sign);
                k.push_back(syn.shift);
            }
            neurons.push_back({{"m", m}, {"s", s}, {"k", k}, {"b", n.bias}});
        }
        layers.push_back(std::move(neurons));
    }
    j["layers"] = std::move(layers);
    return j;
}

qarith::ApproxMlp mlp_from_json(const json& j) {
    check_header(j, "mlp", kMlpVersion);
    qarith::ApproxMlp mlp;
    mlp.topology = get<std::vector<int>>(j, "topology");
    mlp.config = mlp_config_from_json(j.at("config"));
    for (const auto& jl : j.at("layers")) {
        std::vector<qarith::ApproxNeuron> layer;
        for (const auto& jn : jl) {
            const auto m = get<std::vector<std::uint32_t>>(jn, "m");
            const auto s = get<std::vector<int>>(jn, "s");
            const auto k = get<std::vector<int>>(jn, "k");
            if (m.size() != s.size() || m.size() != k.size()) throw DataError("mlp: m/s/k arrays differ in length");
            qarith::ApproxNeuron n;
            n.bias = get<int>(jn, "b");
            for (std::size_t i = 0; i < m.size(); ++i) n.inputs.push_back({m[i], s[i], k[i]});
            layer.push_back(std::move(n));
        }
        mlp.layers.push_back(std::move(layer));
    }
    qarith::validate(mlp);
    return mlp;
}

json to_json(const evolver::GaConfig& cfg) {
    return {{"population", cfg.population},
            {"generations", cfg.generations},
            {"mutation", cfg.mutation},
            {"crossover", cfg.crossover},
            {"dope", cfg.dope},
            {"seed", cfg.seed},
            {"baseline_accuracy", cfg.baseline_accuracy},
            {"max_accuracy_loss", cfg.max_accuracy_loss}};
}

evolver::GaConfig ga_config_from_json(const json& j, evolver::GaConfig base) {
    try {
        base.population = j.value("population", base.population);
        base.generations = j.value("generations", base.generations);
        base.mutation = j.value("mutation", base.mutation);
        base.crossover = j.value("crossover", base.crossover);
        base.dope = j.value("dope", base.dope);
        base.seed = j.value("seed", base.seed);
        base.baseline_accuracy = j.value("baseline_accuracy", base.baseline_accuracy);
        base.max_accuracy_loss = j.value("max_accuracy_loss", base.max_accuracy_loss);
        base.threads = j.value("threads", base.threads);
    } catch (const json::exception& e) {
        throw DataError(fmt::format("GA config: {}", e.what()));
    }
    return base;
}

json to_json(const evolver::ParetoArchive& archive) {
    json j = header("archive", kArchiveVersion);
    j["dataset"] = archive.dataset;
    j["topology"] = archive.topology;
    j["mlp_config"] = to_json(archive.mlp_config);
    j["ga_config"] = to_json(archive.ga_config);
    j["feasible"] = archive.feasible;
    j["reference_area"] = archive.reference_area;
    j["hypervolume"] = archive.hypervolume;
    json entries = json::array();
    for (const auto& e : archive.entries)
        entries.push_back({{"area", e.area},
                           {"train_error", e.train_error},
                           {"train_accuracy", e.train_accuracy()},
                           {"test_accuracy", e.test_accuracy},
                           {"generation", e.generation},
                           {"seed", archive.ga_config.seed},
                           {"mlp", to_json(e.mlp)}});
    j["entries"] = std::move(entries);
    return j;
}

evolver::ParetoArchive archive_from_json(const json& j) {
    check_header(j, "archive", kArchiveVersion);
    evolver::ParetoArchive a;
    a.dataset = j.value("dataset", std::string{});
    a.topology = get<std::vector<int>>(j, "topology");
    a.mlp_config = mlp_config_from_json(j.at("mlp_config"));
    a.ga_config = ga_config_from_json(j.at("ga_config"));
    a.feasible = get<bool>(j, "feasible");
    a.reference_area = get<std::int64_t>(j, "reference_area");
    a.hypervolume = get<double>(j, "hypervolume");
    for (const auto& je : j.at("entries")) {
        evolver::ArchiveEntry e;
        e.area = get<std::int64_t>(je, "area");
        e.train_error = get<double>(je, "train_error");
        e.test_accuracy = get<double>(je, "test_accuracy");
        e.generation = get<std::size_t>(je, "generation");
        e.mlp = mlp_from_json(je.at("mlp"));
        a.entries.push_back(std::move(e));
    }
    return a;
}

json to_json(const netlist::Netlist& net) {
    json j = header("netlist", kNetlistVersion);
    json nodes = json::array();
    for (const auto& n : net.nodes)
        nodes.push_back({{"id", n.id}, {"kind", netlist::to_string(n.kind)}, {"in", n.inputs}, {"out", n.outputs}});
    json wires = json::array();
    for (const auto& w : net.wires) wires.push_back({{"id", w.id}, {"name", w.name}, {"driver", w.driver}});
    auto ports = [](const std::vector<netlist::Port>& ps) {
        json arr = json::array();
        for (const auto& p : ps) arr.push_back({{"name", p.name}, {"bits", p.bits}, {"signed", p.is_signed}});
        return arr;
    };
    json neurons = json::array();
    for (const auto& s : net.metadata.neurons)
        neurons.push_back({{"layer", s.layer},
                           {"index", s.index},
                           {"acc_width", s.acc_width},
                           {"folded_bias", s.folded_bias},
                           {"fa_reduction", s.reduction_fa},
                           {"fa_final_adder", s.final_fa},
                           {"ha_final_adder", s.final_ha}});
    j["nodes"] = std::move(nodes);
    j["wires"] = std::move(wires);
    j["inputs"] = ports(net.inputs);
    j["outputs"] = ports(net.outputs);
    j["metadata"] = {{"fa_count_reduction", net.metadata.fa_count_reduction},
                     {"fa_count_final_adder", net.metadata.fa_count_final_adder},
                     {"ha_count_final_adder", net.metadata.ha_count_final_adder},
                     {"neurons", std::move(neurons)}};
    return j;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw DataError(fmt::format("short write to '{}'", path.string()));
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace axgen::serialize
