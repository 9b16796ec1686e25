#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "axgen/error.hpp"
#include "axgen/hash.hpp"
#include "axgen/hdl.hpp"
#include "axgen/netlist.hpp"
#include "axgen/serialize.hpp"

#ifndef AXGEN_VERSION
#define AXGEN_VERSION "0.0.0"
#endif

namespace axgen::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

json manifest(std::string_view command, const std::vector<std::string>& args, json config) {
    return {{"format", "axgen.manifest"},
            {"version", 1},
            {"command", command},
            {"tool_version", AXGEN_VERSION},
            {"args", args},
            {"config", std::move(config)}};
}

// A manifest is accepted wherever a config file is.
json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    json j = serialize::read_json_file(path);
    if (!j.is_object()) throw ConfigError(fmt::format("{}: config must be a JSON object", path));
    if (j.value("format", std::string{}) == "axgen.manifest") return j.at("config");
    return j;
}

std::vector<int> parse_topology(std::string_view text) {
    std::vector<int> out;
    std::string token;
    std::istringstream in{std::string(text)};
    while (std::getline(in, token, ',')) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != token.size() || v <= 0)
            throw ConfigError(fmt::format("--topology: '{}' is not a positive integer", token));
        out.push_back(v);
    }
    if (out.size() < 2) throw ConfigError("--topology needs at least an input and an output layer, e.g. 10,3,2");
    return out;
}

std::string dataset_hash(const datio::QuantDataset& ds) { return hex64(fnv1a64(serialize::to_json(ds).dump())); }

// ---- prepare ---------------------------------------------------------------

struct PrepareArgs {
    std::string csv;
    std::string label = "class";
    std::optional<std::size_t> label_index;
    std::string name;
    std::uint64_t seed = 1;
    int w_in = 4;
    double train_fraction = 0.7;
    std::string out_dir;
    std::string config;
};

int cmd_prepare(const PrepareArgs& a, const CLI::App& sub, const std::vector<std::string>& args, std::ostream& out) {
    const auto t0 = Clock::now();
    const json cfg = load_config(a.config);
    auto pick = [&](const char* flag, const char* key, auto value) {
        if (sub.count(flag) == 0 && cfg.contains(key)) return cfg.at(key).get<decltype(value)>();
        return value;
    };
    const std::string label = pick("--label", "label", a.label);
    std::optional<std::size_t> label_index = a.label_index;
    if (!label_index && sub.count("--label") == 0 && cfg.contains("label_index"))
        label_index = cfg.at("label_index").get<std::size_t>();
    const auto seed = pick("--seed", "seed", a.seed);
    const int w_in = pick("--w-in", "w_in", a.w_in);
    const double frac = pick("--train-fraction", "train_fraction", a.train_fraction);
    std::string name = pick("--name", "name", a.name);
    if (name.empty()) name = fs::path(a.csv).stem().string();

    const datio::LabelColumn column = label_index ? datio::LabelColumn{*label_index} : datio::LabelColumn{label};
    auto raw = datio::load_csv(a.csv, column);
    auto ds = datio::prepare(raw, w_in, frac, seed);
    ds.name = name;

    fs::create_directories(a.out_dir);
    const fs::path dataset_path = fs::path(a.out_dir) / "dataset.json";
    serialize::write_json_file(dataset_path, serialize::to_json(ds));

    json snapshot = {{"name", name}, {"seed", seed}, {"w_in", w_in}, {"train_fraction", frac}};
    if (label_index)
        snapshot["label_index"] = *label_index;
    else
        snapshot["label"] = label;
    json m = manifest("prepare", args, snapshot);
    m["seed"] = seed;
    m["inputs"] = {{"csv", a.csv}};
    m["outputs"] = {{"dataset", dataset_path.string()}};
    m["dataset_hash"] = dataset_hash(ds);
    m["timings"] = {{"wall_seconds", seconds_since(t0)}};
    serialize::write_json_file(fs::path(a.out_dir) / "prepare.manifest.json", m);

    out << fmt::format("{}: {} rows, {} features, {} classes, {} train / {} test -> {}\n", name, ds.rows(), ds.cols(),
                       ds.num_classes(), ds.split.train.size(), ds.split.test.size(), dataset_path.string());
    return kOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
    std::string dataset;
    std::string topology;
    std::uint64_t seed = 1;
    std::size_t pop = 100;
    std::size_t gens = 1000;
    double mut = 0.2;
    double cx = 0.7;
    double dope = 0.10;
    double baseline = 0.0;
    double max_loss = 0.10;
    int w_in = 4;
    int w_hidden = 8;
    int n_bits = 8;
    int bias_bits = 8;
    std::vector<int> qrelu_shift;
    bool evolve_qrelu = false;
    bool literal_rates = false;
    std::size_t threads = 0;
    std::string out_dir;
    std::string config;
};

int cmd_train(const TrainArgs& a, const CLI::App& sub, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
    const auto t0 = Clock::now();
    const json cfg = load_config(a.config);
    const auto ds = serialize::dataset_from_json(serialize::read_json_file(a.dataset));

    evolver::GaConfig ga;
    qarith::MlpConfig mc;
    mc.w_in = ds.w_in;
    if (cfg.contains("ga")) ga = serialize::ga_config_from_json(cfg.at("ga"), ga);
    if (cfg.contains("mlp")) mc = serialize::mlp_config_from_json(cfg.at("mlp"));
    std::vector<int> topology;
    if (cfg.contains("topology")) topology = cfg.at("topology").get<std::vector<int>>();

    auto set = [&](const char* flag, auto& field, auto value) {
        if (sub.count(flag)) field = value;
    };
    if (sub.count("--topology")) topology = parse_topology(a.topology);
    if (a.literal_rates) {
        ga.mutation = 0.002;
        ga.crossover = 0.007;
    }
    set("--seed", ga.seed, a.seed);
    set("--pop", ga.population, a.pop);
    set("--gens", ga.generations, a.gens);
    set("--mut", ga.mutation, a.mut);
    set("--cx", ga.crossover, a.cx);
    set("--dope", ga.dope, a.dope);
    set("--baseline-acc", ga.baseline_accuracy, a.baseline);
    set("--max-loss", ga.max_accuracy_loss, a.max_loss);
    set("--threads", ga.threads, a.threads);
    set("--w-in", mc.w_in, a.w_in);
    set("--w-hidden", mc.w_hidden, a.w_hidden);
    set("--n-bits", mc.n_bits, a.n_bits);
    set("--bias-bits", mc.bias_bits, a.bias_bits);
    set("--qrelu-shift", mc.qrelu_shift, a.qrelu_shift);
    if (a.evolve_qrelu) mc.evolve_qrelu_shift = true;

    if (topology.empty()) throw ConfigError("--topology is required (or 'topology' in --config)");
    if (mc.w_in != ds.w_in)
        throw ConfigError(fmt::format("--w-in {} does not match the dataset's input width {}", mc.w_in, ds.w_in));
    if (static_cast<std::size_t>(topology.front()) != ds.cols())
        throw ConfigError(fmt::format("topology has {} inputs but the dataset has {} features", topology.front(),
                                      ds.cols()));
    if (topology.back() != ds.num_classes())
        throw ConfigError(fmt::format("topology has {} outputs but the dataset has {} classes", topology.back(),
                                      ds.num_classes()));
    ga.validate();

    fs::create_directories(a.out_dir);
    const fs::path archive_path = fs::path(a.out_dir) / "archive.json";
    const fs::path progress_path = fs::path(a.out_dir) / "progress.jsonl";
    std::ofstream progress(progress_path, std::ios::binary);
    if (!progress) throw DataError(fmt::format("cannot write {}", progress_path.string()));

    const auto archive = evolver::evolve(ds, topology, ga, mc, [&](const evolver::GenerationStats& s) {
        progress << json{{"generation", s.generation},
                         {"best_error", s.best_error},
                         {"min_area", s.min_area},
                         {"archive_size", s.archive_size},
                         {"feasible", s.feasible_count},
                         {"hypervolume", s.hypervolume}}
                        .dump()
                 << '\n';
    });
    progress.close();
    serialize::write_json_file(archive_path, serialize::to_json(archive));

    json snapshot = {{"topology", topology}, {"ga", serialize::to_json(ga)}, {"mlp", serialize::to_json(mc)}};
    json m = manifest("train", args, snapshot);
    m["seed"] = ga.seed;
    m["inputs"] = {{"dataset", a.dataset}};
    m["dataset_hash"] = dataset_hash(ds);
    m["outputs"] = {{"archive", archive_path.string()}, {"progress", progress_path.string()}};
    m["timings"] = {{"wall_seconds", seconds_since(t0)}};
    serialize::write_json_file(fs::path(a.out_dir) / "train.manifest.json", m);

    out << fmt::format("{} entries, reference area {}, hypervolume {:.4f} -> {}\n", archive.entries.size(),
                       archive.reference_area, archive.hypervolume, archive_path.string());
    if (!archive.feasible) {
        err << fmt::format("axgen: no individual reached the accuracy bound {:.4f}; wrote least-violating ones\n",
                           ga.baseline_accuracy - ga.max_accuracy_loss);
        return kInfeasible;
    }
    return kOk;
}

// ---- report ----------------------------------------------------------------

struct ReportArgs {
    std::string archive;
    std::string out;
    std::string gnuplot;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
    const auto archive = serialize::archive_from_json(serialize::read_json_file(a.archive));
    const std::string csv = report_csv(archive);
    if (a.out.empty())
        out << csv;
    else
        serialize::write_text_file(a.out, csv);
    if (!a.gnuplot.empty()) serialize::write_text_file(a.gnuplot, report_gnuplot(archive));
    return kOk;
}

// ---- emit ------------------------------------------------------------------

struct EmitArgs {
    std::string archive;
    std::string select = "knee";
    std::string name;
    std::string out_dir;
};

std::vector<std::size_t> select_entries(const evolver::ParetoArchive& archive, std::string_view sel) {
    if (archive.entries.empty()) throw DataError("archive has no entries");
    if (sel == "all") {
        std::vector<std::size_t> all(archive.entries.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return all;
    }
    if (sel == "knee") return {knee_index(archive)};
    std::string_view num = sel;
    if (num.starts_with("index:")) num.remove_prefix(6);
    std::size_t idx = 0;
    std::size_t used = 0;
    try {
        idx = std::stoul(std::string(num), &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != num.size() || num.front() == '-')
        throw ConfigError(fmt::format("--select expects all, knee or an index, got '{}'", sel));
    if (idx >= archive.entries.size())
        throw ConfigError(fmt::format("--select {}: archive has {} entries", idx, archive.entries.size()));
    return {idx};
}

int cmd_emit(EmitArgs a, const std::vector<std::string>& args, std::ostream& out) {
    const auto t0 = Clock::now();
    auto archive = serialize::archive_from_json(serialize::read_json_file(a.archive));
    if (!a.name.empty()) archive.dataset = a.name;
    if (archive.dataset.empty()) archive.dataset = "mlp";
    const auto picked = select_entries(archive, a.select);

    fs::create_directories(a.out_dir);
    json files = json::array();
    for (std::size_t idx : picked) {
        const auto& e = archive.entries[idx];
        const auto net = netlist::build(e.mlp);
        const std::string stem = entry_stem(archive, idx);
        const std::string module = hdl::sanitize_identifier(fmt::format("{}_a{}", archive.dataset, e.area));
        const fs::path v = fs::path(a.out_dir) / (stem + ".v");
        const fs::path j = fs::path(a.out_dir) / (stem + ".json");
        serialize::write_text_file(v, hdl::emit_verilog(net, module, e.mlp));
        serialize::write_json_file(j, serialize::to_json(net));
        files.push_back({{"index", idx}, {"verilog", v.string()}, {"netlist", j.string()}});
        out << v.string() << '\n';
    }

    json m = manifest("emit", args, {{"select", a.select}, {"name", archive.dataset}});
    m["inputs"] = {{"archive", a.archive}};
    m["outputs"] = files;
    m["timings"] = {{"wall_seconds", seconds_since(t0)}};
    serialize::write_json_file(fs::path(a.out_dir) / "emit.manifest.json", m);
    return kOk;
}

}  // namespace

std::size_t knee_index(const evolver::ParetoArchive& archive) {
    const auto& es = archive.entries;
    if (es.empty()) throw DataError("knee of an empty archive");
    double acc_min = es[0].train_accuracy(), acc_max = acc_min;
    auto area_min = es[0].area, area_max = area_min;
    for (const auto& e : es) {
        acc_min = std::min(acc_min, e.train_accuracy());
        acc_max = std::max(acc_max, e.train_accuracy());
        area_min = std::min(area_min, e.area);
        area_max = std::max(area_max, e.area);
    }
    auto norm = [](double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; };
    std::size_t best = 0;
    double best_score = -2.0;
    for (std::size_t i = 0; i < es.size(); ++i) {
        const double score = norm(es[i].train_accuracy(), acc_min, acc_max) -
                             norm(static_cast<double>(es[i].area), static_cast<double>(area_min),
                                  static_cast<double>(area_max));
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    return best;
}

std::vector<bool> non_monotone_test(const evolver::ParetoArchive& archive) {
    std::vector<bool> flags;
    double best = -1.0;
    for (const auto& e : archive.entries) {
        flags.push_back(e.test_accuracy < best);
        best = std::max(best, e.test_accuracy);
    }
    return flags;
}

std::string report_csv(const evolver::ParetoArchive& archive) {
    std::string s = "index,area_fa,train_acc,test_acc,test_non_monotone\n";
    const auto flags = non_monotone_test(archive);
    for (std::size_t i = 0; i < archive.entries.size(); ++i) {
        const auto& e = archive.entries[i];
        s += fmt::format("{},{},{:.6f},{:.6f},{}\n", i, e.area, e.train_accuracy(), e.test_accuracy,
                         flags[i] ? 1 : 0);
    }
    return s;
}

std::string report_gnuplot(const evolver::ParetoArchive& archive) {
    std::string s = "# area_fa train_acc test_acc\n";
    for (const auto& e : archive.entries)
        s += fmt::format("{} {:.6f} {:.6f}\n", e.area, e.train_accuracy(), e.test_accuracy);
    return s;
}

std::string entry_stem(const evolver::ParetoArchive& archive, std::size_t index) {
    const auto& e = archive.entries.at(index);
    const std::string name = archive.dataset.empty() ? "mlp" : archive.dataset;
    return fmt::format("{}_{}_{:.1f}", name, e.area, 100.0 * e.test_accuracy);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Evolve bespoke approximate MLP circuits and emit their netlists", "axgen"};
    app.set_version_flag("--version", AXGEN_VERSION);
    app.require_subcommand(1);

    PrepareArgs pa;
    auto* prep = app.add_subcommand("prepare", "Normalize, split and quantize a CSV dataset");
    prep->add_option("csv", pa.csv, "Input CSV with a header row")->required();
    auto* label_opt = prep->add_option("--label", pa.label, "Label column name")->capture_default_str();
    prep->add_option("--label-index", pa.label_index, "Label column index (0-based)")->excludes(label_opt);
    prep->add_option("--name", pa.name, "Dataset name (default: CSV file stem)");
    prep->add_option("--seed", pa.seed, "Split seed")->capture_default_str();
    prep->add_option("--w-in", pa.w_in, "Input bit width")->capture_default_str()->check(CLI::Range(1, 16));
    prep->add_option("--train-fraction", pa.train_fraction, "Training share per class")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    prep->add_option("--out-dir", pa.out_dir, "Run directory")->required();
    prep->add_option("--config", pa.config, "JSON config or manifest");

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "Evolve an area/accuracy Pareto archive");
    train->add_option("dataset", ta.dataset, "dataset.json from 'prepare'")->required();
    train->add_option("--topology", ta.topology, "Layer sizes, e.g. 10,3,2");
    train->add_option("--seed", ta.seed, "GA seed")->capture_default_str();
    train->add_option("--pop", ta.pop, "Population size")->capture_default_str();
    train->add_option("--gens", ta.gens, "Generations")->capture_default_str();
    train->add_option("--mut", ta.mut, "Per-gene mutation probability")->capture_default_str();
    train->add_option("--cx", ta.cx, "Per-pair crossover probability")->capture_default_str();
    train->add_option("--dope", ta.dope, "Share of all-ones-mask initial individuals")->capture_default_str();
    train->add_option("--baseline-acc", ta.baseline, "Baseline accuracy of the exact network");
    train->add_option("--max-loss", ta.max_loss, "Allowed accuracy loss below the baseline")->capture_default_str();
    train->add_flag("--literal-rates", ta.literal_rates, "Use mutation 0.002 and crossover 0.007");
    train->add_option("--w-in", ta.w_in, "Input bit width (must match the dataset)");
    train->add_option("--w-hidden", ta.w_hidden, "QReLU output bit width")->capture_default_str();
    train->add_option("--n-bits", ta.n_bits, "Weight bit width")->capture_default_str();
    train->add_option("--bias-bits", ta.bias_bits, "Bias bit width")->capture_default_str();
    train->add_option("--qrelu-shift", ta.qrelu_shift, "QReLU right shift per hidden layer")->delimiter(',');
    train->add_flag("--evolve-qrelu-shift", ta.evolve_qrelu, "Carry the QReLU shifts in the genome");
    train->add_option("--threads", ta.threads, "Evaluation threads (0 = all cores)");
    train->add_option("--out-dir", ta.out_dir, "Run directory")->required();
    train->add_option("--config", ta.config, "JSON config or manifest");

    ReportArgs ra;
    auto* report = app.add_subcommand("report", "CSV of area and accuracy per archive entry");
    report->add_option("archive", ra.archive, "archive.json")->required();
    report->add_option("--out", ra.out, "CSV path (default: stdout)");
    report->add_option("--gnuplot", ra.gnuplot, "Whitespace-separated data file");

    EmitArgs ea;
    auto* emit = app.add_subcommand("emit", "Write Verilog and netlist JSON for archive entries");
    emit->add_option("archive", ea.archive, "archive.json")->required();
    emit->add_option("--select", ea.select, "all, knee, N or index:N")->capture_default_str();
    emit->add_option("--name", ea.name, "Dataset name used in file and module names");
    emit->add_option("--out-dir", ea.out_dir, "Output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*prep) return cmd_prepare(pa, *prep, args, out);
        if (*train) return cmd_train(ta, *train, args, out, err);
        if (*report) return cmd_report(ra, out);
        if (*emit) return cmd_emit(ea, args, out);
    } catch (const DataError& e) {
        err << "axgen: " << e.what() << '\n';
        return kUsage;
    } catch (const ConfigError& e) {
        err << "axgen: " << e.what() << '\n';
        return kUsage;
    } catch (const json::exception& e) {
        err << "axgen: malformed JSON: " << e.what() << '\n';
        return kUsage;
    } catch (const fs::filesystem_error& e) {
        err << "axgen: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

}  // namespace axgen::cli
