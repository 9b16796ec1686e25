#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "axgen/datio.hpp"
#include "axgen/evolver.hpp"
#include "axgen/netlist.hpp"
#include "axgen/qarith.hpp"

/// Versioned JSON documents. Every top-level document carries
/// {"format": "axgen.<kind>", "version": N}; readers reject other formats and
/// newer versions with DataError.
namespace axgen::serialize {

using nlohmann::json;

inline constexpr int kDatasetVersion = 1;
inline constexpr int kMlpVersion = 1;
inline constexpr int kArchiveVersion = 1;
inline constexpr int kNetlistVersion = 1;

json to_json(const datio::QuantDataset& ds);
datio::QuantDataset dataset_from_json(const json& j);

json to_json(const qarith::MlpConfig& cfg);
qarith::MlpConfig mlp_config_from_json(const json& j);

json to_json(const qarith::ApproxMlp& mlp);
qarith::ApproxMlp mlp_from_json(const json& j);

json to_json(const evolver::GaConfig& cfg);
/// Missing keys keep the values already in `base`.
evolver::GaConfig ga_config_from_json(const json& j, evolver::GaConfig base = {});

json to_json(const evolver::ParetoArchive& archive);
evolver::ParetoArchive archive_from_json(const json& j);

json to_json(const netlist::Netlist& net);

json read_json_file(const std::filesystem::path& path);
/// Writes `j.dump(2)` plus a trailing newline.
void write_json_file(const std::filesystem::path& path, const json& j);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace axgen::serialize
