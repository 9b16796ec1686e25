#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace axgen::datio {

using ClassId = int;

/// Tabular classification data in real-valued feature space.
struct RawDataset {
    std::vector<std::vector<double>> features;  // rows x cols
    std::vector<ClassId> labels;                // 0-based, contiguous
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;       // class_names[id] = original label text

    std::size_t rows() const { return features.size(); }
    std::size_t cols() const { return feature_names.size(); }
    int num_classes() const { return static_cast<int>(class_names.size()); }
};

/// Per-column min/max used by normalize(); kept so inference inputs can be
/// scaled identically.
struct Scaling {
    std::vector<double> min;
    std::vector<double> max;
};

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

enum class Part { Train, Test };

/// Normalized, integer-quantized features plus a train/test split.
struct QuantDataset {
    std::string name;
    int w_in = 4;
    std::vector<std::vector<std::uint32_t>> features;
    std::vector<ClassId> labels;
    Split split;
    Scaling scaling;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;

    std::size_t rows() const { return features.size(); }
    std::size_t cols() const { return feature_names.size(); }
    int num_classes() const { return static_cast<int>(class_names.size()); }
    const std::vector<std::size_t>& indices(Part part) const {
        return part == Part::Train ? split.train : split.test;
    }
};

/// Column selector for load_csv: header name or zero-based index.
using LabelColumn = std::variant<std::string, std::size_t>;

/// Parses an RFC-4180 style CSV with a header row. Labels are re-indexed by
/// first occurrence. Throws DataError on unreadable files, non-numeric
/// feature cells (row/column reported), ragged rows, or a single class.
RawDataset load_csv(const std::filesystem::path& path, const LabelColumn& label = std::string("class"));

/// Same as load_csv but over in-memory text; `origin` is used in messages.
RawDataset parse_csv(std::string_view text, const LabelColumn& label = std::string("class"),
                     std::string_view origin = "<memory>");

/// Min-max scales every column to [0, 1]; constant columns become 0.
/// Statistics are taken over all rows. Throws DataError on an empty dataset.
RawDataset normalize(const RawDataset& ds, Scaling* scaling = nullptr);

/// Per-class shuffle-and-take with round-half-up class quotas.
/// Throws DataError if any class has fewer than two samples.
Split stratified_split(const RawDataset& ds, double train_fraction, std::uint64_t seed);
Split stratified_split(std::span<const ClassId> labels, int num_classes, double train_fraction,
                       std::uint64_t seed);

/// q = floor(v * (2^w_in - 1) + 1/2). Throws DataError for v outside [0, 1].
std::uint32_t quantize_value(double v, int w_in);

/// Quantizes an already-normalized dataset. The split is left empty.
QuantDataset quantize_inputs(const RawDataset& normalized, int w_in);

/// load -> normalize -> split -> quantize.
QuantDataset prepare(const RawDataset& raw, int w_in, double train_fraction, std::uint64_t seed);

/// round-half-up of x, tolerant to representation error just below .5.
long round_half_up(double x);

}  // namespace axgen::datio
