#include "axgen/datio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "axgen/error.hpp"
#include "axgen/random.hpp"

namespace axgen::datio {

namespace {

using Record = std::vector<std::string>;

// RFC-4180: quoted fields may contain separators, quotes ("") and newlines.
std::vector<Record> split_records(std::string_view text, std::string_view origin) {
    std::vector<Record> records;
    Record current;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t line = 1;

    auto end_field = [&] {
        current.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        // A blank line is a single empty field; drop it.
        if (!(current.size() == 1 && current.front().empty())) records.push_back(std::move(current));
        current.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started && !field.empty())
                    throw DataError(fmt::format("{}:{}: stray quote inside unquoted field", origin, line));
                quoted = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                ++line;
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (quoted) throw DataError(fmt::format("{}: unterminated quoted field", origin));
    if (field_started || !current.empty()) end_record();
    return records;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

long round_half_up(double x) {
    return static_cast<long>(std::floor(x + 0.5 + 1e-9));
}

RawDataset parse_csv(std::string_view text, const LabelColumn& label, std::string_view origin) {
    auto records = split_records(text, origin);
    if (records.empty()) throw DataError(fmt::format("{}: empty file", origin));

    const Record& header = records.front();
    std::size_t label_col = 0;
    if (const auto* name = std::get_if<std::string>(&label)) {
        auto it = std::find_if(header.begin(), header.end(),
                               [&](const std::string& h) { return trim(h) == *name; });
        if (it == header.end())
            throw DataError(fmt::format("{}: label column '{}' not found in header", origin, *name));
        label_col = static_cast<std::size_t>(it - header.begin());
    } else {
        label_col = std::get<std::size_t>(label);
        if (label_col >= header.size())
            throw DataError(fmt::format("{}: label column index {} out of range ({} columns)", origin,
                                        label_col, header.size()));
    }

    RawDataset ds;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != label_col) ds.feature_names.emplace_back(trim(header[c]));

    std::map<std::string, ClassId, std::less<>> class_ids;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const Record& rec = records[r];
        if (rec.size() != header.size())
            throw DataError(fmt::format("{}: row {} has {} cells, header has {}", origin, r + 1,
                                        rec.size(), header.size()));
        std::vector<double> row;
        row.reserve(header.size() - 1);
        for (std::size_t c = 0; c < rec.size(); ++c) {
            if (c == label_col) continue;
            double v = 0;
            if (!parse_double(rec[c], v))
                throw DataError(fmt::format("{}: row {} (line {}), column {} ('{}'): non-numeric cell '{}'",
                                            origin, r, r + 1, c + 1, trim(header[c]), rec[c]));
            row.push_back(v);
        }
        std::string key(trim(rec[label_col]));
        auto [it, inserted] = class_ids.try_emplace(key, static_cast<ClassId>(ds.class_names.size()));
        if (inserted) ds.class_names.push_back(key);
        ds.labels.push_back(it->second);
        ds.features.push_back(std::move(row));
    }
    if (ds.class_names.size() < 2)
        throw DataError(fmt::format("{}: need at least two classes, found {}", origin, ds.class_names.size()));
    return ds;
}

RawDataset load_csv(const std::filesystem::path& path, const LabelColumn& label) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), label, path.string());
}

RawDataset normalize(const RawDataset& ds, Scaling* scaling) {
    if (ds.rows() == 0) throw DataError("normalize: empty dataset");
    const std::size_t cols = ds.cols();
    Scaling s{std::vector<double>(cols), std::vector<double>(cols)};
    for (std::size_t c = 0; c < cols; ++c) {
        auto [lo, hi] = std::minmax_element(ds.features.begin(), ds.features.end(),
                                            [c](const auto& a, const auto& b) { return a[c] < b[c]; });
        s.min[c] = (*lo)[c];
        s.max[c] = (*hi)[c];
    }
    RawDataset out = ds;
    for (auto& row : out.features)
        for (std::size_t c = 0; c < cols; ++c) {
            const double range = s.max[c] - s.min[c];
            row[c] = range > 0 ? std::clamp((row[c] - s.min[c]) / range, 0.0, 1.0) : 0.0;
        }
    if (scaling) *scaling = std::move(s);
    return out;
}

Split stratified_split(std::span<const ClassId> labels, int num_classes, double train_fraction,
                       std::uint64_t seed) {
    if (!(train_fraction >= 0.0 && train_fraction <= 1.0))
        throw ConfigError(fmt::format("train fraction {} outside [0, 1]", train_fraction));
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < labels.size(); ++i) by_class.at(static_cast<std::size_t>(labels[i])).push_back(i);

    Split split;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& members = by_class[c];
        if (members.size() < 2)
            throw DataError(fmt::format("class {} has {} sample(s); stratified split needs at least 2", c,
                                        members.size()));
        // One stream per class keeps quotas independent of class ordering.
        Rng rng = Rng::derive(seed, 0x5317, c);
        rng.shuffle(std::span(members));
        const auto quota = static_cast<std::size_t>(
            std::clamp<long>(round_half_up(train_fraction * static_cast<double>(members.size())), 0,
                             static_cast<long>(members.size())));
        split.train.insert(split.train.end(), members.begin(), members.begin() + quota);
        split.test.insert(split.test.end(), members.begin() + quota, members.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

Split stratified_split(const RawDataset& ds, double train_fraction, std::uint64_t seed) {
    return stratified_split(ds.labels, ds.num_classes(), train_fraction, seed);
}

std::uint32_t quantize_value(double v, int w_in) {
    if (!(v >= 0.0 && v <= 1.0)) throw DataError(fmt::format("quantize: value {} outside [0, 1]", v));
    const double top = static_cast<double>((1u << w_in) - 1);
    return static_cast<std::uint32_t>(std::floor(v * top + 0.5));
}

QuantDataset quantize_inputs(const RawDataset& normalized, int w_in) {
    if (w_in < 1 || w_in > 16) throw ConfigError(fmt::format("input width {} outside [1, 16]", w_in));
    QuantDataset q;
    q.w_in = w_in;
    q.labels = normalized.labels;
    q.feature_names = normalized.feature_names;
    q.class_names = normalized.class_names;
    q.features.reserve(normalized.rows());
    for (const auto& row : normalized.features) {
        std::vector<std::uint32_t> qrow(row.size());
        std::transform(row.begin(), row.end(), qrow.begin(), [w_in](double v) { return quantize_value(v, w_in); });
        q.features.push_back(std::move(qrow));
    }
    return q;
}

QuantDataset prepare(const RawDataset& raw, int w_in, double train_fraction, std::uint64_t seed) {
    Scaling scaling;
    RawDataset norm = normalize(raw, &scaling);
    QuantDataset q = quantize_inputs(norm, w_in);
    q.scaling = std::move(scaling);
    q.split = stratified_split(norm, train_fraction, seed);
    return q;
}

}  // namespace axgen::datio
