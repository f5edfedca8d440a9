#include "kanids/data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "kanids/error.hpp"
#include "kanids/rng.hpp"

namespace kanids {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (std::isspace(static_cast<unsigned char>(s[a])) || s[a] == '"')) ++a;
    while (b > a && (std::isspace(static_cast<unsigned char>(s[b - 1])) || s[b - 1] == '"')) --b;
    return std::string(s.substr(a, b - a));
}

std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string_view rest(line);
    if (!rest.empty() && rest.back() == '\r') rest.remove_suffix(1);
    while (true) {
        const auto comma = rest.find(',');
        out.push_back(trim(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

enum class Cell { Value, Missing, Infinite, Unparseable };

Cell parse_number(const std::string& token, double& out) {
    if (token.empty() || token == "?") return Cell::Missing;
    const std::string up = upper(token);
    if (up == "NAN" || up == "NULL" || up == "NA") return Cell::Missing;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) {
        if (up.find("INF") != std::string::npos) return Cell::Infinite;
        return Cell::Unparseable;
    }
    if (!std::isfinite(out)) return std::isnan(out) ? Cell::Missing : Cell::Infinite;
    return Cell::Value;
}

enum class Role { Feature, Label, Skip };

struct Plan {
    Role role = Role::Skip;
    std::size_t column = 0;  // index into RawTable::columns for features
};

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a(std::uint64_t h, const std::string& s) { return fnv1a(fnv1a(h, s.data(), s.size()), "\0", 1); }
std::uint64_t fnv1a(std::uint64_t h, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    return fnv1a(h, &bits, sizeof bits);
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[i] = digits[v & 0xf];
    return out;
}

double median_of(std::vector<double> values) {
    if (values.empty()) return 0.0;
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<long>(mid), values.end());
    const double hi = values[mid];
    if (values.size() % 2 == 1) return hi;
    const double lo = *std::max_element(values.begin(), values.begin() + static_cast<long>(mid));
    return lo + (hi - lo) / 2.0;
}

struct NumericTransform {
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct ColumnTransform {
    std::string name;
    bool categorical = false;
    bool keep = false;
    NumericTransform numeric;
    std::vector<std::string> vocabulary;  // first-seen train order
    std::map<std::string, std::size_t> slot;
};

double scale(const NumericTransform& t, double v) {
    if (!std::isfinite(v)) v = t.median;
    const double s = 2.0 * (v - t.min) / (t.max - t.min) - 1.0;
    return std::clamp(s, -1.0, 1.0);
}

DatasetSplit apply(const std::vector<ColumnTransform>& transforms, const RawTable& table,
                   const std::vector<std::string>& names, const std::vector<FeatureStats>& stats,
                   const std::string& fingerprint) {
    DatasetSplit split;
    split.feature_names = names;
    split.feature_stats = stats;
    split.fingerprint = fingerprint;
    split.labels = table.labels;
    const std::size_t rows = table.rows();
    const std::size_t dim = names.size();
    split.features = Tensor({rows, dim});

    std::size_t offset = 0;
    for (const auto& t : transforms) {
        if (!t.keep) continue;
        const Column* col = table.find(t.name);
        require(col != nullptr && col->categorical == t.categorical, ErrorKind::SchemaMismatch,
                "column '" + t.name + "' missing or of a different type in split");
        if (t.categorical) {
            for (std::size_t r = 0; r < rows; ++r) {
                if (const auto it = t.slot.find(col->text[r]); it != t.slot.end())
                    split.features[r * dim + offset + it->second] = 1.0;
            }
            offset += t.vocabulary.size();
        } else {
            for (std::size_t r = 0; r < rows; ++r) split.features[r * dim + offset] = scale(t.numeric, col->numeric[r]);
            offset += 1;
        }
    }
    return split;
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    require(static_cast<bool>(in), ErrorKind::IoFailure, "truncated split file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

constexpr char kSplitMagic[8] = {'K', 'A', 'N', 'I', 'D', 'S', 'D', '1'};

std::string source_prefix(DatasetName source) {
    switch (source) {
        case DatasetName::BOT_IOT: return "bot:";
        case DatasetName::NSL_KDD: return "nsl:";
        case DatasetName::CICIDS2017: return "cic:";
        case DatasetName::UNSW_NB15: return "unsw:";
        case DatasetName::TRI_IDS: return "tri:";
    }
    return "?:";
}

// Columns that describe the same quantity across the merged sources.
const std::map<std::pair<DatasetName, std::string>, std::string>& shared_aliases() {
    static const std::map<std::pair<DatasetName, std::string>, std::string> kAliases = {
        {{DatasetName::NSL_KDD, "protocol_type"}, "protocol"},
        {{DatasetName::BOT_IOT, "proto"}, "protocol"},
        {{DatasetName::CICIDS2017, "Protocol"}, "protocol"},
        {{DatasetName::NSL_KDD, "duration"}, "duration"},
        {{DatasetName::BOT_IOT, "dur"}, "duration"},
        {{DatasetName::CICIDS2017, "Flow Duration"}, "duration"},
        {{DatasetName::NSL_KDD, "src_bytes"}, "src_bytes"},
        {{DatasetName::BOT_IOT, "sbytes"}, "src_bytes"},
        {{DatasetName::CICIDS2017, "Total Length of Fwd Packets"}, "src_bytes"},
        {{DatasetName::NSL_KDD, "dst_bytes"}, "dst_bytes"},
        {{DatasetName::BOT_IOT, "dbytes"}, "dst_bytes"},
        {{DatasetName::CICIDS2017, "Total Length of Bwd Packets"}, "dst_bytes"},
        {{DatasetName::BOT_IOT, "spkts"}, "src_pkts"},
        {{DatasetName::CICIDS2017, "Total Fwd Packets"}, "src_pkts"},
        {{DatasetName::BOT_IOT, "dpkts"}, "dst_pkts"},
        {{DatasetName::CICIDS2017, "Total Backward Packets"}, "dst_pkts"},
    };
    return kAliases;
}

// IANA protocol numbers used by the flow-labelled CICIDS2017 files.
std::string canonical_value(const std::string& canonical, const std::string& value) {
    if (canonical != "protocol") return value;
    if (value == "6") return "tcp";
    if (value == "17") return "udp";
    if (value == "1") return "icmp";
    return value;
}

}  // namespace

// ---------------------------------------------------------------- RawTable

const Column* RawTable::find(const std::string& name) const {
    for (const auto& c : columns)
        if (c.name == name) return &c;
    return nullptr;
}

RawTable RawTable::select_rows(const std::vector<std::size_t>& rows) const {
    RawTable out;
    out.source = source;
    out.report = report;
    out.report.rows_read = rows.size();
    for (const auto& c : columns) {
        Column sel{c.name, c.categorical, {}, {}};
        if (c.categorical) {
            sel.text.reserve(rows.size());
            for (std::size_t r : rows) sel.text.push_back(c.text[r]);
        } else {
            sel.numeric.reserve(rows.size());
            for (std::size_t r : rows) sel.numeric.push_back(c.numeric[r]);
        }
        out.columns.push_back(std::move(sel));
    }
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) out.labels.push_back(labels[r]);
    if (!source_ids.empty())
        for (std::size_t r : rows) out.source_ids.push_back(source_ids[r]);
    out.report.positives = static_cast<std::uint64_t>(std::count(out.labels.begin(), out.labels.end(), 1));
    return out;
}

// ---------------------------------------------------------------- ingest

RawTable ingest_csv(const std::filesystem::path& path, const DatasetSchema& schema) {
    require(std::filesystem::exists(path), ErrorKind::MissingFile, path.string());
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::MissingFile, path.string());

    std::string line;
    while (std::getline(in, line) && trim(line).empty()) {
    }
    require(!trim(line).empty(), ErrorKind::EmptyFile, path.string());

    std::vector<std::string> known = schema.columns;
    known.insert(known.end(), schema.optional_columns.begin(), schema.optional_columns.end());
    auto canonical = [&](const std::string& name) -> std::string {
        const std::string key = upper(name);
        for (const auto& k : known)
            if (upper(k) == key) return k;
        return {};
    };

    std::vector<std::string> first = split_fields(line);
    bool header = schema.header_required;
    if (!header) {
        header = std::all_of(first.begin(), first.end(), [&](const std::string& f) { return !canonical(f).empty(); });
    }

    std::vector<std::string> names;
    if (header) {
        std::map<std::string, int> seen;
        for (const auto& f : first) {
            std::string name = canonical(f);
            const int n = seen[upper(f)]++;
            if (n > 0) name = canonical(trim(f) + "." + std::to_string(n));
            require(!name.empty(), ErrorKind::SchemaMismatch,
                    path.string() + ": column '" + f + "' is not part of the " + std::string(to_string(schema.name)) +
                        " schema");
            names.push_back(name);
        }
        for (const auto& c : schema.columns)
            require(std::find(names.begin(), names.end(), c) != names.end(), ErrorKind::SchemaMismatch,
                    path.string() + ": required column '" + c + "' is missing");
    } else {
        const std::size_t n = first.size();
        require(n == schema.columns.size() || n == known.size(), ErrorKind::SchemaMismatch,
                path.string() + ": expected " + std::to_string(schema.columns.size()) + " columns, found " +
                    std::to_string(n));
        names.assign(known.begin(), known.begin() + static_cast<long>(n));
    }

    RawTable table;
    table.source = schema.name;
    std::vector<Plan> plan(names.size());
    for (const auto& col : known) {
        const auto it = std::find(names.begin(), names.end(), col);
        if (it == names.end() || schema.is_dropped(col)) continue;
        Plan& p = plan[static_cast<std::size_t>(it - names.begin())];
        if (col == schema.label_column) {
            p.role = Role::Label;
            continue;
        }
        p.role = Role::Feature;
        p.column = table.columns.size();
        table.columns.push_back(Column{col, schema.is_categorical(col), {}, {}});
    }
    require(std::any_of(plan.begin(), plan.end(), [](const Plan& p) { return p.role == Role::Label; }),
            ErrorKind::SchemaMismatch, path.string() + ": label column '" + schema.label_column + "' not found");

    std::set<std::string> normal;
    for (const auto& v : schema.normal_label_values) normal.insert(upper(v));

    auto consume = [&](const std::vector<std::string>& fields, std::size_t line_no) {
        require(fields.size() == names.size(), ErrorKind::SchemaMismatch,
                path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(names.size()) +
                    " fields, found " + std::to_string(fields.size()));
        bool missing_row = false;
        for (std::size_t f = 0; f < fields.size(); ++f) {
            const Plan& p = plan[f];
            if (p.role == Role::Label) {
                const std::uint8_t y = normal.count(upper(fields[f])) ? 0 : 1;
                table.labels.push_back(y);
                table.report.positives += y;
            } else if (p.role == Role::Feature) {
                Column& col = table.columns[p.column];
                if (col.categorical) {
                    col.text.push_back(fields[f]);
                    continue;
                }
                double v = kNaN;
                switch (parse_number(fields[f], v)) {
                    case Cell::Value: break;
                    case Cell::Missing: ++table.report.missing_cells; v = kNaN; missing_row = true; break;
                    case Cell::Infinite:
                        ++table.report.infinite_cells;
                        ++table.report.missing_cells;
                        v = kNaN;
                        missing_row = true;
                        break;
                    case Cell::Unparseable:
                        ++table.report.unparseable_cells;
                        ++table.report.missing_cells;
                        v = kNaN;
                        missing_row = true;
                        break;
                }
                col.numeric.push_back(v);
            }
        }
        if (missing_row) ++table.report.rows_with_missing;
        ++table.report.rows_read;
    };

    std::size_t line_no = 1;
    if (!header) consume(first, line_no);
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        consume(split_fields(line), line_no);
    }
    require(table.rows() > 0, ErrorKind::EmptyFile, path.string() + " has no data rows");
    return table;
}

// ---------------------------------------------------------------- splitting

RowSplit stratified_split(const std::vector<std::uint8_t>& labels, double test_fraction, std::uint64_t seed) {
    require(test_fraction > 0.0 && test_fraction < 1.0, ErrorKind::InvalidSize, "test fraction must lie in (0, 1)");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i] ? 1 : 0].push_back(i);
    require(!by_class[0].empty() && !by_class[1].empty(), ErrorKind::SingleClassDataset,
            "stratified split needs both classes");
    RowSplit out;
    for (int c = 0; c < 2; ++c) {
        auto idx = by_class[c];
        Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(c));
        rng.shuffle(idx);
        const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
        out.test.insert(out.test.end(), idx.begin(), idx.begin() + static_cast<long>(n_test));
        out.train.insert(out.train.end(), idx.begin() + static_cast<long>(n_test), idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

RawTable stratified_subsample(const RawTable& table, std::size_t rows, std::uint64_t seed) {
    if (rows >= table.rows()) return table;
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < table.rows(); ++i) by_class[table.labels[i] ? 1 : 0].push_back(i);
    const double pos_share = static_cast<double>(by_class[1].size()) / static_cast<double>(table.rows());
    std::size_t want[2];
    want[1] = std::min(by_class[1].size(), static_cast<std::size_t>(std::llround(pos_share * static_cast<double>(rows))));
    want[0] = std::min(by_class[0].size(), rows - want[1]);
    std::vector<std::size_t> chosen;
    for (int c = 0; c < 2; ++c) {
        auto idx = by_class[c];
        Rng rng = Rng::derive(seed, 100 + static_cast<std::uint64_t>(c));
        rng.shuffle(idx);
        chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<long>(want[c]));
    }
    std::sort(chosen.begin(), chosen.end());
    return table.select_rows(chosen);
}

// ---------------------------------------------------------------- preprocess

PreprocessedPair preprocess(const RawTable& train, const RawTable& test) {
    require(train.rows() > 0, ErrorKind::EmptyBatch, "training table is empty");

    std::vector<ColumnTransform> transforms;
    std::vector<std::string> names;
    std::vector<FeatureStats> stats;
    std::uint64_t h = 0xcbf29ce484222325ULL;

    for (const auto& col : train.columns) {
        ColumnTransform t;
        t.name = col.name;
        t.categorical = col.categorical;
        if (col.categorical) {
            for (const auto& v : col.text)
                if (!v.empty() && t.slot.emplace(v, t.vocabulary.size()).second) t.vocabulary.push_back(v);
            t.keep = t.vocabulary.size() > 1;
            if (t.keep)
                for (const auto& v : t.vocabulary) {
                    names.push_back(col.name + "=" + v);
                    stats.push_back({0.0, 1.0});
                }
        } else {
            std::vector<double> finite;
            finite.reserve(col.numeric.size());
            for (double v : col.numeric)
                if (std::isfinite(v)) finite.push_back(v);
            t.numeric.median = median_of(finite);
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (double v : col.numeric) {
                const double x = std::isfinite(v) ? v : t.numeric.median;
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            t.numeric.min = lo;
            t.numeric.max = hi;
            t.keep = hi > lo;
            if (t.keep) {
                names.push_back(col.name);
                stats.push_back({lo, hi});
            }
        }
        if (t.keep) {
            h = fnv1a(h, t.name);
            h = fnv1a(h, t.categorical ? 1.0 : 0.0);
            if (t.categorical)
                for (const auto& v : t.vocabulary) h = fnv1a(h, v);
            else
                h = fnv1a(fnv1a(fnv1a(h, t.numeric.median), t.numeric.min), t.numeric.max);
        }
        transforms.push_back(std::move(t));
    }
    require(!names.empty(), ErrorKind::SchemaMismatch, "every feature column is constant");

    const std::string fingerprint = hex64(h);
    return PreprocessedPair{apply(transforms, train, names, stats, fingerprint),
                            apply(transforms, test, names, stats, fingerprint)};
}

PreprocessedPair preprocess(const RawTable& raw, std::uint64_t split_seed, double test_fraction) {
    require(raw.rows() > 0, ErrorKind::EmptyBatch, "table is empty");
    const RowSplit rows = stratified_split(raw.labels, test_fraction, split_seed);
    return preprocess(raw.select_rows(rows.train), raw.select_rows(rows.test));
}

Tensor reshape_square(std::span<const double> features) {
    require(!features.empty(), ErrorKind::InvalidSize, "reshape needs at least one feature");
    std::size_t side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(features.size()))));
    while (side * side < features.size()) ++side;
    while (side > 1 && (side - 1) * (side - 1) >= features.size()) --side;
    Tensor out({1, side, side});
    std::copy(features.begin(), features.end(), out.data());
    return out;
}

RawTable concat(const std::vector<RawTable>& parts) {
    require(!parts.empty(), ErrorKind::EmptyFile, "nothing to concatenate");
    RawTable out = parts.front();
    for (std::size_t p = 1; p < parts.size(); ++p) {
        const RawTable& part = parts[p];
        require(part.source == out.source && part.columns.size() == out.columns.size(), ErrorKind::SchemaMismatch,
                "concatenated tables must share source and columns");
        for (std::size_t c = 0; c < out.columns.size(); ++c) {
            Column& dst = out.columns[c];
            const Column& src = part.columns[c];
            require(dst.name == src.name && dst.categorical == src.categorical, ErrorKind::SchemaMismatch,
                    "column '" + src.name + "' does not line up with '" + dst.name + "'");
            dst.numeric.insert(dst.numeric.end(), src.numeric.begin(), src.numeric.end());
            dst.text.insert(dst.text.end(), src.text.begin(), src.text.end());
        }
        out.labels.insert(out.labels.end(), part.labels.begin(), part.labels.end());
        out.source_ids.insert(out.source_ids.end(), part.source_ids.begin(), part.source_ids.end());
        out.report.rows_read += part.report.rows_read;
        out.report.rows_with_missing += part.report.rows_with_missing;
        out.report.missing_cells += part.report.missing_cells;
        out.report.infinite_cells += part.report.infinite_cells;
        out.report.unparseable_cells += part.report.unparseable_cells;
        out.report.positives += part.report.positives;
    }
    return out;
}

// ---------------------------------------------------------------- Tri-IDS

std::string canonical_column(DatasetName source, const std::string& column) {
    const auto& aliases = shared_aliases();
    if (const auto it = aliases.find({source, column}); it != aliases.end()) return it->second;
    const DatasetSchema& schema = schema_for(source);
    const bool listed = std::find(schema.columns.begin(), schema.columns.end(), column) != schema.columns.end() ||
                        std::find(schema.optional_columns.begin(), schema.optional_columns.end(), column) !=
                            schema.optional_columns.end();
    require(listed && source != DatasetName::TRI_IDS, ErrorKind::AliasMapIncomplete,
            "no canonical name for column '" + column + "' of " + std::string(to_string(source)));
    return source_prefix(source) + column;
}

RawTable build_tri_ids(const RawTable& bot_iot, const RawTable& nsl_kdd, const RawTable& cicids,
                       std::size_t target_rows, std::uint64_t seed) {
    require(bot_iot.source == DatasetName::BOT_IOT && nsl_kdd.source == DatasetName::NSL_KDD &&
                cicids.source == DatasetName::CICIDS2017,
            ErrorKind::SchemaMismatch, "Tri-IDS sources must be BOT-IoT, NSL-KDD and CICIDS2017 tables");
    require(target_rows >= 3, ErrorKind::InvalidSize, "target_rows must be at least 3");

    const RawTable* sources[3] = {&bot_iot, &nsl_kdd, &cicids};
    std::vector<RawTable> parts;
    for (std::size_t s = 0; s < 3; ++s) {
        const std::size_t quota = target_rows / 3 + (s < target_rows % 3 ? 1 : 0);
        parts.push_back(stratified_subsample(*sources[s], quota, mix64(seed) + s));
    }

    // Union of canonical columns, in first-seen order.
    RawTable merged;
    merged.source = DatasetName::TRI_IDS;
    std::map<std::string, std::size_t> index;
    std::vector<std::vector<std::pair<std::size_t, const Column*>>> mapping(3);
    for (std::size_t s = 0; s < 3; ++s)
        for (const auto& col : parts[s].columns) {
            const std::string name = canonical_column(parts[s].source, col.name);
            auto [it, fresh] = index.emplace(name, merged.columns.size());
            if (fresh) merged.columns.push_back(Column{name, col.categorical, {}, {}});
            require(merged.columns[it->second].categorical == col.categorical, ErrorKind::SchemaMismatch,
                    "canonical column '" + name + "' mixes categorical and numeric sources");
            mapping[s].push_back({it->second, &col});
        }

    for (std::size_t s = 0; s < 3; ++s) {
        const RawTable& part = parts[s];
        std::vector<const Column*> by_target(merged.columns.size(), nullptr);
        for (const auto& [target, col] : mapping[s]) by_target[target] = col;
        for (std::size_t c = 0; c < merged.columns.size(); ++c) {
            Column& dst = merged.columns[c];
            const Column* src = by_target[c];
            for (std::size_t r = 0; r < part.rows(); ++r) {
                if (dst.categorical)
                    dst.text.push_back(src ? canonical_value(dst.name, src->text[r]) : std::string());
                else
                    dst.numeric.push_back(src ? src->numeric[r] : 0.0);
            }
        }
        merged.labels.insert(merged.labels.end(), part.labels.begin(), part.labels.end());
        merged.source_ids.insert(merged.source_ids.end(), part.rows(), static_cast<int>(s));
        merged.report.rows_read += part.rows();
        merged.report.missing_cells += part.report.missing_cells;
        merged.report.infinite_cells += part.report.infinite_cells;
        merged.report.positives += static_cast<std::uint64_t>(std::count(part.labels.begin(), part.labels.end(), 1));
    }
    return merged;
}

// ---------------------------------------------------------------- cache

void write_split(const DatasetSplit& split, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::IoFailure, "cannot write " + path.string());
    out.write(kSplitMagic, sizeof kSplitMagic);
    std::uint64_t fp = 0;
    std::from_chars(split.fingerprint.data(), split.fingerprint.data() + split.fingerprint.size(), fp, 16);
    put_u64(out, fp);
    put_u64(out, split.rows());
    put_u64(out, split.features.rank() == 2 ? split.features.dim(1) : 0);
    for (double v : split.features.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
    out.write(reinterpret_cast<const char*>(split.labels.data()), static_cast<std::streamsize>(split.labels.size()));
    require(static_cast<bool>(out), ErrorKind::IoFailure, "failed writing " + path.string());
}

DatasetSplit read_split(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::MissingFile, path.string());
    char magic[8];
    in.read(magic, 8);
    require(in && std::memcmp(magic, kSplitMagic, 8) == 0, ErrorKind::SchemaMismatch,
            "not a split cache: " + path.string());
    DatasetSplit split;
    split.fingerprint = hex64(get_u64(in));
    const std::uint64_t rows = get_u64(in);
    const std::uint64_t cols = get_u64(in);
    split.features = Tensor({rows, cols});
    for (double& v : split.features.values()) v = std::bit_cast<double>(get_u64(in));
    split.labels.resize(rows);
    in.read(reinterpret_cast<char*>(split.labels.data()), static_cast<std::streamsize>(rows));
    require(static_cast<bool>(in), ErrorKind::IoFailure, "truncated split cache " + path.string());
    split.feature_names.reserve(cols);
    for (std::uint64_t c = 0; c < cols; ++c) split.feature_names.push_back("f" + std::to_string(c));
    split.feature_stats.assign(cols, FeatureStats{});
    return split;
}

}  // namespace kanids
