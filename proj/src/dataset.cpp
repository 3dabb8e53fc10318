#include "moods/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"

#include "moods/error.hpp"
#include "moods/random.hpp"

namespace moods {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && ptr == end && std::isfinite(out);
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

Dataset::Dataset(std::string name, std::size_t width, std::vector<LabeledPoint> points)
    : name_(std::move(name)), width_(width), points_(std::move(points)) {
    for (const auto& p : points_) {
        if (p.features.size() != width_) throw ArgumentError("point width does not match dataset width");
    }
}

Dataset Dataset::make(std::string name, std::vector<LabeledPoint> points, std::string minority_label) {
    if (points.empty()) throw ClassError("dataset is empty");
    const std::size_t width = points.front().features.size();
    for (const auto& p : points) {
        if (p.label != kMinority && p.label != kMajority) throw ArgumentError("label must be 0 or 1");
        for (double v : p.features) {
            if (!std::isfinite(v)) throw ArgumentError("non-finite feature value");
        }
    }
    Dataset d(std::move(name), width, std::move(points));
    d.minority_label_ = std::move(minority_label);
    check_dataset(d);
    return d;
}

void Dataset::push_back(LabeledPoint p) {
    if (points_.empty() && width_ == 0) width_ = p.features.size();
    if (p.features.size() != width_) throw ArgumentError("point width does not match dataset width");
    points_.push_back(std::move(p));
}

void Dataset::append(const Dataset& other) {
    for (const auto& p : other) push_back(p);
}

std::size_t Dataset::minority_count() const {
    return static_cast<std::size_t>(
        std::count_if(points_.begin(), points_.end(), [](const LabeledPoint& p) { return p.label == kMinority; }));
}

std::size_t Dataset::majority_count() const { return points_.size() - minority_count(); }

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    Dataset out(name_, width_);
    out.minority_label_ = minority_label_;
    out.points_.reserve(indices.size());
    for (auto i : indices) out.points_.push_back(points_.at(i));
    return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
    if (a.width_ != b.width_ || a.points_.size() != b.points_.size()) return false;
    for (std::size_t i = 0; i < a.points_.size(); ++i) {
        if (a.points_[i].label != b.points_[i].label || a.points_[i].features != b.points_[i].features) return false;
    }
    return true;
}

void check_dataset(const Dataset& d) {
    if (d.empty()) throw ClassError("dataset '" + d.name() + "' is empty");
    const auto minority = d.minority_count();
    const auto majority = d.majority_count();
    if (minority == 0 || majority == 0) throw ClassError("dataset '" + d.name() + "' contains a single class");
    if (minority > majority) {
        throw ClassError("dataset '" + d.name() + "': minority count " + std::to_string(minority) +
                         " exceeds majority count " + std::to_string(majority));
    }
}

// ---------------------------------------------------------------------------
// CSV

Dataset parse_csv(const std::string& text, const CsvSchema& schema, std::string name) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> label_col;
    std::optional<std::size_t> n_cols;
    std::vector<bool> skip;

    if (const auto* idx = std::get_if<std::size_t>(&schema.label_column)) label_col = *idx;

    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;

    bool header_pending = schema.has_header;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (line_no == 1 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
        if (trim(view).empty()) continue;
        auto fields = split_fields(view);

        if (header_pending) {
            header_pending = false;
            n_cols = fields.size();
            if (const auto* col = std::get_if<std::string>(&schema.label_column)) {
                auto it = std::find(fields.begin(), fields.end(), *col);
                if (it == fields.end()) throw ParseError("label column '" + *col + "' not in header", line_no);
                label_col = static_cast<std::size_t>(it - fields.begin());
            }
            skip.assign(fields.size(), false);
            for (std::size_t c = 0; c < fields.size(); ++c) {
                skip[c] = std::find(schema.ignore_columns.begin(), schema.ignore_columns.end(), fields[c]) !=
                          schema.ignore_columns.end();
            }
            continue;
        }
        if (!label_col) throw ParseError("label column given by name but the file has no header");
        if (!n_cols) n_cols = fields.size();
        if (fields.size() != *n_cols) {
            throw ParseError("expected " + std::to_string(*n_cols) + " columns, found " + std::to_string(fields.size()),
                             line_no);
        }
        if (*label_col >= fields.size()) throw ParseError("label column index out of range", line_no);

        std::vector<double> features;
        features.reserve(fields.size() - 1);
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (c == *label_col || (c < skip.size() && skip[c])) continue;
            double v;
            if (!parse_double(fields[c], v)) {
                throw ParseError("non-numeric feature '" + std::string(fields[c]) + "' in column " + std::to_string(c),
                                 line_no);
            }
            features.push_back(v);
        }
        rows.push_back(std::move(features));
        raw_labels.emplace_back(fields[*label_col]);
    }

    if (rows.empty()) throw ClassError("no data rows");
    const std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
    if (distinct.size() < 2) throw ClassError("label column holds a single class");
    if (distinct.size() > 2) throw ClassError("label column holds " + std::to_string(distinct.size()) + " classes");
    if (!distinct.count(schema.minority_label)) {
        throw ClassError("minority label '" + schema.minority_label + "' does not occur in the label column");
    }

    std::vector<LabeledPoint> points;
    points.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        points.push_back({std::move(rows[i]), raw_labels[i] == schema.minority_label ? kMinority : kMajority});
    }
    if (!schema.checked) {
        const auto width = points.front().features.size();
        Dataset d(std::move(name), width, std::move(points));
        d.set_minority_label(schema.minority_label);
        return d;
    }
    return Dataset::make(std::move(name), std::move(points), schema.minority_label);
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema, std::string name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (name.empty()) name = path.stem().string();
    return parse_csv(buf.str(), schema, std::move(name));
}

std::string to_csv(const Dataset& d, const std::vector<std::string>* provenance) {
    if (provenance && provenance->size() != d.size()) throw ArgumentError("provenance length mismatch");
    std::string out;
    for (std::size_t c = 0; c < d.width(); ++c) out += "f" + std::to_string(c) + ",";
    out += "label";
    if (provenance) out += ",provenance";
    out += '\n';
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (double v : d[i].features) {
            out += format_double(v);
            out += ',';
        }
        out += d[i].label == kMinority ? '1' : '0';
        if (provenance) out += "," + (*provenance)[i];
        out += '\n';
    }
    return out;
}

void save_csv(const Dataset& d, const std::filesystem::path& path, const std::vector<std::string>* provenance) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_csv(d, provenance);
    if (!out) throw IoError("write failed for " + path.string());
}

CsvSchema saved_csv_schema() { return CsvSchema{std::string("label"), "1", true, {"provenance"}, false}; }

Manifest load_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest " + manifest_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("manifest " + manifest_path.string() + ": " + e.what());
    }
    Manifest m;
    try {
        m.name = j.at("name").get<std::string>();
        std::filesystem::path p = j.at("path").get<std::string>();
        m.path = p.is_relative() ? manifest_path.parent_path() / p : p;
        const auto& col = j.at("label_column");
        if (col.is_number_unsigned()) {
            m.schema.label_column = col.get<std::size_t>();
        } else {
            m.schema.label_column = col.get<std::string>();
        }
        const auto& minority = j.at("minority_label");
        m.schema.minority_label = minority.is_string() ? minority.get<std::string>() : minority.dump();
        m.schema.has_header = j.value("has_header", false);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("manifest " + manifest_path.string() + ": " + e.what());
    }
    return m;
}

Dataset load_dataset(const Manifest& manifest) { return load_csv(manifest.path, manifest.schema, manifest.name); }

// ---------------------------------------------------------------------------
// Splitting and scaling

DataSplit split(const Dataset& d, SplitFractions fractions, std::uint64_t seed) {
    check_dataset(d);
    if (fractions.train <= 0 || fractions.validation <= 0 || fractions.test <= 0) {
        throw ArgumentError("split fractions must be positive");
    }
    if (std::abs(fractions.train + fractions.validation + fractions.test - 1.0) > 1e-9) {
        throw ArgumentError("split fractions must sum to 1");
    }

    DataSplit out;
    out.fractions = fractions;
    out.seed = seed;

    for (int label : {kMinority, kMajority}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (d[i].label == label) members.push_back(i);
        }
        const std::size_t n = members.size();
        if (n < 3) {
            throw SplitError("class " + std::to_string(label) + " has " + std::to_string(n) +
                             " points; at least 3 are needed to stratify");
        }
        Rng rng(seed, static_cast<std::uint64_t>(label));
        rng.shuffle(members);

        auto count = [n](double f) {
            return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(f * static_cast<double>(n) + 1e-9)));
        };
        const std::size_t n_test = count(fractions.test);
        const std::size_t n_val = count(fractions.validation);
        if (n_test + n_val >= n) {
            throw SplitError("class " + std::to_string(label) + " too small to leave training points");
        }
        out.test_index.insert(out.test_index.end(), members.begin(), members.begin() + n_test);
        out.validation_index.insert(out.validation_index.end(), members.begin() + n_test,
                                    members.begin() + n_test + n_val);
        out.train_index.insert(out.train_index.end(), members.begin() + n_test + n_val, members.end());
    }
    std::sort(out.train_index.begin(), out.train_index.end());
    std::sort(out.validation_index.begin(), out.validation_index.end());
    std::sort(out.test_index.begin(), out.test_index.end());

    const auto n_train = out.train_index.size();
    const auto n_val = out.validation_index.size();
    const auto n_test = out.test_index.size();
    if (n_train <= n_test) throw SplitError("train part must be larger than test part");
    if (n_val > 2 * n_test || n_test > 2 * n_val) throw SplitError("validation and test sizes differ by more than 2x");

    out.train = d.subset(out.train_index);
    out.validation = d.subset(out.validation_index);
    out.test = d.subset(out.test_index);
    return out;
}

Standardizer fit_standardizer(const Dataset& train) {
    const std::size_t n = train.width();
    Standardizer s{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0), std::vector<bool>(n, true)};
    if (train.size() < 2) return s;
    std::vector<double> column(train.size());
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t i = 0; i < train.size(); ++i) column[i] = train[i].features[c];
        double mean = 0;
        for (double v : column) mean += v;
        mean /= static_cast<double>(column.size());
        const double sd = std::sqrt(sample_variance(column));
        if (sd > 0) {
            s.mean[c] = mean;
            s.scale[c] = sd;
            s.constant[c] = false;
        }
    }
    return s;
}

LabeledPoint Standardizer::apply(const LabeledPoint& p) const {
    LabeledPoint out = p;
    for (std::size_t c = 0; c < out.features.size(); ++c) {
        if (!constant[c]) out.features[c] = (out.features[c] - mean[c]) / scale[c];
    }
    return out;
}

Dataset Standardizer::apply(const Dataset& d) const {
    Dataset out(d.name(), d.width());
    out.set_minority_label(d.minority_label());
    for (const auto& p : d) out.push_back(apply(p));
    return out;
}

DataSplit standardize(const DataSplit& split) {
    const auto s = fit_standardizer(split.train);
    DataSplit out = split;
    out.train = s.apply(split.train);
    out.validation = s.apply(split.validation);
    out.test = s.apply(split.test);
    return out;
}

std::pair<Dataset, Dataset> class_partition(const Dataset& d) {
    Dataset minority(d.name(), d.width());
    Dataset majority(d.name(), d.width());
    minority.set_minority_label(d.minority_label());
    majority.set_minority_label(d.minority_label());
    for (const auto& p : d) (p.label == kMinority ? minority : majority).push_back(p);
    return {std::move(minority), std::move(majority)};
}

double sample_variance(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(n - 1);
}

}  // namespace moods
