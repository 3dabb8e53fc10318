#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace moods {

inline constexpr int kMinority = 1;
inline constexpr int kMajority = 0;

struct LabeledPoint {
    std::vector<double> features;
    int label = kMajority;  // 1 = minority
};

/// Ordered collection of labeled points sharing one feature width.
///
/// Construction through `Dataset::make` enforces the dataset invariants
/// (non-empty, both classes present, minority count <= majority count,
/// finite features, consistent width). Intermediate sets such as a
/// one-class partition are built with the unchecked constructor.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::string name, std::size_t width, std::vector<LabeledPoint> points = {});

    /// Checked construction; throws ClassError / ArgumentError on invariant violations.
    static Dataset make(std::string name, std::vector<LabeledPoint> points, std::string minority_label = "1");

    const std::string& name() const { return name_; }
    std::size_t width() const { return width_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    const std::string& minority_label() const { return minority_label_; }
    void set_minority_label(std::string label) { minority_label_ = std::move(label); }

    const LabeledPoint& operator[](std::size_t i) const { return points_[i]; }
    LabeledPoint& operator[](std::size_t i) { return points_[i]; }
    const std::vector<LabeledPoint>& points() const { return points_; }
    auto begin() const { return points_.begin(); }
    auto end() const { return points_.end(); }

    void push_back(LabeledPoint p);
    void append(const Dataset& other);

    std::size_t minority_count() const;
    std::size_t majority_count() const;

    /// Subset in the order of `indices`.
    Dataset subset(const std::vector<std::size_t>& indices) const;

    friend bool operator==(const Dataset& a, const Dataset& b);

private:
    std::string name_;
    std::size_t width_ = 0;
    std::string minority_label_ = "1";
    std::vector<LabeledPoint> points_;
};

/// Throws if the dataset violates the non-empty / two-class / minority <= majority invariants.
void check_dataset(const Dataset& d);

/// Column of the label: either a header name or a 0-based index.
using ColumnRef = std::variant<std::string, std::size_t>;

struct CsvSchema {
    ColumnRef label_column = std::size_t{0};
    std::string minority_label;
    bool has_header = false;
    std::vector<std::string> ignore_columns;  // header names skipped entirely
    bool checked = true;  // false skips the minority <= majority invariant
};

/// Dataset manifest as stored on disk: {name, path, label_column, minority_label, has_header}.
struct Manifest {
    std::string name;
    std::filesystem::path path;  // resolved against the manifest's directory
    CsvSchema schema;
};

Manifest load_manifest(const std::filesystem::path& manifest_path);
Dataset load_dataset(const Manifest& manifest);

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema, std::string name = {});
Dataset parse_csv(const std::string& text, const CsvSchema& schema, std::string name = {});

/// Writes features f0..f{n-1} then a `label` column with 0/1 values (minority = 1).
/// With `provenance`, an extra column carries one tag per row.
void save_csv(const Dataset& d, const std::filesystem::path& path,
              const std::vector<std::string>* provenance = nullptr);
std::string to_csv(const Dataset& d, const std::vector<std::string>* provenance = nullptr);

/// Schema matching the layout produced by save_csv (provenance ignored, no balance check).
CsvSchema saved_csv_schema();

struct SplitFractions {
    double train = 0.6;
    double validation = 0.2;
    double test = 0.2;
};

/// Affine per-feature transform fitted on a training part.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;  // sample std; 1 for constant features
    std::vector<bool> constant;

    LabeledPoint apply(const LabeledPoint& p) const;
    Dataset apply(const Dataset& d) const;
};

Standardizer fit_standardizer(const Dataset& train);

struct DataSplit {
    Dataset train;
    Dataset validation;
    Dataset test;
    SplitFractions fractions;
    std::uint64_t seed = 0;
    // Row indices into the source dataset, in part order.
    std::vector<std::size_t> train_index;
    std::vector<std::size_t> validation_index;
    std::vector<std::size_t> test_index;
};

/// Stratified shuffle split. Per class, the test and validation counts are
/// floor(fraction * class size), raised to 1 when the class would otherwise
/// be missing from a part; the rest goes to train.
DataSplit split(const Dataset& d, SplitFractions fractions, std::uint64_t seed);

/// Z-scores every part with statistics fitted on the train part only.
DataSplit standardize(const DataSplit& split);

std::pair<Dataset, Dataset> class_partition(const Dataset& d);

/// Sample variance (n - 1 denominator); 0 for fewer than two values.
double sample_variance(const std::vector<double>& values);

}  // namespace moods
