#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cake {

/// Dense row-major real matrix. Used for datasets (n x d), centroids (k x d)
/// and per-run silhouette tables (n x R).
class DataMatrix {
public:
    DataMatrix() = default;
    DataMatrix(std::size_t rows, std::size_t cols);
    /// Throws std::invalid_argument on a size mismatch or non-finite entry.
    DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }

    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }

    const std::vector<double>& values() const { return values_; }

    DataMatrix select_rows(std::span<const std::size_t> indices) const;

    /// Throws std::invalid_argument if any entry is NaN or infinite.
    void require_finite() const;

    friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

inline constexpr int kNoiseLabel = -1;

/// Reference class labels. Noise points carry kNoiseLabel.
struct GroundTruth {
    std::vector<int> labels;
    int k_true = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t non_noise_count() const;
    /// Throws std::invalid_argument when labels fall outside [0, k_true) or
    /// every point is noise.
    void validate() const;
    GroundTruth select(std::span<const std::size_t> indices) const;
};

enum class SyntheticFamily { S1, S2, S3, S4, S5, S6, S7, TwoMoons, Blobs };

std::string to_string(SyntheticFamily family);
/// Accepts "s1".."s7", "moons"/"two_moons"/"twomoons", "blobs" (case-insensitive).
SyntheticFamily parse_family(std::string_view name);

struct SyntheticSpec {
    SyntheticFamily family = SyntheticFamily::S1;
    std::uint64_t seed = 0;
    /// Rescales the family's default sizes (clusters and noise) to this total.
    std::optional<std::size_t> total_points;
    /// Replaces per-cluster sizes; must match the family's cluster count.
    std::vector<std::size_t> cluster_sizes;
    std::optional<std::size_t> noise_points;
    /// Blobs only.
    std::size_t blob_dims = 20;
    std::size_t blob_clusters = 10;
    double blob_std = 1.0;
};

struct Dataset {
    DataMatrix data;
    GroundTruth truth;
};

/// Pure function of the SyntheticSpec fields. Points are emitted cluster by cluster, noise last.
Dataset generate_synthetic(const SyntheticSpec& spec);

/// Per-cluster parameters of a family at its default sizes (exposed for tests).
struct ClusterShape {
    std::vector<double> center;
    double stddev = 1.0;
    std::size_t size = 0;
};
std::vector<ClusterShape> family_clusters(SyntheticFamily family);

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t col)
        : std::runtime_error(what), row_(row), col_(col) {}
    std::size_t row() const { return row_; }
    std::size_t col() const { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

struct CsvData {
    DataMatrix data;
    std::optional<GroundTruth> truth;
    std::vector<std::string> header;
};

/// Reads a rectangular numeric CSV. The optional label column may hold any
/// tokens; they are re-encoded to 0..k-1 by first occurrence, except the
/// literal "-1", which marks noise.
CsvData load_csv(const std::filesystem::path& path, bool has_header,
                 std::optional<std::size_t> label_column = std::nullopt);
CsvData parse_csv(std::istream& in, bool has_header,
                  std::optional<std::size_t> label_column = std::nullopt);

/// Splits one CSV record (quoted fields with "" escapes supported).
std::vector<std::string> split_csv_record(std::string_view line);

/// Writes values with 17 significant digits; labels (if given) as a final
/// "label" column.
void save_csv(std::ostream& out, const DataMatrix& data, const GroundTruth* truth = nullptr,
              bool header = true);
void save_csv(const std::filesystem::path& path, const DataMatrix& data,
              const GroundTruth* truth = nullptr, bool header = true);

/// Column-wise z-scoring with population std; constant columns become zero.
DataMatrix standardize(const DataMatrix& data);

nlohmann::json dataset_manifest(const SyntheticSpec& spec, const Dataset& dataset);

/// 17 significant digits ("%.17g"), enough for an exact round trip.
std::string format_real(double value);

}  // namespace cake
