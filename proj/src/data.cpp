#include "cake/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cake/rng.hpp"
#include "cake/synthetic_constants.hpp"

namespace cake {

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
        throw std::invalid_argument("DataMatrix: expected " + std::to_string(rows_ * cols_) +
                                    " values, got " + std::to_string(values_.size()));
    }
    require_finite();
}

DataMatrix DataMatrix::select_rows(std::span<const std::size_t> indices) const {
    DataMatrix out(indices.size(), cols_);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        if (indices[r] >= rows_) {
            throw std::out_of_range("DataMatrix::select_rows: index out of range");
        }
        std::copy_n(values_.data() + indices[r] * cols_, cols_, out.values_.data() + r * cols_);
    }
    return out;
}

void DataMatrix::require_finite() const {
    for (std::size_t idx = 0; idx < values_.size(); ++idx) {
        if (!std::isfinite(values_[idx])) {
            throw std::invalid_argument("DataMatrix: non-finite value at row " +
                                        std::to_string(idx / std::max<std::size_t>(cols_, 1)) +
                                        ", col " + std::to_string(idx % std::max<std::size_t>(cols_, 1)));
        }
    }
}

std::size_t GroundTruth::non_noise_count() const {
    return static_cast<std::size_t>(
        std::count_if(labels.begin(), labels.end(), [](int l) { return l != kNoiseLabel; }));
}

void GroundTruth::validate() const {
    if (k_true < 1) {
        throw std::invalid_argument("GroundTruth: k_true must be positive");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int l = labels[i];
        if (l != kNoiseLabel && (l < 0 || l >= k_true)) {
            throw std::invalid_argument("GroundTruth: label " + std::to_string(l) + " at point " +
                                        std::to_string(i) + " outside [0, k_true)");
        }
    }
    if (non_noise_count() == 0) {
        throw std::invalid_argument("GroundTruth: every point is noise");
    }
}

GroundTruth GroundTruth::select(std::span<const std::size_t> indices) const {
    GroundTruth out;
    out.k_true = k_true;
    out.labels.reserve(indices.size());
    for (auto i : indices) {
        out.labels.push_back(labels.at(i));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic families

std::string to_string(SyntheticFamily family) {
    switch (family) {
        case SyntheticFamily::S1: return "s1";
        case SyntheticFamily::S2: return "s2";
        case SyntheticFamily::S3: return "s3";
        case SyntheticFamily::S4: return "s4";
        case SyntheticFamily::S5: return "s5";
        case SyntheticFamily::S6: return "s6";
        case SyntheticFamily::S7: return "s7";
        case SyntheticFamily::TwoMoons: return "moons";
        case SyntheticFamily::Blobs: return "blobs";
    }
    return "unknown";
}

SyntheticFamily parse_family(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    static const std::map<std::string, SyntheticFamily> kNames = {
        {"s1", SyntheticFamily::S1},          {"s2", SyntheticFamily::S2},
        {"s3", SyntheticFamily::S3},          {"s4", SyntheticFamily::S4},
        {"s5", SyntheticFamily::S5},          {"s6", SyntheticFamily::S6},
        {"s7", SyntheticFamily::S7},          {"moons", SyntheticFamily::TwoMoons},
        {"two_moons", SyntheticFamily::TwoMoons}, {"twomoons", SyntheticFamily::TwoMoons},
        {"blobs", SyntheticFamily::Blobs},
    };
    auto it = kNames.find(lower);
    if (it == kNames.end()) {
        throw std::invalid_argument("unknown synthetic family '" + std::string(name) + "'");
    }
    return it->second;
}

namespace {

template <std::size_t N>
std::vector<ClusterShape> shapes_from(const std::array<synthetic::ClusterConstant, N>& constants) {
    std::vector<ClusterShape> out;
    for (const auto& c : constants) {
        out.push_back({{c.cx, c.cy}, c.stddev, c.size});
    }
    return out;
}

std::size_t default_noise(SyntheticFamily family) {
    switch (family) {
        case SyntheticFamily::S3: return synthetic::kS3Noise;
        case SyntheticFamily::TwoMoons:
            return static_cast<std::size_t>(
                std::llround(synthetic::kMoonsOutlierFraction * synthetic::kMoonsTotal));
        default: return 0;
    }
}

// Largest-remainder apportionment of `total` across `weights`.
std::vector<std::size_t> apportion(const std::vector<std::size_t>& weights, std::size_t total) {
    const double sum = static_cast<double>(std::accumulate(weights.begin(), weights.end(), std::size_t{0}));
    std::vector<std::size_t> out(weights.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double exact = static_cast<double>(total) * static_cast<double>(weights[i]) / sum;
        out[i] = static_cast<std::size_t>(std::floor(exact));
        assigned += out[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < total; ++r, ++assigned) {
        ++out[remainders[r % remainders.size()].second];
    }
    return out;
}

void append_gaussian(std::vector<double>& values, std::vector<int>& labels, const ClusterShape& shape,
                     std::size_t count, int label, Rng& rng) {
    for (std::size_t p = 0; p < count; ++p) {
        for (double c : shape.center) {
            values.push_back(rng.normal(c, shape.stddev));
        }
        labels.push_back(label);
    }
}

void append_uniform(std::vector<double>& values, std::vector<int>& labels, std::span<const double> lo,
                    std::span<const double> hi, std::size_t count, Rng& rng) {
    for (std::size_t p = 0; p < count; ++p) {
        for (std::size_t j = 0; j < lo.size(); ++j) {
            values.push_back(rng.uniform(lo[j], hi[j]));
        }
        labels.push_back(kNoiseLabel);
    }
}

struct Sizes {
    std::vector<std::size_t> clusters;
    std::size_t noise = 0;
};

Sizes resolve_sizes(const SyntheticSpec& spec, const std::vector<std::size_t>& defaults,
                    std::size_t default_noise_count) {
    Sizes sizes{defaults, default_noise_count};
    if (spec.total_points) {
        if (*spec.total_points == 0) {
            throw std::invalid_argument("synthetic: total_points must be positive");
        }
        auto weights = defaults;
        if (default_noise_count > 0) {
            weights.push_back(default_noise_count);
        }
        auto scaled = apportion(weights, *spec.total_points);
        if (default_noise_count > 0) {
            sizes.noise = scaled.back();
            scaled.pop_back();
        }
        sizes.clusters = scaled;
    }
    if (!spec.cluster_sizes.empty()) {
        if (spec.cluster_sizes.size() != defaults.size()) {
            throw std::invalid_argument("synthetic: expected " + std::to_string(defaults.size()) +
                                        " cluster sizes, got " + std::to_string(spec.cluster_sizes.size()));
        }
        sizes.clusters = spec.cluster_sizes;
    }
    if (spec.noise_points) {
        sizes.noise = *spec.noise_points;
    }
    for (auto s : sizes.clusters) {
        if (s == 0) {
            throw std::invalid_argument("synthetic: cluster sizes must be positive");
        }
    }
    return sizes;
}

Dataset generate_gaussian_family(const SyntheticSpec& spec) {
    const auto shapes = family_clusters(spec.family);
    std::vector<std::size_t> defaults;
    for (const auto& s : shapes) {
        defaults.push_back(s.size);
    }
    const Sizes sizes = resolve_sizes(spec, defaults, default_noise(spec.family));
    const std::size_t dims = shapes.front().center.size();

    std::vector<double> values;
    std::vector<int> labels;
    for (std::size_t c = 0; c < shapes.size(); ++c) {
        Rng rng(derive_seed(spec.seed, "cluster", c));
        append_gaussian(values, labels, shapes[c], sizes.clusters[c], static_cast<int>(c), rng);
    }
    if (sizes.noise > 0) {
        std::vector<double> lo(dims, std::numeric_limits<double>::infinity());
        std::vector<double> hi(dims, -std::numeric_limits<double>::infinity());
        for (const auto& s : shapes) {
            for (std::size_t j = 0; j < dims; ++j) {
                lo[j] = std::min(lo[j], s.center[j] - synthetic::kS3NoisePad);
                hi[j] = std::max(hi[j], s.center[j] + synthetic::kS3NoisePad);
            }
        }
        Rng rng(derive_seed(spec.seed, "noise"));
        append_uniform(values, labels, lo, hi, sizes.noise, rng);
    }
    const std::size_t n = labels.size();
    return {DataMatrix(n, dims, std::move(values)),
            GroundTruth{std::move(labels), static_cast<int>(shapes.size())}};
}

Dataset generate_moons(const SyntheticSpec& spec) {
    const std::size_t default_outliers = default_noise(spec.family);
    const std::size_t default_moon_points = synthetic::kMoonsTotal - default_outliers;
    const std::vector<std::size_t> defaults = {default_moon_points / 2,
                                               default_moon_points - default_moon_points / 2};
    const Sizes sizes = resolve_sizes(spec, defaults, default_outliers);

    std::vector<double> values;
    std::vector<int> labels;
    for (std::size_t moon = 0; moon < 2; ++moon) {
        Rng rng(derive_seed(spec.seed, "cluster", moon));
        const std::size_t count = sizes.clusters[moon];
        for (std::size_t p = 0; p < count; ++p) {
            const double t = count == 1 ? 0.0
                                        : std::numbers::pi * static_cast<double>(p) /
                                              static_cast<double>(count - 1);
            double x = moon == 0 ? std::cos(t) : 1.0 - std::cos(t);
            double y = moon == 0 ? std::sin(t) : 0.5 - std::sin(t);
            values.push_back(x + rng.normal(0.0, synthetic::kMoonsNoise));
            values.push_back(y + rng.normal(0.0, synthetic::kMoonsNoise));
            labels.push_back(static_cast<int>(moon));
        }
    }
    const auto& box = synthetic::kMoonsOutlierBox;
    const std::array<double, 2> lo = {box[0], box[2]};
    const std::array<double, 2> hi = {box[1], box[3]};
    Rng rng(derive_seed(spec.seed, "noise"));
    append_uniform(values, labels, lo, hi, sizes.noise, rng);
    const std::size_t n = labels.size();
    return {DataMatrix(n, 2, std::move(values)), GroundTruth{std::move(labels), 2}};
}

Dataset generate_blobs(const SyntheticSpec& spec) {
    if (spec.blob_dims == 0 || spec.blob_clusters == 0) {
        throw std::invalid_argument("synthetic: blobs need positive dims and clusters");
    }
    const std::size_t k = spec.blob_clusters;
    std::vector<std::size_t> defaults(k, 1);
    auto sized = spec;
    if (!sized.total_points && sized.cluster_sizes.empty()) {
        sized.total_points = synthetic::kBlobDefaultPoints;
    }
    const Sizes sizes = resolve_sizes(sized, defaults, 0);

    Rng center_rng(derive_seed(spec.seed, "centers"));
    std::vector<ClusterShape> shapes(k);
    for (auto& shape : shapes) {
        shape.center.resize(spec.blob_dims);
        for (auto& c : shape.center) {
            c = center_rng.uniform(-synthetic::kBlobBox, synthetic::kBlobBox);
        }
        shape.stddev = spec.blob_std;
    }
    std::vector<double> values;
    std::vector<int> labels;
    for (std::size_t c = 0; c < k; ++c) {
        Rng rng(derive_seed(spec.seed, "cluster", c));
        append_gaussian(values, labels, shapes[c], sizes.clusters[c], static_cast<int>(c), rng);
    }
    const std::size_t n = labels.size();
    return {DataMatrix(n, spec.blob_dims, std::move(values)),
            GroundTruth{std::move(labels), static_cast<int>(k)}};
}

}  // namespace

std::vector<ClusterShape> family_clusters(SyntheticFamily family) {
    switch (family) {
        case SyntheticFamily::S1: return shapes_from(synthetic::kS1);
        case SyntheticFamily::S2: return shapes_from(synthetic::kS2);
        case SyntheticFamily::S3: return shapes_from(synthetic::kS3);
        case SyntheticFamily::S4: return shapes_from(synthetic::kS4);
        case SyntheticFamily::S5: return shapes_from(synthetic::kS5);
        case SyntheticFamily::S6: return shapes_from(synthetic::kS6);
        case SyntheticFamily::S7: return shapes_from(synthetic::kS7);
        case SyntheticFamily::TwoMoons:
        case SyntheticFamily::Blobs: break;
    }
    throw std::invalid_argument("family_clusters: " + to_string(family) + " is not a Gaussian family");
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
    switch (spec.family) {
        case SyntheticFamily::TwoMoons: return generate_moons(spec);
        case SyntheticFamily::Blobs: return generate_blobs(spec);
        default: return generate_gaussian_family(spec);
    }
}

// ---------------------------------------------------------------------------
// CSV

std::vector<std::string> split_csv_record(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace

CsvData parse_csv(std::istream& in, bool has_header, std::optional<std::size_t> label_column) {
    CsvData out;
    std::vector<double> values;
    std::vector<int> labels;
    std::map<std::string, int> label_codes;
    std::size_t width = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;
    std::string line;
    bool header_pending = has_header;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_csv_record(line);
        if (header_pending) {
            for (auto& f : fields) {
                out.header.emplace_back(trim(f));
            }
            width = fields.size();
            header_pending = false;
            continue;
        }
        if (width == 0) {
            width = fields.size();
        }
        if (fields.size() != width) {
            throw ParseError("csv: row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                 " fields, expected " + std::to_string(width),
                             line_no, fields.size());
        }
        if (label_column && *label_column >= width) {
            throw ParseError("csv: label column " + std::to_string(*label_column) + " out of range", line_no,
                             *label_column + 1);
        }
        for (std::size_t col = 0; col < width; ++col) {
            const std::string_view cell = trim(fields[col]);
            if (label_column && col == *label_column) {
                const std::string token(cell);
                if (token == "-1") {
                    labels.push_back(kNoiseLabel);
                } else {
                    auto [it, inserted] = label_codes.try_emplace(token, static_cast<int>(label_codes.size()));
                    labels.push_back(it->second);
                }
                continue;
            }
            double v = 0.0;
            const char* first = cell.data();
            const char* last = cell.data() + cell.size();
            if (!cell.empty() && *first == '+') {
                ++first;
            }
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
                throw ParseError("csv: non-numeric cell '" + std::string(cell) + "' at row " +
                                     std::to_string(line_no) + ", col " + std::to_string(col + 1),
                                 line_no, col + 1);
            }
            values.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) {
        throw ParseError("csv: no data rows", line_no, 0);
    }
    const std::size_t d = width - (label_column ? 1 : 0);
    if (d == 0) {
        throw ParseError("csv: no numeric columns", line_no, 0);
    }
    out.data = DataMatrix(rows, d, std::move(values));
    if (label_column) {
        GroundTruth truth{std::move(labels), static_cast<int>(label_codes.size())};
        truth.validate();
        out.truth = std::move(truth);
    }
    return out;
}

CsvData load_csv(const std::filesystem::path& path, bool has_header, std::optional<std::size_t> label_column) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("csv: cannot open '" + path.string() + "'");
    }
    return parse_csv(in, has_header, label_column);
}

std::string format_real(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

void save_csv(std::ostream& out, const DataMatrix& data, const GroundTruth* truth, bool header) {
    if (truth && truth->size() != data.rows()) {
        throw std::invalid_argument("save_csv: label count does not match rows");
    }
    if (header) {
        for (std::size_t j = 0; j < data.cols(); ++j) {
            out << (j ? "," : "") << 'x' << j;
        }
        if (truth) {
            out << ",label";
        }
        out << '\n';
    }
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t j = 0; j < data.cols(); ++j) {
            out << (j ? "," : "") << format_real(data(i, j));
        }
        if (truth) {
            out << ',' << truth->labels[i];
        }
        out << '\n';
    }
}

void save_csv(const std::filesystem::path& path, const DataMatrix& data, const GroundTruth* truth, bool header) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("csv: cannot write '" + path.string() + "'");
    }
    save_csv(out, data, truth, header);
    if (!out) {
        throw std::runtime_error("csv: write failed for '" + path.string() + "'");
    }
}

DataMatrix standardize(const DataMatrix& data) {
    if (data.rows() < 2) {
        throw std::invalid_argument("standardize: need at least two rows");
    }
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    DataMatrix out(n, d);
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mean += data(i, j);
        }
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = data(i, j) - mean;
            var += diff * diff;
        }
        const double sd = std::sqrt(var / static_cast<double>(n));
        const bool constant = sd <= 1e-300 || sd <= 1e-14 * std::max(1.0, std::abs(mean));
        for (std::size_t i = 0; i < n; ++i) {
            out(i, j) = constant ? 0.0 : (data(i, j) - mean) / sd;
        }
    }
    return out;
}

nlohmann::json dataset_manifest(const SyntheticSpec& spec, const Dataset& dataset) {
    return {
        {"family", to_string(spec.family)},
        {"seed", spec.seed},
        {"n", dataset.data.rows()},
        {"d", dataset.data.cols()},
        {"k_true", dataset.truth.k_true},
        {"noise_points", dataset.truth.size() - dataset.truth.non_noise_count()},
        {"constants_version", synthetic::kSyntheticConstantsVersion},
    };
}

}  // namespace cake
