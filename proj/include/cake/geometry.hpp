#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cake/cluster.hpp"

namespace cake {

enum class SilhouetteMode { Exact, Centroid, Kernel };

std::string to_string(SilhouetteMode mode);
SilhouetteMode parse_silhouette_mode(std::string_view name);

/// (b - a) / max(a, b), with 0 when both vanish.
inline double silhouette_value(double a, double b) {
    const double m = a > b ? a : b;
    return m > 0.0 ? (b - a) / m : 0.0;
}

/// Exact silhouettes for one partition. Points in singleton clusters get 0.
/// Empty labels are ignored when taking the nearest other cluster; fewer than
/// two occupied clusters is an error.
std::vector<double> silhouette_exact(const DataMatrix& data, const Partition& partition);

/// Exact silhouettes for every run (n x R). Pairwise distances are computed
/// once per point and shared across runs.
DataMatrix silhouette_exact_ensemble(const DataMatrix& data, const LabelMatrix& ensemble, unsigned threads = 0);

/// Centroid proxy: a = distance to own centroid, b = distance to the nearest
/// other centroid. Centroids are recomputed from the labels; singletons get 0.
std::vector<double> silhouette_centroid(const DataMatrix& data, const Partition& partition);
DataMatrix silhouette_centroid_ensemble(const DataMatrix& data, const LabelMatrix& ensemble, unsigned threads = 0);

/// Dense symmetric Gram matrix.
class KernelGram {
public:
    KernelGram() = default;
    /// Throws std::invalid_argument unless values is n*n, finite and symmetric within 1e-9.
    KernelGram(std::size_t n, std::vector<double> values);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * n_, n_}; }
    const std::vector<double>& values() const { return values_; }

    std::optional<std::vector<double>> bandwidths;
    std::optional<std::size_t> knn;

private:
    std::size_t n_ = 0;
    std::vector<double> values_;
};

KernelGram kernel_gram_linear(const DataMatrix& data);
/// (<x, y> + 1)^2
KernelGram kernel_gram_quadratic(const DataMatrix& data);
/// exp(-gamma * |x - y|^2)
KernelGram kernel_gram_rbf(const DataMatrix& data, double gamma);
/// exp(-|x_i - x_j|^2 / (sigma_i sigma_j)), sigma_i = distance to the knn-th
/// nearest neighbour (advanced past zero distances).
KernelGram kernel_gram_self_tuning_rbf(const DataMatrix& data, std::size_t knn = 7);

/// Binary cache: uint64 n followed by n*n row-major doubles (native endianness).
void save_gram(const std::filesystem::path& path, const KernelGram& gram);
KernelGram load_gram(const std::filesystem::path& path);

/// Squared feature-space distance from point i to the mean of `members`.
double kernel_distance_sq(const KernelGram& gram, std::size_t point, std::span<const std::size_t> members);

/// Silhouette with a and b replaced by feature-space distances to cluster means.
std::vector<double> silhouette_kernel(const KernelGram& gram, const Partition& partition);
DataMatrix silhouette_kernel_ensemble(const KernelGram& gram, const LabelMatrix& ensemble, unsigned threads = 0);

struct SilhouetteTable {
    DataMatrix s;  // n x R
    std::vector<double> mu;
    std::vector<double> sigma;
    std::vector<double> s_tilde;
    SilhouetteMode mode = SilhouetteMode::Exact;
    bool remap = false;
};

/// Row-wise population mean and std; s_tilde = max(0, mu - sigma), or
/// ((mu - sigma) + 1) / 2 clamped to [0, 1] when remap is set.
SilhouetteTable aggregate(const DataMatrix& s, bool remap, SilhouetteMode mode = SilhouetteMode::Exact);

}  // namespace cake
