#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cake/data.hpp"
#include "cake/rng.hpp"

namespace cake {

/// Hard assignment of n points to labels in [0, k).
struct Partition {
    std::vector<int> labels;
    int k = 0;
    std::optional<DataMatrix> centroids;  // k x d when present
    std::optional<double> inertia;

    std::size_t size() const { return labels.size(); }
    /// Throws std::invalid_argument when a label is outside [0, k) or the
    /// centroid block has the wrong shape.
    void validate() const;
    std::vector<std::size_t> cluster_sizes() const;
};

/// R partitions over the same n points sharing the same k.
class LabelMatrix {
public:
    LabelMatrix() = default;
    /// Validates shape (R >= 2, common n and k).
    explicit LabelMatrix(std::vector<Partition> runs);

    std::size_t n() const { return n_; }
    std::size_t runs() const { return runs_.size(); }
    int k() const { return k_; }

    const Partition& run(std::size_t r) const { return runs_[r]; }
    std::span<const int> column(std::size_t r) const { return runs_[r].labels; }
    int label(std::size_t point, std::size_t r) const { return runs_[r].labels[point]; }

    LabelMatrix subset_runs(std::span<const std::size_t> run_indices) const;

    /// Content hash over labels (hex); stable across platforms.
    std::string hash() const;

private:
    std::size_t n_ = 0;
    int k_ = 0;
    std::vector<Partition> runs_;
};

/// Joins two ensembles over the same points (heterogeneous ensembles).
LabelMatrix concat(const LabelMatrix& a, const LabelMatrix& b);

enum class Algorithm { KMeansRandom, KMeansPlusPlus, MiniBatchKMeans, KMedoids, Gmm };
enum class Covariance { Full, Diagonal };

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);
std::string to_string(Covariance covariance);
Covariance parse_covariance(std::string_view name);

struct EnsembleConfig {
    Algorithm algorithm = Algorithm::KMeansRandom;
    std::size_t runs = 20;
    int k = 3;
    std::uint64_t seed = 0;
    int max_iter = 300;
    double tol = 1e-4;
    std::optional<std::size_t> batch_size;  // mini-batch only; default min(1024, n)
    Covariance covariance = Covariance::Full;
    std::optional<double> reg;  // GMM only; default 1e-6 * trace(cov) / d
    /// Each run keeps the lowest within-cluster SSE of this many starts
    /// (restart j > 0 is seeded from (run seed, "restart", j)).
    std::size_t restarts = 1;
    unsigned threads = 0;

    /// Throws std::invalid_argument when R < 2, k < 2, max_iter < 1 or restarts < 1.
    void validate() const;
};

nlohmann::json to_json(const EnsembleConfig& config);

// ---------------------------------------------------------------------------
// Base algorithms

enum class KMeansInit { Random, D2Sampling };

struct KMeansOptions {
    int k = 3;
    KMeansInit init = KMeansInit::Random;
    std::uint64_t seed = 0;
    int max_iter = 300;
    double tol = 1e-4;
};

struct KMeansFit {
    Partition partition;
    std::vector<double> inertia_trace;  // inertia after every assignment step
    int iterations = 0;
};

/// Lloyd iterations from the chosen seeding. Stops when the summed squared
/// centroid shift is <= tol or after max_iter updates. Nearest-centroid ties
/// go to the lowest index; an empty cluster is reseeded at the point farthest
/// from its current centroid.
KMeansFit kmeans_fit(const DataMatrix& data, const KMeansOptions& options);
Partition kmeans(const DataMatrix& data, const KMeansOptions& options);

/// Initial centers chosen by uniform sampling without replacement or by
/// squared-distance-proportional (k-means++) seeding.
DataMatrix kmeans_seed_centers(const DataMatrix& data, int k, KMeansInit init, Rng& rng);

struct MiniBatchOptions {
    int k = 3;
    std::uint64_t seed = 0;
    int max_iter = 100;  // number of mini-batch steps
    std::optional<std::size_t> batch_size;
};

/// Sculley-style mini-batch k-means with per-centroid rate 1/(count seen).
Partition minibatch_kmeans(const DataMatrix& data, const MiniBatchOptions& options);

struct KMedoidsFit {
    Partition partition;  // centroids rows are the medoid points
    std::vector<std::size_t> medoids;
};

/// Alternating k-medoids from D^2 seeding; medoid = member minimizing the
/// summed euclidean distance to its cluster (ties to the lowest index).
KMedoidsFit kmedoids(const DataMatrix& data, int k, std::uint64_t seed, int max_iter = 300);

struct GmmModel {
    std::vector<double> weights;               // k
    DataMatrix means;                          // k x d
    std::vector<DataMatrix> covariances;       // k of d x d (diagonal stored as d x d too)
    Covariance covariance = Covariance::Full;
    double log_likelihood = 0.0;               // mean per-sample log-likelihood
    std::vector<double> log_likelihood_trace;  // one entry per E-step
    double reg = 0.0;

    int k() const { return static_cast<int>(weights.size()); }
    std::size_t dims() const { return means.cols(); }
};

struct GmmOptions {
    int k = 3;
    std::uint64_t seed = 0;
    int max_iter = 100;
    double tol = 1e-6;
    Covariance covariance = Covariance::Full;
    std::optional<double> reg;
};

/// EM from a k-means++ initialisation. reg is added to every covariance
/// diagonal. Throws std::runtime_error naming the component whose covariance
/// stops being positive definite.
GmmModel gmm_fit(const DataMatrix& data, const GmmOptions& options);
/// n x k responsibilities.
DataMatrix gmm_posteriors(const GmmModel& model, const DataMatrix& data);
std::vector<double> gmm_pmax(const GmmModel& model, const DataMatrix& data);
Partition gmm_partition(const GmmModel& model, const DataMatrix& data);

// ---------------------------------------------------------------------------
// Ensembles

struct RunRecord {
    std::uint64_t seed = 0;
    std::optional<double> inertia;
};

struct Ensemble {
    LabelMatrix labels;
    std::vector<RunRecord> records;
};

/// Runs the configured algorithm R times with seeds derived from config.seed.
/// Output does not depend on config.threads.
Ensemble build_ensemble(const DataMatrix& data, const EnsembleConfig& config);
/// One base run (exposed for fresh reclustering and bootstrap draws).
Partition run_base_algorithm(const DataMatrix& data, const EnsembleConfig& config, std::uint64_t run_seed);

nlohmann::json ensemble_manifest(const EnsembleConfig& config, const Ensemble& ensemble);

/// n rows x R integer columns, no header.
void export_labels(std::ostream& out, const LabelMatrix& labels);
void export_labels(const std::filesystem::path& path, const LabelMatrix& labels);
/// Re-encodes every column to 0..k-1 by first occurrence; all columns must
/// use the same number of distinct labels.
LabelMatrix import_labels(std::istream& in);
LabelMatrix import_labels(const std::filesystem::path& path);

/// Centroids of the labelled groups; throws on an empty cluster.
DataMatrix centroids_from_labels(const DataMatrix& data, std::span<const int> labels, int k);

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

}  // namespace cake
