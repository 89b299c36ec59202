#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cake/baseline.hpp"
#include "cake/cluster.hpp"
#include "cake/score.hpp"

namespace cake {

// ---------------------------------------------------------------------------
// External metrics. Points whose truth label is noise are dropped first.

/// Fraction of non-noise points matched after the best one-to-one mapping of
/// predicted labels onto truth labels (padded when the counts differ).
double accuracy_after_alignment(std::span<const int> pred, const GroundTruth& truth);
double ari(std::span<const int> pred, const GroundTruth& truth);
double nmi(std::span<const int> pred, const GroundTruth& truth);
double ami(std::span<const int> pred, const GroundTruth& truth);

/// Same metrics on two arbitrary integer labelings of equal length.
double ari_labels(std::span<const int> a, std::span<const int> b);
double nmi_labels(std::span<const int> a, std::span<const int> b);
double ami_labels(std::span<const int> a, std::span<const int> b);

/// Per point: 1 if the globally aligned prediction matches truth, 0 if not,
/// -1 for noise points.
std::vector<int> correctness_after_alignment(std::span<const int> pred, const GroundTruth& truth);

struct MetricBundle {
    double acc = 0.0;
    double ari = 0.0;
    double ami = 0.0;
    double nmi = 0.0;
    double silhouette_mean = 0.0;
};

/// Metrics for a partition of `data`; silhouette_mean is exact up to 5000
/// points and the centroid proxy above.
MetricBundle evaluate_partition(const DataMatrix& data, const Partition& partition, const GroundTruth& truth);

nlohmann::json to_json(const MetricBundle& m);

// ---------------------------------------------------------------------------
// Filtering

enum class FilterCriterion { Random, Consensus, C, STilde, CakePr, CakeHm };
std::string to_string(FilterCriterion criterion);
FilterCriterion parse_filter_criterion(std::string_view name);

struct FilterSpec {
    FilterCriterion criterion = FilterCriterion::CakeHm;
    double keep_fraction = 0.7;
    std::uint64_t seed = 0;
};

/// Top floor(keep_fraction * n) points by the criterion (ties to the lower
/// index; random uses the seed), returned in ascending index order. The
/// consensus criterion reads the consensus_agree column.
std::vector<std::size_t> select_indices(const ScoreTable& scores, const FilterSpec& spec);

struct Interval {
    double mean = 0.0;
    double half_width = 0.0;  // Student-t 95%, trials - 1 dof
    double lower() const { return mean - half_width; }
    double upper() const { return mean + half_width; }
};

/// Student-t 95% interval of the sample. One value gives a zero-width interval.
Interval t_interval(std::span<const double> values, double confidence = 0.95);

struct FilterResult {
    std::vector<std::size_t> kept;
    std::vector<MetricBundle> trials;
    Interval acc, ari, ami, nmi, silhouette_mean;
};

/// Keeps the selected points and reclusters them `trials` times with fresh
/// seeds derived from recluster.seed.
FilterResult filter_and_recluster(const DataMatrix& data, const ScoreTable& scores, const FilterSpec& spec,
                                  const EnsembleConfig& recluster, const GroundTruth& truth, std::size_t trials);

nlohmann::json to_json(const FilterResult& r);

// ---------------------------------------------------------------------------
// Selective prediction

enum class CurveKind { CoverageAccuracy, RiskCoverage, Roc, Pr };
std::string to_string(CurveKind kind);

struct Curve {
    CurveKind kind = CurveKind::CoverageAccuracy;
    std::vector<double> x;
    std::vector<double> y;
};

/// coverage 0.05, 0.10, ..., 1.0
std::vector<double> default_coverage_grid();

/// Expected accuracy over the ceil(c * n) highest-scoring points, where a tie
/// group straddling the cutoff contributes proportionally (the expectation
/// under a random tie break). Noise points take part in the ranking but not
/// in the accuracy.
double top_coverage_accuracy(std::span<const double> scores, std::span<const int> correct, double coverage);

Curve coverage_accuracy(std::span<const double> scores, std::span<const int> correct, std::span<const double> grid);
Curve coverage_accuracy(std::span<const double> scores, std::span<const int> pred, const GroundTruth& truth,
                        std::span<const double> grid);

/// Risk = 1 - accuracy on `grid_points` coverages evenly spaced in [1/n, 1];
/// trapezoid area divided by the interval length.
double aurc(std::span<const double> scores, std::span<const int> correct, std::size_t grid_points = 100);
double aurc(std::span<const double> scores, std::span<const int> pred, const GroundTruth& truth,
            std::size_t grid_points = 100);
Curve risk_coverage(std::span<const double> scores, std::span<const int> correct, std::size_t grid_points = 100);

/// Rank-sum AUROC with tie-averaged ranks. Labels are 0/1; both must occur.
double auroc(std::span<const double> scores, std::span<const int> labels);
/// Average precision: sum over distinct thresholds of (recall step) x precision.
double auprc(std::span<const double> scores, std::span<const int> labels);
Curve roc_curve(std::span<const double> scores, std::span<const int> labels);
Curve pr_curve(std::span<const double> scores, std::span<const int> labels);

/// 1 when the consensus label, aligned to truth, matches; noise points are 0.
std::vector<int> consensus_correctness_labels(const ConsensusResult& consensus, const GroundTruth& truth);
std::vector<int> consensus_correctness_labels(const LabelMatrix& ensemble, const GroundTruth& truth,
                                              unsigned threads = 0);

/// AUPRC of flagging errors (label 0) by ascending confidence.
double error_discovery_auprc(std::span<const double> confidence, std::span<const int> correct);

/// Spearman correlation between bin rank and per-bin accuracy over
/// equal-count score bins (sorted by score, then index). 0 when the
/// accuracies are constant.
double spearman_percentile(std::span<const double> scores, std::span<const int> correct, std::size_t bins);
double spearman_percentile(std::span<const double> scores, std::span<const int> pred, const GroundTruth& truth,
                           std::size_t bins);
std::vector<double> percentile_bin_accuracy(std::span<const double> scores, std::span<const int> correct,
                                            std::size_t bins);
double spearman(std::span<const double> a, std::span<const double> b);
double pearson(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Studies

struct ConvergenceOptions {
    std::vector<std::size_t> r_grid = {5, 10, 20, 30, 40};
    std::size_t B = 10;
    /// 0 = every sub-ensemble is a fresh set of runs; otherwise runs are drawn
    /// without replacement from one pool of this size.
    std::size_t pool_size = 0;
    std::optional<SilhouetteMode> mode;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct ConvergencePoint {
    std::size_t R = 0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

/// Per-point population std of CAKE_HM across B sub-ensembles, summarised by
/// median and quartiles for each R.
std::vector<ConvergencePoint> convergence_study(const DataMatrix& data, const EnsembleConfig& config,
                                                const ConvergenceOptions& options);

struct MisspecRow {
    int k = 0;
    double ari = 0.0;
    double aurc_cake_hm = 0.0;
    double aurc_cake_pr = 0.0;
    double aurc_c = 0.0;
    double aurc_s_tilde = 0.0;
    double aurc_entropy = 0.0;
};

/// For each k' an ensemble is built, its consensus scored against truth (ARI)
/// and each confidence score's AURC computed on consensus correctness.
std::vector<MisspecRow> misspecified_k_study(const DataMatrix& data, const GroundTruth& truth,
                                             const EnsembleConfig& config, std::span<const int> k_grid,
                                             const ScoreOptions& score_options = {});

double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

// ---------------------------------------------------------------------------
// Reports

nlohmann::json to_json(const Curve& curve);
/// {dataset, config, metrics, curves, intervals}
nlohmann::json make_eval_report(nlohmann::json dataset, nlohmann::json config, nlohmann::json metrics,
                                nlohmann::json curves, nlohmann::json intervals);
void write_curve_csv(const std::filesystem::path& path, const Curve& curve, std::string_view x_name,
                     std::string_view y_name);

}  // namespace cake
