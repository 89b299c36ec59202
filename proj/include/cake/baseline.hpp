#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cake/align.hpp"
#include "cake/cluster.hpp"

namespace cake {

struct ConsensusResult {
    std::size_t reference_run = 0;
    std::vector<int> labels;            // z*
    std::vector<double> agreement;      // fraction of runs voting for z*_i
    std::vector<std::vector<int>> aligned;  // every run aligned onto the reference
    int k = 0;
};

/// Medoid run under aligned agreement (ties to the lowest run index), all runs
/// aligned onto it, majority vote with ties to the lowest label.
ConsensusResult consensus(const LabelMatrix& ensemble, unsigned threads = 0);

struct VoteDistribution {
    DataMatrix p;               // n x k vote fractions after aligning to z*
    std::vector<double> hhat;   // 1 - H / log k, clamped to [0, 1]
};

inline constexpr double kEntropyEpsilon = 1e-12;

VoteDistribution entropy_agreement(const LabelMatrix& ensemble, unsigned threads = 0);
/// Same, reusing an already computed consensus.
VoteDistribution entropy_agreement(const LabelMatrix& ensemble, const ConsensusResult& consensus);

/// Normalised entropy score of one vote-fraction row.
double normalized_entropy_score(std::span<const double> p);

struct BootstrapConfig {
    std::size_t B = 20;
    double subsample_fraction = 0.8;
    std::uint64_t seed = 0;
    unsigned threads = 0;

    void validate() const;
};

struct BootstrapResult {
    std::vector<double> score;
    std::vector<char> flagged;             // fewer than two usable pairs
    std::vector<std::uint32_t> pair_counts;
    std::vector<std::vector<int>> labels;  // per draw, -1 where not sampled
    std::size_t skipped_pairs = 0;
};

/// B clusterings on subsamples of floor(fraction * n) points. For each pair of
/// draws the later one is aligned onto the earlier one using their shared
/// points only; pairs sharing fewer than k points are skipped.
BootstrapResult bootstrap_stability(const DataMatrix& data, const EnsembleConfig& base, const BootstrapConfig& config);

/// Pairwise agreement of partial labelings (-1 = absent); exposed for reuse.
BootstrapResult shared_point_stability(const std::vector<std::vector<int>>& labels, int k);

/// Average of the two average-rank vectors rescaled to [0, 1]; n = 1 maps to 0.5.
std::vector<double> rank_average_fusion(std::span<const double> a, std::span<const double> b);

/// 1-based fractional ranks with ties averaged.
std::vector<double> average_ranks(std::span<const double> values);

/// Max posterior under a k-component GMM fitted on the data.
std::vector<double> gmm_pmax_scores(const DataMatrix& data, int k, std::uint64_t seed,
                                    Covariance covariance = Covariance::Full);

}  // namespace cake
