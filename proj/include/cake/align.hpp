#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cake/cluster.hpp"

namespace cake {

/// rows x cols co-occurrence counts between two labelings.
class ContingencyMatrix {
public:
    ContingencyMatrix() = default;
    ContingencyMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), counts_(rows * cols, 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::int64_t operator()(std::size_t i, std::size_t j) const { return counts_[i * cols_ + j]; }
    std::int64_t& operator()(std::size_t i, std::size_t j) { return counts_[i * cols_ + j]; }
    std::int64_t total() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::int64_t> counts_;
};

/// M[i][j] = #{p : a_p = i and b_p = j}. Labels must lie in [0, ka) / [0, kb).
ContingencyMatrix contingency(std::span<const int> a, int ka, std::span<const int> b, int kb);
/// Partitions must share n and k.
ContingencyMatrix contingency(const Partition& a, const Partition& b);

struct Matching {
    std::vector<int> perm;  // perm[i] = column matched to row i
    std::int64_t agreement = 0;
};

/// Maximum-agreement assignment on a square matrix, solved as a min-cost
/// assignment on (max entry - M). Among optimal permutations the
/// lexicographically smallest perm is returned.
Matching hungarian_max(const ContingencyMatrix& m);

/// Rectangular variant: zero-pads to square. perm[i] may point at a padded
/// column (>= cols) for surplus rows.
Matching hungarian_max_padded(const ContingencyMatrix& m);

/// Relabels b so that its labels agree maximally with `onto`.
Partition align(const Partition& b, const Partition& onto);

/// Maps labels of b into the frame of a given perm from hungarian_max(contingency(a, b)).
std::vector<int> apply_inverse(std::span<const int> b_labels, std::span<const int> perm);

struct StabilityVector {
    std::vector<double> c;
    std::vector<std::uint32_t> agree_counts;  // c_i * pair_count
    std::size_t pair_count = 0;
};

/// Fraction of unordered run pairs (r1 < r2) in which the point keeps its
/// label after aligning run r2 onto run r1.
StabilityVector stability(const LabelMatrix& ensemble, unsigned threads = 0);

/// Pairwise agreement (after alignment) between every pair of runs, R x R,
/// diagonal = n.
std::vector<std::int64_t> pairwise_agreement(const LabelMatrix& ensemble, unsigned threads = 0);

}  // namespace cake
