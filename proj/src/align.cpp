#include "cake/align.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cake/parallel.hpp"

namespace cake {

std::int64_t ContingencyMatrix::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

ContingencyMatrix contingency(std::span<const int> a, int ka, std::span<const int> b, int kb) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("contingency: partitions have " + std::to_string(a.size()) + " and " +
                                    std::to_string(b.size()) + " points");
    }
    ContingencyMatrix m(static_cast<std::size_t>(ka), static_cast<std::size_t>(kb));
    for (std::size_t p = 0; p < a.size(); ++p) {
        if (a[p] < 0 || a[p] >= ka || b[p] < 0 || b[p] >= kb) {
            throw std::invalid_argument("contingency: label out of range at point " + std::to_string(p));
        }
        ++m(static_cast<std::size_t>(a[p]), static_cast<std::size_t>(b[p]));
    }
    return m;
}

ContingencyMatrix contingency(const Partition& a, const Partition& b) {
    if (a.k != b.k) {
        throw std::invalid_argument("contingency: k mismatch (" + std::to_string(a.k) + " vs " +
                                    std::to_string(b.k) + ")");
    }
    return contingency(a.labels, a.k, b.labels, b.k);
}

namespace {

// Min-cost assignment with potentials (rows = cols = k). On return
// row_of_col[j] is the row matched to column j and u, v are optimal duals:
// cost(i, j) - u[i] - v[j] >= 0, with equality on matched pairs.
struct HungarianState {
    std::vector<std::int64_t> u, v;
    std::vector<int> col_of_row;
};

HungarianState min_cost_assignment(const std::vector<std::int64_t>& cost, std::size_t k) {
    constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
    std::vector<std::int64_t> u(k + 1, 0), v(k + 1, 0), minv(k + 1);
    std::vector<std::size_t> p(k + 1, 0), way(k + 1, 0);
    std::vector<char> used(k + 1);
    for (std::size_t i = 1; i <= k; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            std::int64_t delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= k; ++j) {
                if (used[j]) continue;
                const std::int64_t cur = cost[(i0 - 1) * k + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= k; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    HungarianState st;
    st.u.assign(u.begin() + 1, u.end());
    st.v.assign(v.begin() + 1, v.end());
    st.col_of_row.assign(k, -1);
    for (std::size_t j = 1; j <= k; ++j) {
        st.col_of_row[p[j] - 1] = static_cast<int>(j - 1);
    }
    return st;
}

// Lexicographically smallest perfect matching inside the tight subgraph,
// starting from an optimal matching.
std::vector<int> lexicographic_optimum(const std::vector<std::int64_t>& cost, std::size_t k,
                                       const HungarianState& st) {
    std::vector<std::vector<int>> tight(k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (cost[i * k + j] - st.u[i] - st.v[j] == 0) {
                tight[i].push_back(static_cast<int>(j));
            }
        }
    }
    std::vector<int> col_of_row = st.col_of_row;
    std::vector<int> row_of_col(k, -1);
    for (std::size_t i = 0; i < k; ++i) {
        row_of_col[static_cast<std::size_t>(col_of_row[i])] = static_cast<int>(i);
    }
    std::vector<char> visited(k);
    std::size_t fixed = 0;  // rows < fixed are frozen

    std::function<bool(int)> augment = [&](int row) -> bool {
        for (int col : tight[static_cast<std::size_t>(row)]) {
            auto c = static_cast<std::size_t>(col);
            if (visited[c]) continue;
            visited[c] = 1;
            const int owner = row_of_col[c];
            if (owner >= 0 && static_cast<std::size_t>(owner) <= fixed) continue;
            if (owner < 0 || augment(owner)) {
                row_of_col[c] = row;
                col_of_row[static_cast<std::size_t>(row)] = col;
                return true;
            }
        }
        return false;
    };

    for (std::size_t i = 0; i < k; ++i) {
        fixed = i;
        for (int j : tight[i]) {
            if (j == col_of_row[i]) break;
            const auto jc = static_cast<std::size_t>(j);
            const int owner = row_of_col[jc];
            if (static_cast<std::size_t>(owner) < i) continue;
            const auto saved_cols = col_of_row;
            const auto saved_rows = row_of_col;
            const auto old_col = static_cast<std::size_t>(col_of_row[i]);
            row_of_col[old_col] = -1;
            col_of_row[i] = j;
            row_of_col[jc] = static_cast<int>(i);
            col_of_row[static_cast<std::size_t>(owner)] = -1;
            std::fill(visited.begin(), visited.end(), 0);
            visited[jc] = 1;
            if (augment(owner)) break;
            col_of_row = saved_cols;
            row_of_col = saved_rows;
        }
    }
    return col_of_row;
}

}  // namespace

Matching hungarian_max(const ContingencyMatrix& m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("hungarian_max: matrix is " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()) + ", expected square");
    }
    const std::size_t k = m.rows();
    Matching out;
    if (k == 0) {
        return out;
    }
    std::int64_t top = 0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (m(i, j) < 0) throw std::invalid_argument("hungarian_max: negative count");
            top = std::max(top, m(i, j));
        }
    }
    std::vector<std::int64_t> cost(k * k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            cost[i * k + j] = top - m(i, j);
        }
    }
    const HungarianState st = min_cost_assignment(cost, k);
    out.perm = lexicographic_optimum(cost, k, st);
    for (std::size_t i = 0; i < k; ++i) {
        out.agreement += m(i, static_cast<std::size_t>(out.perm[i]));
    }
    return out;
}

Matching hungarian_max_padded(const ContingencyMatrix& m) {
    const std::size_t k = std::max(m.rows(), m.cols());
    ContingencyMatrix square(k, k);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            square(i, j) = m(i, j);
        }
    }
    Matching full = hungarian_max(square);
    full.perm.resize(m.rows());
    return full;
}

std::vector<int> apply_inverse(std::span<const int> b_labels, std::span<const int> perm) {
    std::vector<int> inverse(perm.size(), 0);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        inverse[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
    }
    std::vector<int> out(b_labels.size());
    for (std::size_t p = 0; p < b_labels.size(); ++p) {
        out[p] = inverse[static_cast<std::size_t>(b_labels[p])];
    }
    return out;
}

Partition align(const Partition& b, const Partition& onto) {
    const Matching m = hungarian_max(contingency(onto, b));
    Partition out;
    out.k = b.k;
    out.labels = apply_inverse(b.labels, m.perm);
    out.inertia = b.inertia;
    if (b.centroids) {
        DataMatrix c(b.centroids->rows(), b.centroids->cols());
        for (std::size_t i = 0; i < m.perm.size(); ++i) {
            auto src = b.centroids->row(static_cast<std::size_t>(m.perm[i]));
            std::copy(src.begin(), src.end(), c.row(i).begin());
        }
        out.centroids = std::move(c);
    }
    return out;
}

StabilityVector stability(const LabelMatrix& ensemble, unsigned threads) {
    const std::size_t runs = ensemble.runs();
    const std::size_t n = ensemble.n();
    if (runs < 2) {
        throw std::invalid_argument("stability: need at least two runs");
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t r1 = 0; r1 < runs; ++r1) {
        for (std::size_t r2 = r1 + 1; r2 < runs; ++r2) {
            pairs.emplace_back(r1, r2);
        }
    }
    std::vector<std::vector<int>> perms(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t p) {
        const auto [r1, r2] = pairs[p];
        perms[p] = hungarian_max(contingency(ensemble.run(r1), ensemble.run(r2))).perm;
    });

    StabilityVector out;
    out.pair_count = pairs.size();
    out.agree_counts.assign(n, 0);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto a = ensemble.column(pairs[p].first);
        const auto b = ensemble.column(pairs[p].second);
        const auto& perm = perms[p];
        for (std::size_t i = 0; i < n; ++i) {
            out.agree_counts[i] += perm[static_cast<std::size_t>(a[i])] == b[i] ? 1U : 0U;
        }
    }
    out.c.resize(n);
    const auto pc = static_cast<double>(out.pair_count);
    for (std::size_t i = 0; i < n; ++i) {
        out.c[i] = static_cast<double>(out.agree_counts[i]) / pc;
    }
    return out;
}

std::vector<std::int64_t> pairwise_agreement(const LabelMatrix& ensemble, unsigned threads) {
    const std::size_t runs = ensemble.runs();
    std::vector<std::int64_t> out(runs * runs, 0);
    parallel_for(runs, threads, [&](std::size_t r1) {
        out[r1 * runs + r1] = static_cast<std::int64_t>(ensemble.n());
        for (std::size_t r2 = r1 + 1; r2 < runs; ++r2) {
            const auto a = hungarian_max(contingency(ensemble.run(r1), ensemble.run(r2))).agreement;
            out[r1 * runs + r2] = a;
            out[r2 * runs + r1] = a;
        }
    });
    return out;
}

}  // namespace cake
