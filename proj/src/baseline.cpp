#include "cake/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cake/parallel.hpp"

namespace cake {

ConsensusResult consensus(const LabelMatrix& ensemble, unsigned threads) {
    const std::size_t runs = ensemble.runs();
    const std::size_t n = ensemble.n();
    const auto agree = pairwise_agreement(ensemble, threads);
    ConsensusResult out;
    out.k = ensemble.k();
    std::int64_t best = -1;
    for (std::size_t r = 0; r < runs; ++r) {
        std::int64_t total = 0;
        for (std::size_t q = 0; q < runs; ++q) {
            if (q != r) total += agree[r * runs + q];
        }
        if (total > best) {
            best = total;
            out.reference_run = r;
        }
    }
    const Partition& ref = ensemble.run(out.reference_run);
    out.aligned.resize(runs);
    parallel_for(runs, threads, [&](std::size_t r) {
        out.aligned[r] = r == out.reference_run ? ref.labels : align(ensemble.run(r), ref).labels;
    });
    const auto k = static_cast<std::size_t>(out.k);
    out.labels.resize(n);
    out.agreement.resize(n);
    std::vector<std::size_t> votes(k);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        for (std::size_t r = 0; r < runs; ++r) ++votes[static_cast<std::size_t>(out.aligned[r][i])];
        const auto top = std::max_element(votes.begin(), votes.end());  // first maximum = lowest label
        out.labels[i] = static_cast<int>(std::distance(votes.begin(), top));
        out.agreement[i] = static_cast<double>(*top) / static_cast<double>(runs);
    }
    return out;
}

double normalized_entropy_score(std::span<const double> p) {
    if (p.size() < 2) {
        throw std::invalid_argument("entropy: k must be at least 2");
    }
    double h = 0.0;
    for (double v : p) h -= v * std::log(v + kEntropyEpsilon);
    return std::clamp(1.0 - h / std::log(static_cast<double>(p.size())), 0.0, 1.0);
}

VoteDistribution entropy_agreement(const LabelMatrix& ensemble, const ConsensusResult& cons) {
    const std::size_t n = ensemble.n();
    const std::size_t runs = ensemble.runs();
    const auto k = static_cast<std::size_t>(ensemble.k());
    if (k < 2) {
        throw std::invalid_argument("entropy: k must be at least 2");
    }
    Partition zstar;
    zstar.labels = cons.labels;
    zstar.k = ensemble.k();
    VoteDistribution out;
    out.p = DataMatrix(n, k);
    for (std::size_t r = 0; r < runs; ++r) {
        const auto aligned = align(ensemble.run(r), zstar).labels;
        for (std::size_t i = 0; i < n; ++i) out.p(i, static_cast<std::size_t>(aligned[i])) += 1.0;
    }
    out.hhat.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : out.p.row(i)) v /= static_cast<double>(runs);
        out.hhat[i] = normalized_entropy_score(out.p.row(i));
    }
    return out;
}

VoteDistribution entropy_agreement(const LabelMatrix& ensemble, unsigned threads) {
    return entropy_agreement(ensemble, consensus(ensemble, threads));
}

void BootstrapConfig::validate() const {
    if (B < 2) {
        throw std::invalid_argument("bootstrap: B must be at least 2");
    }
    if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0)) {
        throw std::invalid_argument("bootstrap: subsample fraction must be in (0, 1]");
    }
}

BootstrapResult shared_point_stability(const std::vector<std::vector<int>>& labels, int k) {
    const std::size_t draws = labels.size();
    const std::size_t n = draws ? labels.front().size() : 0;
    BootstrapResult out;
    std::vector<std::uint32_t> agree(n, 0);
    out.pair_counts.assign(n, 0);
    std::vector<int> a, b;
    std::vector<std::size_t> shared;
    for (std::size_t r1 = 0; r1 < draws; ++r1) {
        for (std::size_t r2 = r1 + 1; r2 < draws; ++r2) {
            shared.clear();
            a.clear();
            b.clear();
            for (std::size_t i = 0; i < n; ++i) {
                if (labels[r1][i] >= 0 && labels[r2][i] >= 0) {
                    shared.push_back(i);
                    a.push_back(labels[r1][i]);
                    b.push_back(labels[r2][i]);
                }
            }
            if (shared.size() < static_cast<std::size_t>(k)) {
                ++out.skipped_pairs;
                continue;
            }
            const auto perm = hungarian_max(contingency(a, k, b, k)).perm;
            for (std::size_t s = 0; s < shared.size(); ++s) {
                ++out.pair_counts[shared[s]];
                if (perm[static_cast<std::size_t>(a[s])] == b[s]) ++agree[shared[s]];
            }
        }
    }
    out.score.assign(n, 0.0);
    out.flagged.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (out.pair_counts[i] < 2) {
            out.flagged[i] = 1;
            continue;
        }
        out.score[i] = static_cast<double>(agree[i]) / static_cast<double>(out.pair_counts[i]);
    }
    out.labels = labels;
    return out;
}

BootstrapResult bootstrap_stability(const DataMatrix& data, const EnsembleConfig& base, const BootstrapConfig& config) {
    config.validate();
    const std::size_t n = data.rows();
    const auto m = static_cast<std::size_t>(std::floor(config.subsample_fraction * static_cast<double>(n)));
    if (m < static_cast<std::size_t>(base.k)) {
        throw std::invalid_argument("bootstrap: subsample of " + std::to_string(m) + " points is smaller than k=" +
                                    std::to_string(base.k));
    }
    std::vector<std::vector<int>> labels(config.B, std::vector<int>(n, -1));
    parallel_for(config.B, config.threads, [&](std::size_t b) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        if (m < n) {
            Rng rng(derive_seed(config.seed, "bootstrap_sample", b));
            for (std::size_t s = 0; s < m; ++s) std::swap(idx[s], idx[s + rng.below(n - s)]);
            idx.resize(m);
            std::sort(idx.begin(), idx.end());
        }
        const DataMatrix sub = data.select_rows(idx);
        Partition p;
        try {
            p = run_base_algorithm(sub, base, derive_seed(config.seed, "bootstrap_run", b));
        } catch (const std::exception& e) {
            throw std::runtime_error("bootstrap draw " + std::to_string(b) + " failed: " + e.what());
        }
        for (std::size_t s = 0; s < idx.size(); ++s) labels[b][idx[s]] = p.labels[s];
    });
    return shared_point_stability(labels, base.k);
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

std::vector<double> rank_average_fusion(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("fusion: length mismatch");
    }
    const std::size_t n = a.size();
    if (n == 0) return {};
    if (n == 1) return {0.5};
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = (0.5 * (ra[i] + rb[i]) - 1.0) / static_cast<double>(n - 1);
    }
    return out;
}

std::vector<double> gmm_pmax_scores(const DataMatrix& data, int k, std::uint64_t seed, Covariance covariance) {
    GmmOptions opt;
    opt.k = k;
    opt.seed = seed;
    opt.covariance = covariance;
    return gmm_pmax(gmm_fit(data, opt), data);
}

}  // namespace cake
