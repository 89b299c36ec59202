#pragma once

// Slow, direct implementations used as references in tests. Nothing here
// calls into the library's own metric, alignment or silhouette code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "cake/data.hpp"
#include "cake/rng.hpp"

namespace oracle {

using Labels = std::vector<int>;
using Table = std::vector<std::vector<long long>>;

inline double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(s);
}

// Best permutation by enumeration; first optimum in lexicographic order.
struct Best {
    std::vector<int> perm;
    long long value = -1;
};

inline Best best_permutation(const Table& m) {
    const std::size_t k = m.size();
    std::vector<int> p(k);
    std::iota(p.begin(), p.end(), 0);
    Best best;
    do {
        long long v = 0;
        for (std::size_t i = 0; i < k; ++i) v += m[i][static_cast<std::size_t>(p[i])];
        if (v > best.value) {
            best.value = v;
            best.perm = p;
        }
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}

inline Table count_table(const Labels& a, const Labels& b, int k) {
    Table m(static_cast<std::size_t>(k), std::vector<long long>(static_cast<std::size_t>(k), 0));
    for (std::size_t p = 0; p < a.size(); ++p) {
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                if (a[p] == i && b[p] == j) ++m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
        }
    }
    return m;
}

// Per-pair realignment by enumeration over all k! relabelings of run r2.
inline std::vector<double> stability(const std::vector<Labels>& runs, int k) {
    const std::size_t R = runs.size();
    const std::size_t n = runs.front().size();
    std::vector<double> hits(n, 0.0);
    double pairs = 0.0;
    for (std::size_t r1 = 0; r1 < R; ++r1) {
        for (std::size_t r2 = r1 + 1; r2 < R; ++r2) {
            pairs += 1.0;
            const Best b = best_permutation(count_table(runs[r1], runs[r2], k));
            for (std::size_t i = 0; i < n; ++i) {
                if (b.perm[static_cast<std::size_t>(runs[r1][i])] == runs[r2][i]) hits[i] += 1.0;
            }
        }
    }
    for (auto& h : hits) h /= pairs;
    return hits;
}

inline std::vector<double> silhouette(const cake::DataMatrix& x, const Labels& labels) {
    const std::size_t n = x.rows();
    std::vector<double> out(n, 0.0);
    std::set<int> clusters(labels.begin(), labels.end());
    for (std::size_t i = 0; i < n; ++i) {
        double a_sum = 0.0;
        int a_cnt = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && labels[j] == labels[i]) {
                a_sum += dist(x.row(i), x.row(j));
                ++a_cnt;
            }
        }
        if (a_cnt == 0) continue;
        const double a = a_sum / a_cnt;
        double b = std::numeric_limits<double>::infinity();
        for (int c : clusters) {
            if (c == labels[i]) continue;
            double s = 0.0;
            int cnt = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (labels[j] == c) {
                    s += dist(x.row(i), x.row(j));
                    ++cnt;
                }
            }
            b = std::min(b, s / cnt);
        }
        const double m = std::max(a, b);
        out[i] = m == 0.0 ? 0.0 : (b - a) / m;
    }
    return out;
}

inline std::vector<std::vector<double>> centroids(const cake::DataMatrix& x, const Labels& labels, int k) {
    std::vector<std::vector<double>> c(static_cast<std::size_t>(k), std::vector<double>(x.cols(), 0.0));
    std::vector<int> cnt(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        ++cnt[static_cast<std::size_t>(labels[i])];
        for (std::size_t j = 0; j < x.cols(); ++j) c[static_cast<std::size_t>(labels[i])][j] += x(i, j);
    }
    for (int l = 0; l < k; ++l) {
        for (auto& v : c[static_cast<std::size_t>(l)]) v /= cnt[static_cast<std::size_t>(l)];
    }
    return c;
}

// Explicit lift for (<x, y> + 1)^2: all products x_a x_b, sqrt(2) x_a, 1.
inline std::vector<double> quadratic_lift(std::span<const double> x) {
    std::vector<double> f;
    for (double a : x) {
        for (double b : x) f.push_back(a * b);
    }
    for (double a : x) f.push_back(std::sqrt(2.0) * a);
    f.push_back(1.0);
    return f;
}

inline double lifted_distance_sq(const cake::DataMatrix& x, std::size_t i, const std::vector<std::size_t>& members) {
    const auto fi = quadratic_lift(x.row(i));
    std::vector<double> mean(fi.size(), 0.0);
    for (auto p : members) {
        const auto fp = quadratic_lift(x.row(p));
        for (std::size_t t = 0; t < fp.size(); ++t) mean[t] += fp[t] / static_cast<double>(members.size());
    }
    double s = 0.0;
    for (std::size_t t = 0; t < fi.size(); ++t) s += (fi[t] - mean[t]) * (fi[t] - mean[t]);
    return s;
}

// Pair counting over all unordered point pairs.
inline double ari(const Labels& a, const Labels& b) {
    const std::size_t n = a.size();
    double both = 0, only_a = 0, only_b = 0, neither = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool sa = a[i] == a[j];
            const bool sb = b[i] == b[j];
            if (sa && sb) both += 1;
            else if (sa) only_a += 1;
            else if (sb) only_b += 1;
            else neither += 1;
        }
    }
    const double total = both + only_a + only_b + neither;
    const double pa = both + only_a;
    const double pb = both + only_b;
    const double expected = pa * pb / total;
    const double max_index = 0.5 * (pa + pb);
    if (max_index == expected) return 1.0;
    return (both - expected) / (max_index - expected);
}

inline double entropy_of(const Labels& a) {
    std::map<int, double> count;
    for (int v : a) count[v] += 1.0;
    double h = 0;
    for (auto& [k, c] : count) {
        const double p = c / static_cast<double>(a.size());
        if (p < 1.0) h -= p * std::log(p);
    }
    return h;
}

inline double mutual_info(const Labels& a, const Labels& b) {
    const double n = static_cast<double>(a.size());
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ca, cb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1.0;
        ca[a[i]] += 1.0;
        cb[b[i]] += 1.0;
    }
    double mi = 0;
    for (auto& [key, c] : joint) mi += (c / n) * std::log(n * c / (ca[key.first] * cb[key.second]));
    return mi;
}

inline double nmi(const Labels& a, const Labels& b) {
    const double ha = entropy_of(a), hb = entropy_of(b);
    if (ha == 0.0 && hb == 0.0) return 1.0;
    const double mi = mutual_info(a, b);
    if (std::abs(mi) < 1e-300) return 0.0;
    return mi / (0.5 * (ha + hb));
}

// Expected MI under the permutation model as a direct hypergeometric sum
// with exact binomial coefficients.
inline double binom(long long n, long long r) {
    if (r < 0 || r > n) return 0.0;
    long double v = 1.0L;
    for (long long t = 1; t <= r; ++t) v = v * static_cast<long double>(n - r + t) / static_cast<long double>(t);
    return static_cast<double>(v);
}

inline double expected_mi(const Labels& a, const Labels& b) {
    const long long n = static_cast<long long>(a.size());
    std::map<int, long long> ca, cb;
    for (int v : a) ++ca[v];
    for (int v : b) ++cb[v];
    double emi = 0.0;
    for (auto& [la, sa] : ca) {
        for (auto& [lb, sb] : cb) {
            for (long long nij = 1; nij <= std::min(sa, sb); ++nij) {
                const double prob = binom(sa, nij) * binom(n - sa, sb - nij) / binom(n, sb);
                if (prob == 0.0) continue;
                const double x = static_cast<double>(nij);
                emi += prob * (x / n) * std::log(static_cast<double>(n) * x / (static_cast<double>(sa) * sb));
            }
        }
    }
    return emi;
}

// Expected MI as the average over every reordering of b (tiny n only).
inline double expected_mi_by_permutation(const Labels& a, Labels b) {
    std::sort(b.begin(), b.end());
    double total = 0.0, count = 0.0;
    std::vector<int> idx(b.size());
    std::iota(idx.begin(), idx.end(), 0);
    do {
        Labels shuffled(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) shuffled[i] = b[static_cast<std::size_t>(idx[i])];
        total += mutual_info(a, shuffled);
        count += 1.0;
    } while (std::next_permutation(idx.begin(), idx.end()));
    return total / count;
}

// Same co-membership for every pair of points.
inline bool same_partition(const Labels& a, const Labels& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            if ((a[i] == a[j]) != (b[i] == b[j])) return false;
        }
    }
    return true;
}

inline double ami(const Labels& a, const Labels& b, double emi) {
    const double ha = entropy_of(a), hb = entropy_of(b);
    if (ha == 0.0 && hb == 0.0) return 1.0;
    const double den = 0.5 * (ha + hb) - emi;
    if (std::abs(den) < 1e-12) return same_partition(a, b) ? 1.0 : 0.0;
    return (mutual_info(a, b) - emi) / den;
}

// Accuracy over every injective map of predicted labels into truth labels
// (predicted labels without an image count as wrong).
inline double accuracy(const Labels& pred, const Labels& truth) {
    const int kp = *std::max_element(pred.begin(), pred.end()) + 1;
    const int kt = *std::max_element(truth.begin(), truth.end()) + 1;
    const int k = std::max(kp, kt);
    std::vector<int> p(static_cast<std::size_t>(k));
    std::iota(p.begin(), p.end(), 0);
    double best = 0.0;
    do {
        double hit = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) hit += p[static_cast<std::size_t>(pred[i])] == truth[i] ? 1 : 0;
        best = std::max(best, hit / static_cast<double>(pred.size()));
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}

inline double auroc(const std::vector<double>& s, const Labels& y) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (y[i] != 1) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j] != 0) continue;
            den += 1;
            num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
    }
    return num / den;
}

// Threshold sweep: predict positive when score >= t for each distinct t.
inline double auprc(const std::vector<double>& s, const Labels& y) {
    std::vector<double> ts(s.begin(), s.end());
    std::sort(ts.begin(), ts.end(), std::greater<>());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    double pos = 0;
    for (int v : y) pos += v;
    double ap = 0, prev_recall = 0;
    for (double t : ts) {
        double tp = 0, fp = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] >= t) (y[i] == 1 ? tp : fp) += 1;
        }
        const double recall = tp / pos;
        ap += (recall - prev_recall) * tp / (tp + fp);
        prev_recall = recall;
    }
    return ap;
}

inline cake::DataMatrix random_data(cake::Rng& rng, std::size_t n, std::size_t d, double spread = 3.0) {
    cake::DataMatrix x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.normal(0.0, spread);
    }
    return x;
}

// Labels with every value in [0, k) used at least once.
inline Labels random_labels(cake::Rng& rng, std::size_t n, int k) {
    Labels l(n);
    for (std::size_t i = 0; i < n; ++i) {
        l[i] = i < static_cast<std::size_t>(k) ? static_cast<int>(i) : static_cast<int>(rng.below(k));
    }
    rng.shuffle(l.begin(), l.end());
    return l;
}

}  // namespace oracle
