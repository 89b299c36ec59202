#include "cake/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "cake/parallel.hpp"

namespace cake {

namespace {

// Re-encodes arbitrary integers to 0..m-1 by first occurrence.
std::vector<int> encode(std::span<const int> labels, int& count) {
    std::map<int, int> codes;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = codes.try_emplace(labels[i], static_cast<int>(codes.size()));
        out[i] = it->second;
    }
    count = static_cast<int>(codes.size());
    return out;
}

struct Pairs {
    std::vector<int> pred;
    std::vector<int> truth;
};

// Drops noise points; fails when nothing is left.
Pairs non_noise(std::span<const int> pred, const GroundTruth& truth) {
    if (pred.size() != truth.size()) {
        throw std::invalid_argument("metrics: prediction has " + std::to_string(pred.size()) +
                                    " points, truth has " + std::to_string(truth.size()));
    }
    Pairs p;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (truth.labels[i] == kNoiseLabel) continue;
        p.pred.push_back(pred[i]);
        p.truth.push_back(truth.labels[i]);
    }
    if (p.pred.empty()) {
        throw std::invalid_argument("metrics: every point is noise");
    }
    return p;
}

struct Table {
    ContingencyMatrix m;
    std::vector<double> rows, cols;
    double n = 0.0;
};

Table table_of(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("metrics: labelings differ in length");
    }
    int ka = 0, kb = 0;
    const auto ea = encode(a, ka);
    const auto eb = encode(b, kb);
    Table t;
    t.m = contingency(ea, ka, eb, kb);
    t.rows.assign(static_cast<std::size_t>(ka), 0.0);
    t.cols.assign(static_cast<std::size_t>(kb), 0.0);
    for (std::size_t i = 0; i < t.m.rows(); ++i) {
        for (std::size_t j = 0; j < t.m.cols(); ++j) {
            t.rows[i] += static_cast<double>(t.m(i, j));
            t.cols[j] += static_cast<double>(t.m(i, j));
        }
    }
    t.n = static_cast<double>(a.size());
    return t;
}

double entropy(const std::vector<double>& sizes, double n) {
    double h = 0.0;
    for (double s : sizes) {
        if (s > 0.0) h -= (s / n) * std::log(s / n);
    }
    return h;
}

double mutual_information(const Table& t) {
    double mi = 0.0;
    for (std::size_t i = 0; i < t.m.rows(); ++i) {
        for (std::size_t j = 0; j < t.m.cols(); ++j) {
            const double nij = static_cast<double>(t.m(i, j));
            if (nij > 0.0) mi += (nij / t.n) * std::log(t.n * nij / (t.rows[i] * t.cols[j]));
        }
    }
    return std::max(0.0, mi);
}

double expected_mutual_information(const Table& t) {
    const double n = t.n;
    double emi = 0.0;
    for (double a : t.rows) {
        for (double b : t.cols) {
            const double lo = std::max(1.0, a + b - n);
            const double hi = std::min(a, b);
            for (double nij = lo; nij <= hi; nij += 1.0) {
                const double gln = std::lgamma(a + 1) + std::lgamma(b + 1) + std::lgamma(n - a + 1) +
                                   std::lgamma(n - b + 1) - std::lgamma(n + 1) - std::lgamma(nij + 1) -
                                   std::lgamma(a - nij + 1) - std::lgamma(b - nij + 1) -
                                   std::lgamma(n - a - b + nij + 1);
                emi += (nij / n) * std::log(n * nij / (a * b)) * std::exp(gln);
            }
        }
    }
    return emi;
}

}  // namespace

double ari_labels(std::span<const int> a, std::span<const int> b) {
    const Table t = table_of(a, b);
    // Pair confusion counts.
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < t.m.rows(); ++i) {
        for (std::size_t j = 0; j < t.m.cols(); ++j) {
            const double v = static_cast<double>(t.m(i, j));
            sum_sq += v * v;
        }
    }
    double row_sq = 0.0, col_sq = 0.0;
    for (double v : t.rows) row_sq += v * v;
    for (double v : t.cols) col_sq += v * v;
    const double tp = sum_sq - t.n;
    const double fp = row_sq - sum_sq;
    const double fn = col_sq - sum_sq;
    const double tn = t.n * t.n - fp - fn - sum_sq;
    if (fn == 0.0 && fp == 0.0) {
        return 1.0;
    }
    return 2.0 * (tp * tn - fn * fp) / ((tp + fn) * (fn + tn) + (tp + fp) * (fp + tn));
}

double nmi_labels(std::span<const int> a, std::span<const int> b) {
    const Table t = table_of(a, b);
    if (t.rows.size() == t.cols.size() && t.rows.size() <= 1) {
        return 1.0;
    }
    const double mi = mutual_information(t);
    if (mi == 0.0) {
        return 0.0;
    }
    const double norm = 0.5 * (entropy(t.rows, t.n) + entropy(t.cols, t.n));
    return std::clamp(mi / norm, 0.0, 1.0);
}

double ami_labels(std::span<const int> a, std::span<const int> b) {
    const Table t = table_of(a, b);
    if (t.rows.size() == t.cols.size() && t.rows.size() <= 1) {
        return 1.0;
    }
    const double mi = mutual_information(t);
    const double emi = expected_mutual_information(t);
    const double norm = 0.5 * (entropy(t.rows, t.n) + entropy(t.cols, t.n));
    const double denom = norm - emi;
    // Vanishing denominator: only one table is possible under the permutation
    // model (e.g. all singletons). Identical partitions score 1, others 0.
    if (std::abs(denom) < 1e-12) {
        return norm - mi < 1e-12 ? 1.0 : 0.0;
    }
    return (mi - emi) / denom;
}

std::vector<int> correctness_after_alignment(std::span<const int> pred, const GroundTruth& truth) {
    if (pred.size() != truth.size()) {
        throw std::invalid_argument("metrics: prediction has " + std::to_string(pred.size()) +
                                    " points, truth has " + std::to_string(truth.size()));
    }
    int kp = 0;
    for (int l : pred) {
        if (l < 0) throw std::invalid_argument("metrics: negative predicted label");
        kp = std::max(kp, l + 1);
    }
    int kt = 0;
    std::size_t kept = 0;
    for (int l : truth.labels) {
        if (l == kNoiseLabel) continue;
        if (l < 0) throw std::invalid_argument("metrics: invalid truth label");
        kt = std::max(kt, l + 1);
        ++kept;
    }
    if (kept == 0) {
        throw std::invalid_argument("metrics: every point is noise");
    }
    ContingencyMatrix m(static_cast<std::size_t>(kp), static_cast<std::size_t>(kt));
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (truth.labels[i] != kNoiseLabel) {
            ++m(static_cast<std::size_t>(pred[i]), static_cast<std::size_t>(truth.labels[i]));
        }
    }
    const auto perm = hungarian_max_padded(m).perm;
    std::vector<int> out(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        out[i] = truth.labels[i] == kNoiseLabel ? -1 : (perm[static_cast<std::size_t>(pred[i])] == truth.labels[i]);
    }
    return out;
}

double accuracy_after_alignment(std::span<const int> pred, const GroundTruth& truth) {
    const auto correct = correctness_after_alignment(pred, truth);
    double hit = 0.0, total = 0.0;
    for (int c : correct) {
        if (c < 0) continue;
        hit += c;
        total += 1.0;
    }
    return hit / total;
}

double ari(std::span<const int> pred, const GroundTruth& truth) {
    const Pairs p = non_noise(pred, truth);
    return ari_labels(p.pred, p.truth);
}

double nmi(std::span<const int> pred, const GroundTruth& truth) {
    const Pairs p = non_noise(pred, truth);
    return nmi_labels(p.pred, p.truth);
}

double ami(std::span<const int> pred, const GroundTruth& truth) {
    const Pairs p = non_noise(pred, truth);
    return ami_labels(p.pred, p.truth);
}

MetricBundle evaluate_partition(const DataMatrix& data, const Partition& partition, const GroundTruth& truth) {
    MetricBundle m;
    m.acc = accuracy_after_alignment(partition.labels, truth);
    m.ari = ari(partition.labels, truth);
    m.ami = ami(partition.labels, truth);
    m.nmi = nmi(partition.labels, truth);
    const auto s = data.rows() <= 5000 ? silhouette_exact(data, partition) : silhouette_centroid(data, partition);
    m.silhouette_mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    return m;
}

nlohmann::json to_json(const MetricBundle& m) {
    return {{"acc", m.acc}, {"ari", m.ari}, {"ami", m.ami}, {"nmi", m.nmi}, {"silhouette_mean", m.silhouette_mean}};
}

// ---------------------------------------------------------------------------
// Filtering

std::string to_string(FilterCriterion criterion) {
    switch (criterion) {
        case FilterCriterion::Random: return "random";
        case FilterCriterion::Consensus: return "consensus";
        case FilterCriterion::C: return "c";
        case FilterCriterion::STilde: return "s_tilde";
        case FilterCriterion::CakePr: return "cake_pr";
        case FilterCriterion::CakeHm: return "cake_hm";
    }
    return "unknown";
}

FilterCriterion parse_filter_criterion(std::string_view name) {
    if (name == "random") return FilterCriterion::Random;
    if (name == "consensus" || name == "consensus_agree") return FilterCriterion::Consensus;
    if (name == "c") return FilterCriterion::C;
    if (name == "s_tilde") return FilterCriterion::STilde;
    if (name == "cake_pr") return FilterCriterion::CakePr;
    if (name == "cake_hm") return FilterCriterion::CakeHm;
    throw std::invalid_argument("unknown filter criterion '" + std::string(name) + "'");
}

std::vector<std::size_t> select_indices(const ScoreTable& scores, const FilterSpec& spec) {
    if (!(spec.keep_fraction > 0.0 && spec.keep_fraction <= 1.0)) {
        throw std::invalid_argument("filter: keep_fraction must be in (0, 1]");
    }
    const std::size_t n = scores.size();
    const auto m = static_cast<std::size_t>(std::floor(spec.keep_fraction * static_cast<double>(n) + 1e-9));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (spec.criterion == FilterCriterion::Random) {
        Rng rng(derive_seed(spec.seed, "filter_random"));
        rng.shuffle(order.begin(), order.end());
    } else {
        const std::string name = spec.criterion == FilterCriterion::Consensus ? "consensus_agree"
                                                                               : to_string(spec.criterion);
        const auto* col = scores.column(name);
        if (col == nullptr) {
            throw std::invalid_argument("filter: score table has no '" + name + "' column");
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return (*col)[a] > (*col)[b]; });
    }
    order.resize(m);
    std::sort(order.begin(), order.end());
    return order;
}

Interval t_interval(std::span<const double> values, double confidence) {
    Interval out;
    const std::size_t n = values.size();
    if (n == 0) {
        throw std::invalid_argument("t_interval: empty sample");
    }
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    if (n < 2) return out;
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const boost::math::students_t dist(static_cast<double>(n - 1));
    const double t = boost::math::quantile(dist, 0.5 + 0.5 * confidence);
    out.half_width = t * sd / std::sqrt(static_cast<double>(n));
    return out;
}

FilterResult filter_and_recluster(const DataMatrix& data, const ScoreTable& scores, const FilterSpec& spec,
                                  const EnsembleConfig& recluster, const GroundTruth& truth, std::size_t trials) {
    if (scores.size() != data.rows() || truth.size() != data.rows()) {
        throw std::invalid_argument("filter: scores, data and truth must cover the same points");
    }
    if (trials < 1) {
        throw std::invalid_argument("filter: need at least one trial");
    }
    FilterResult out;
    out.kept = select_indices(scores, spec);
    if (out.kept.size() < static_cast<std::size_t>(recluster.k)) {
        throw std::invalid_argument("filter: keeping " + std::to_string(out.kept.size()) +
                                    " points, fewer than k=" + std::to_string(recluster.k));
    }
    const DataMatrix sub = data.select_rows(out.kept);
    const GroundTruth sub_truth = truth.select(out.kept);
    out.trials.resize(trials);
    parallel_for(trials, recluster.threads, [&](std::size_t t) {
        const Partition p = run_base_algorithm(sub, recluster, derive_seed(recluster.seed, "recluster", t));
        out.trials[t] = evaluate_partition(sub, p, sub_truth);
    });
    auto collect = [&](double MetricBundle::*field) {
        std::vector<double> v;
        for (const auto& m : out.trials) v.push_back(m.*field);
        return t_interval(v);
    };
    out.acc = collect(&MetricBundle::acc);
    out.ari = collect(&MetricBundle::ari);
    out.ami = collect(&MetricBundle::ami);
    out.nmi = collect(&MetricBundle::nmi);
    out.silhouette_mean = collect(&MetricBundle::silhouette_mean);
    return out;
}

nlohmann::json to_json(const FilterResult& r) {
    auto iv = [](const Interval& i) {
        return nlohmann::json{{"mean", i.mean}, {"half_width", i.half_width}, {"lower", i.lower()}, {"upper", i.upper()}};
    };
    return {{"kept", r.kept.size()},
            {"trials", r.trials.size()},
            {"acc", iv(r.acc)},
            {"ari", iv(r.ari)},
            {"ami", iv(r.ami)},
            {"nmi", iv(r.nmi)},
            {"silhouette_mean", iv(r.silhouette_mean)}};
}

// ---------------------------------------------------------------------------
// Selective prediction

std::string to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::CoverageAccuracy: return "coverage_accuracy";
        case CurveKind::RiskCoverage: return "risk_coverage";
        case CurveKind::Roc: return "roc";
        case CurveKind::Pr: return "pr";
    }
    return "unknown";
}

std::vector<double> default_coverage_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 20; ++i) g.push_back(0.05 * i);
    g.back() = 1.0;
    return g;
}

namespace {

// Score-descending tie groups with prefix sums of size, hits and non-noise counts.
class Ranked {
public:
    Ranked(std::span<const double> scores, std::span<const int> correct) {
        if (scores.size() != correct.size()) {
            throw std::invalid_argument("coverage: scores and correctness differ in length");
        }
        if (scores.empty()) {
            throw std::invalid_argument("coverage: no points");
        }
        const std::size_t n = scores.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
        size_.push_back(0);
        hit_.push_back(0);
        valid_.push_back(0);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            double h = 0, v = 0;
            while (j < n && scores[order[j]] == scores[order[i]]) {
                const int c = correct[order[j]];
                if (c >= 0) {
                    v += 1;
                    h += c;
                }
                ++j;
            }
            size_.push_back(size_.back() + static_cast<double>(j - i));
            hit_.push_back(hit_.back() + h);
            valid_.push_back(valid_.back() + v);
            i = j;
        }
        n_ = n;
    }

    std::size_t n() const { return n_; }

    double accuracy_top(std::size_t m) const {
        const auto target = static_cast<double>(m);
        const auto it = std::lower_bound(size_.begin(), size_.end(), target);
        const auto g = static_cast<std::size_t>(std::distance(size_.begin(), it));
        double hit = hit_[g];
        double valid = valid_[g];
        if (size_[g] > target) {
            const double f = (target - size_[g - 1]) / (size_[g] - size_[g - 1]);
            hit = hit_[g - 1] + f * (hit_[g] - hit_[g - 1]);
            valid = valid_[g - 1] + f * (valid_[g] - valid_[g - 1]);
        }
        if (!(valid > 0.0)) {
            throw std::invalid_argument("coverage: retained set holds no labelled points");
        }
        return hit / valid;
    }

    std::size_t count_for(double coverage) const {
        if (!(coverage > 0.0 && coverage <= 1.0 + 1e-12)) {
            throw std::invalid_argument("coverage: values must lie in (0, 1]");
        }
        const auto m = static_cast<std::size_t>(std::ceil(coverage * static_cast<double>(n_) - 1e-9));
        return std::clamp<std::size_t>(m, 1, n_);
    }

private:
    std::vector<double> size_, hit_, valid_;
    std::size_t n_ = 0;
};

}  // namespace

double top_coverage_accuracy(std::span<const double> scores, std::span<const int> correct, double coverage) {
    const Ranked r(scores, correct);
    return r.accuracy_top(r.count_for(coverage));
}

Curve coverage_accuracy(std::span<const double> scores, std::span<const int> correct, std::span<const double> grid) {
    const Ranked r(scores, correct);
    Curve c;
    c.kind = CurveKind::CoverageAccuracy;
    for (double g : grid) {
        c.x.push_back(g);
        c.y.push_back(r.accuracy_top(r.count_for(g)));
    }
    return c;
}

Curve coverage_accuracy(std::span<const double> scores, std::span<const int> pred, const GroundTruth& truth,
                        std::span<const double> grid) {
    return coverage_accuracy(scores, correctness_after_alignment(pred, truth), grid);
}

Curve risk_coverage(std::span<const double> scores, std::span<const int> correct, std::size_t grid_points) {
    const Ranked r(scores, correct);
    const double n = static_cast<double>(r.n());
    const double lo = 1.0 / n;
    Curve c;
    c.kind = CurveKind::RiskCoverage;
    if (r.n() == 1 || grid_points < 2) {
        c.x.push_back(1.0);
        c.y.push_back(1.0 - r.accuracy_top(r.n()));
        return c;
    }
    double prev = -1.0;
    for (std::size_t g = 0; g < grid_points; ++g) {
        const double cov = g + 1 == grid_points ? 1.0 : lo + (1.0 - lo) * static_cast<double>(g) / (grid_points - 1);
        if (cov <= prev) continue;
        c.x.push_back(cov);
        c.y.push_back(1.0 - r.accuracy_top(r.count_for(cov)));
        prev = cov;
    }
    return c;
}

double aurc(std::span<const double> scores, std::span<const int> correct, std::size_t grid_points) {
    const Curve c = risk_coverage(scores, correct, grid_points);
    if (c.x.size() == 1) return c.y.front();
    double area = 0.0;
    for (std::size_t i = 1; i < c.x.size(); ++i) area += 0.5 * (c.y[i] + c.y[i - 1]) * (c.x[i] - c.x[i - 1]);
    return area / (c.x.back() - c.x.front());
}

double aurc(std::span<const double> scores, std::span<const int> pred, const GroundTruth& truth,
            std::size_t grid_points) {
    return aurc(scores, correctness_after_alignment(pred, truth), grid_points);
}

namespace {

void check_binary(std::span<const double> scores, std::span<const int> labels, double& pos, double& neg) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("auc: scores and labels differ in length");
    }
    pos = neg = 0;
    for (int l : labels) {
        if (l == 1) pos += 1;
        else if (l == 0) neg += 1;
        else throw std::invalid_argument("auc: labels must be 0 or 1");
    }
    if (pos == 0 || neg == 0) {
        throw std::invalid_argument("auc: both classes must be present");
    }
}

// Distinct thresholds in descending order with cumulative (tp, fp).
std::vector<std::pair<double, double>> threshold_counts(std::span<const double> scores, std::span<const int> labels) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<std::pair<double, double>> out;
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (labels[order[i]] == 1) tp += 1;
        else fp += 1;
        if (i + 1 == order.size() || scores[order[i + 1]] != scores[order[i]]) out.emplace_back(tp, fp);
    }
    return out;
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
    double pos = 0, neg = 0;
    check_binary(scores, labels, pos, neg);
    const auto ranks = average_ranks(scores);
    double sum = 0.0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (labels[i] == 1) sum += ranks[i];
    }
    return (sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
    double pos = 0, neg = 0;
    check_binary(scores, labels, pos, neg);
    double ap = 0.0, prev_recall = 0.0;
    for (const auto& [tp, fp] : threshold_counts(scores, labels)) {
        const double recall = tp / pos;
        ap += (recall - prev_recall) * (tp / (tp + fp));
        prev_recall = recall;
    }
    return ap;
}

Curve roc_curve(std::span<const double> scores, std::span<const int> labels) {
    double pos = 0, neg = 0;
    check_binary(scores, labels, pos, neg);
    Curve c;
    c.kind = CurveKind::Roc;
    c.x.push_back(0.0);
    c.y.push_back(0.0);
    for (const auto& [tp, fp] : threshold_counts(scores, labels)) {
        c.x.push_back(fp / neg);
        c.y.push_back(tp / pos);
    }
    return c;
}

Curve pr_curve(std::span<const double> scores, std::span<const int> labels) {
    double pos = 0, neg = 0;
    check_binary(scores, labels, pos, neg);
    Curve c;
    c.kind = CurveKind::Pr;
    for (const auto& [tp, fp] : threshold_counts(scores, labels)) {
        c.x.push_back(tp / pos);
        c.y.push_back(tp / (tp + fp));
    }
    return c;
}

std::vector<int> consensus_correctness_labels(const ConsensusResult& consensus, const GroundTruth& truth) {
    auto correct = correctness_after_alignment(consensus.labels, truth);
    for (auto& c : correct) c = c == 1 ? 1 : 0;
    return correct;
}

std::vector<int> consensus_correctness_labels(const LabelMatrix& ensemble, const GroundTruth& truth,
                                              unsigned threads) {
    return consensus_correctness_labels(consensus(ensemble, threads), truth);
}

double error_discovery_auprc(std::span<const double> confidence, std::span<const int> correct) {
    std::vector<double> neg(confidence.size());
    std::vector<int> err(correct.size());
    for (std::size_t i = 0; i < confidence.size(); ++i) neg[i] = -confidence[i];
    for (std::size_t i = 0; i < correct.size(); ++i) err[i] = correct[i] == 1 ? 0 : 1;
    return auprc(neg, err);
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw std::invalid_argument("pearson: inputs must be non-empty and equal length");
    }
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

double spearman(std::span<const double> a, std::span<const double> b) {
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    return pearson(ra, rb);
}

std::vector<double> percentile_bin_accuracy(std::span<const double> scores, std::span<const int> correct,
                                            std::size_t bins) {
    const std::size_t n = scores.size();
    if (correct.size() != n) {
        throw std::invalid_argument("spearman: scores and correctness differ in length");
    }
    if (bins < 2) {
        throw std::invalid_argument("spearman: need at least two bins");
    }
    if (n < bins) {
        throw std::invalid_argument("spearman: a bin would be empty");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> acc(bins);
    const std::size_t base = n / bins, extra = n % bins;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        const std::size_t len = base + (b < extra ? 1 : 0);
        double hit = 0, valid = 0;
        for (std::size_t t = pos; t < pos + len; ++t) {
            const int c = correct[order[t]];
            if (c < 0) continue;
            hit += c;
            valid += 1;
        }
        if (valid == 0) {
            throw std::invalid_argument("spearman: bin " + std::to_string(b) + " holds no labelled points");
        }
        acc[b] = hit / valid;
        pos += len;
    }
    return acc;
}

double spearman_percentile(std::span<const double> scores, std::span<const int> correct, std::size_t bins) {
    const auto acc = percentile_bin_accuracy(scores, correct, bins);
    std::vector<double> rank(bins);
    std::iota(rank.begin(), rank.end(), 1.0);
    return spearman(rank, acc);
}

double spearman_percentile(std::span<const double> scores, std::span<const int> pred, const GroundTruth& truth,
                           std::size_t bins) {
    return spearman_percentile(scores, correctness_after_alignment(pred, truth), bins);
}

// ---------------------------------------------------------------------------
// Studies

double quantile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw std::invalid_argument("quantile: empty input");
    }
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

std::vector<ConvergencePoint> convergence_study(const DataMatrix& data, const EnsembleConfig& config,
                                                const ConvergenceOptions& options) {
    if (options.B < 2) {
        throw std::invalid_argument("convergence: B must be at least 2");
    }
    std::size_t r_max = 0;
    for (auto r : options.r_grid) {
        if (r < 2) throw std::invalid_argument("convergence: every R must be at least 2");
        r_max = std::max(r_max, r);
    }
    std::optional<Ensemble> pool;
    if (options.pool_size > 0) {
        if (options.pool_size < r_max) {
            throw std::invalid_argument("convergence: pool smaller than the largest R");
        }
        EnsembleConfig pc = config;
        pc.runs = options.pool_size;
        pc.seed = derive_seed(options.seed, "convergence_pool");
        pc.threads = options.threads;
        pool = build_ensemble(data, pc);
    }
    ScoreOptions so;
    so.mode = options.mode;
    so.threads = options.threads;
    const std::size_t n = data.rows();

    std::vector<ConvergencePoint> out;
    for (auto R : options.r_grid) {
        std::vector<std::vector<double>> hm(options.B);
        for (std::size_t b = 0; b < options.B; ++b) {
            const std::uint64_t s = derive_seed(options.seed, "subensemble", R, b);
            if (pool) {
                std::vector<std::size_t> idx(pool->labels.runs());
                std::iota(idx.begin(), idx.end(), std::size_t{0});
                Rng rng(s);
                for (std::size_t t = 0; t < R; ++t) std::swap(idx[t], idx[t + rng.below(idx.size() - t)]);
                idx.resize(R);
                hm[b] = compute_scores(data, pool->labels.subset_runs(idx), so).cake_hm;
            } else {
                EnsembleConfig sc = config;
                sc.runs = R;
                sc.seed = s;
                sc.threads = options.threads;
                hm[b] = compute_scores(data, build_ensemble(data, sc).labels, so).cake_hm;
            }
        }
        std::vector<double> sd(n);
        for (std::size_t i = 0; i < n; ++i) {
            double mean = 0;
            for (std::size_t b = 0; b < options.B; ++b) mean += hm[b][i];
            mean /= static_cast<double>(options.B);
            double var = 0;
            for (std::size_t b = 0; b < options.B; ++b) var += (hm[b][i] - mean) * (hm[b][i] - mean);
            sd[i] = std::sqrt(var / static_cast<double>(options.B));
        }
        out.push_back({R, quantile(sd, 0.5), quantile(sd, 0.25), quantile(sd, 0.75)});
    }
    return out;
}

std::vector<MisspecRow> misspecified_k_study(const DataMatrix& data, const GroundTruth& truth,
                                             const EnsembleConfig& config, std::span<const int> k_grid,
                                             const ScoreOptions& score_options) {
    std::vector<MisspecRow> out;
    for (int k : k_grid) {
        EnsembleConfig c = config;
        c.k = k;
        const Ensemble e = build_ensemble(data, c);
        const ConsensusResult cons = consensus(e.labels, c.threads);
        const ScoreTable t = compute_scores(data, e.labels, score_options);
        const auto hhat = entropy_agreement(e.labels, cons).hhat;
        const auto correct = correctness_after_alignment(cons.labels, truth);
        MisspecRow row;
        row.k = k;
        row.ari = ari(cons.labels, truth);
        row.aurc_cake_hm = aurc(t.cake_hm, correct);
        row.aurc_cake_pr = aurc(t.cake_pr, correct);
        row.aurc_c = aurc(t.c, correct);
        row.aurc_s_tilde = aurc(t.s_tilde, correct);
        row.aurc_entropy = aurc(hhat, correct);
        out.push_back(row);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports

nlohmann::json to_json(const Curve& curve) {
    return {{"kind", to_string(curve.kind)}, {"x", curve.x}, {"y", curve.y}};
}

nlohmann::json make_eval_report(nlohmann::json dataset, nlohmann::json config, nlohmann::json metrics,
                                nlohmann::json curves, nlohmann::json intervals) {
    return {{"dataset", std::move(dataset)},
            {"config", std::move(config)},
            {"metrics", std::move(metrics)},
            {"curves", std::move(curves)},
            {"intervals", std::move(intervals)}};
}

void write_curve_csv(const std::filesystem::path& path, const Curve& curve, std::string_view x_name,
                     std::string_view y_name) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("curve: cannot write '" + path.string() + "'");
    }
    out << x_name << ',' << y_name << '\n';
    for (std::size_t i = 0; i < curve.x.size(); ++i) {
        out << format_real(curve.x[i]) << ',' << format_real(curve.y[i]) << '\n';
    }
}

}  // namespace cake
