#include <doctest.h>

#include <cmath>

#include "cake/eval.hpp"
#include "oracles.hpp"

using namespace cake;

namespace {

GroundTruth truth_of(const oracle::Labels& l) {
    int k = 0;
    for (int v : l) k = std::max(k, v + 1);
    return {l, k};
}

// Expected top-m accuracy over every ordering consistent with descending
// scores (all tie breaks equally likely).
double coverage_oracle(const std::vector<double>& s, const oracle::Labels& correct, std::size_t m) {
    std::vector<std::size_t> idx(s.size());
    std::iota(idx.begin(), idx.end(), 0);
    double total = 0, count = 0;
    do {
        bool sorted = true;
        for (std::size_t t = 1; t < idx.size(); ++t) sorted = sorted && s[idx[t - 1]] >= s[idx[t]];
        if (!sorted) continue;
        double hit = 0;
        for (std::size_t t = 0; t < m; ++t) hit += correct[idx[t]];
        total += hit / static_cast<double>(m);
        count += 1;
    } while (std::next_permutation(idx.begin(), idx.end()));
    return total / count;
}

}  // namespace

TEST_CASE("external metrics match oracles on small inputs") {
    Rng rng(10);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rng.below(11);
        const int ka = 1 + static_cast<int>(rng.below(std::min<std::uint64_t>(4, n)));
        const int kb = 1 + static_cast<int>(rng.below(std::min<std::uint64_t>(4, n)));
        auto a = oracle::random_labels(rng, n, ka);
        auto b = oracle::random_labels(rng, n, kb);
        auto gt = truth_of(b);
        CAPTURE(n);
        CHECK(std::abs(ari_labels(a, b) - oracle::ari(a, b)) <= 1e-12);
        CHECK(std::abs(nmi_labels(a, b) - oracle::nmi(a, b)) <= 1e-12);
        CHECK(std::abs(accuracy_after_alignment(a, gt) - oracle::accuracy(a, b)) <= 1e-12);
        const double ha = oracle::entropy_of(a), hb = oracle::entropy_of(b);
        if (ha > 0 && hb > 0) {
            const double emi = oracle::expected_mi(a, b);
            CHECK(std::abs(ami_labels(a, b) - oracle::ami(a, b, emi)) <= 1e-12);
        }
    }
}

TEST_CASE("hypergeometric expected MI matches full permutation averaging") {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 4 + rng.below(4);
        auto a = oracle::random_labels(rng, n, 2);
        auto b = oracle::random_labels(rng, n, 2 + static_cast<int>(rng.below(2)));
        CHECK(oracle::expected_mi(a, b) == doctest::Approx(oracle::expected_mi_by_permutation(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("metrics ignore noise, point order and label names") {
    oracle::Labels pred{0, 0, 1, 1, 2, 2, 0};
    GroundTruth gt{{1, 1, 0, 0, 2, -1, 2}, 3};
    CHECK(accuracy_after_alignment(pred, gt) == doctest::Approx(5.0 / 6.0));
    auto corr = correctness_after_alignment(pred, gt);
    CHECK(corr == std::vector<int>{1, 1, 1, 1, 1, -1, 0});

    Rng rng(7);
    auto a = oracle::random_labels(rng, 50, 3), b = oracle::random_labels(rng, 50, 4);
    std::vector<std::size_t> order(50);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order.begin(), order.end());
    oracle::Labels pa(50), pb(50);
    for (std::size_t i = 0; i < 50; ++i) {
        pa[i] = (a[order[i]] + 1) % 3;
        pb[i] = b[order[i]];
    }
    CHECK(ari_labels(pa, pb) == doctest::Approx(ari_labels(a, b)).epsilon(1e-12));
    CHECK(ami_labels(pa, pb) == doctest::Approx(ami_labels(a, b)).epsilon(1e-12));
    CHECK(nmi_labels(pa, pb) == doctest::Approx(nmi_labels(a, b)).epsilon(1e-12));
    CHECK(accuracy_after_alignment(pa, truth_of(pb)) == doctest::Approx(accuracy_after_alignment(a, truth_of(b))));
}

TEST_CASE("metric edge cases") {
    oracle::Labels same{0, 0, 0};
    CHECK(nmi_labels(same, same) == 1.0);
    CHECK(ari_labels(same, same) == 1.0);
    oracle::Labels a{0, 1, 0, 1}, b{0, 1, 0, 1};
    CHECK(ari_labels(a, b) == doctest::Approx(1.0));
    CHECK(ami_labels(a, b) == doctest::Approx(1.0));
}

TEST_CASE("auroc and auprc match the threshold sweep") {
    Rng rng(13);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rng.below(30);
        std::vector<double> s(n);
        oracle::Labels y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng.below(rep % 2 ? 4 : 1000));
            y[i] = static_cast<int>(rng.below(2));
        }
        y[0] = 1;
        y[1] = 0;
        CHECK(std::abs(auroc(s, y) - oracle::auroc(s, y)) <= 1e-12);
        CHECK(std::abs(auprc(s, y) - oracle::auprc(s, y)) <= 1e-12);
        // Flipping labels and negating scores leaves AUROC unchanged.
        std::vector<double> neg(n);
        oracle::Labels flip(n);
        for (std::size_t i = 0; i < n; ++i) {
            neg[i] = -s[i];
            flip[i] = 1 - y[i];
        }
        CHECK(std::abs(auroc(neg, flip) - auroc(s, y)) <= 1e-12);
        CHECK(std::abs(auroc(neg, y) - (1.0 - auroc(s, y))) <= 1e-12);
    }
    CHECK_THROWS_AS(auroc(std::vector<double>{1, 2}, std::vector<int>{1, 1}), std::invalid_argument);
}

TEST_CASE("roc and pr curves span their ranges") {
    std::vector<double> s{0.9, 0.8, 0.7, 0.6};
    std::vector<int> y{1, 0, 1, 0};
    auto roc = roc_curve(s, y);
    CHECK(roc.x.front() == 0.0);
    CHECK(roc.y.front() == 0.0);
    CHECK(roc.x.back() == 1.0);
    CHECK(roc.y.back() == 1.0);
    auto pr = pr_curve(s, y);
    CHECK(pr.x.back() == 1.0);
}

TEST_CASE("tie-aware coverage accuracy equals the average over tie breaks") {
    Rng rng(19);
    for (int rep = 0; rep < 60; ++rep) {
        const std::size_t n = 2 + rng.below(6);
        std::vector<double> s(n);
        oracle::Labels c(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng.below(3));
            c[i] = static_cast<int>(rng.below(2));
        }
        for (std::size_t m = 1; m <= n; ++m) {
            const double cov = static_cast<double>(m) / static_cast<double>(n);
            CHECK(std::abs(top_coverage_accuracy(s, c, cov) - coverage_oracle(s, c, m)) <= 1e-12);
        }
    }
}

TEST_CASE("coverage handles noise and full coverage") {
    std::vector<double> s{0.9, 0.8, 0.7, 0.1};
    std::vector<int> c{1, -1, 0, 1};
    CHECK(top_coverage_accuracy(s, c, 0.5) == 1.0);
    CHECK(top_coverage_accuracy(s, c, 1.0) == doctest::Approx(2.0 / 3.0));
    auto g = default_coverage_grid();
    CHECK(g.size() == 20);
    CHECK(g.back() == 1.0);
    CHECK_THROWS_AS(top_coverage_accuracy(s, c, 0.0), std::invalid_argument);
}

TEST_CASE("aurc follows its trapezoid definition") {
    // Perfect ranking with two errors at the bottom out of 10.
    std::vector<double> s(10);
    std::vector<int> c(10, 1);
    for (int i = 0; i < 10; ++i) s[static_cast<std::size_t>(i)] = 10.0 - i;
    c[8] = c[9] = 0;
    auto curve = risk_coverage(s, c, 100);
    CHECK(curve.x.size() == 100);
    CHECK(curve.x.front() == doctest::Approx(0.1));
    double area = 0;
    for (std::size_t i = 1; i < curve.x.size(); ++i) {
        const double m0 = std::ceil(curve.x[i - 1] * 10 - 1e-9), m1 = std::ceil(curve.x[i] * 10 - 1e-9);
        const double r0 = std::max(0.0, m0 - 8) / m0, r1 = std::max(0.0, m1 - 8) / m1;
        area += 0.5 * (r0 + r1) * (curve.x[i] - curve.x[i - 1]);
    }
    CHECK(aurc(s, c, 100) == doctest::Approx(area / 0.9).epsilon(1e-12));
    // A reversed ranking is worse.
    std::vector<double> rev(s.rbegin(), s.rend());
    CHECK(aurc(rev, c, 100) > aurc(s, c, 100));
}

TEST_CASE("percentile spearman") {
    std::vector<double> s{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<int> c{0, 0, 0, 1, 0, 1, 1, 1, 1, 1};
    auto acc = percentile_bin_accuracy(s, c, 3);
    // Equal-count bins of sizes 4, 3, 3.
    CHECK(acc == std::vector<double>{0.25, 2.0 / 3.0, 1.0});
    CHECK(spearman_percentile(s, c, 3) == doctest::Approx(1.0));
    std::vector<int> flat(10, 1);
    CHECK(spearman_percentile(s, flat, 5) == 0.0);
    CHECK(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{3, 1, 2}) == doctest::Approx(-0.5));
    CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6.5}) > 0.99);
}

TEST_CASE("t intervals") {
    std::vector<double> v{1.0, 2.0, 3.0};
    auto i = t_interval(v);
    CHECK(i.mean == doctest::Approx(2.0));
    // t_{0.975, 2} = 4.302652729911275
    CHECK(i.half_width == doctest::Approx(4.302652729911275 / std::sqrt(3.0)).epsilon(1e-9));
    CHECK(t_interval(std::vector<double>{5.0}).half_width == 0.0);
}

TEST_CASE("selection ranks by criterion with index ties") {
    ScoreTable t;
    t.c = {0.5, 1.0, 0.5, 0.2};
    t.s_tilde = {0.4, 0.1, 0.4, 0.9};
    t.cake_pr = cake_pr(t.c, t.s_tilde);
    t.cake_hm = cake_hm(t.c, t.s_tilde);
    FilterSpec f;
    f.criterion = FilterCriterion::C;
    f.keep_fraction = 0.5;
    CHECK(select_indices(t, f) == std::vector<std::size_t>{0, 1});
    f.criterion = FilterCriterion::STilde;
    CHECK(select_indices(t, f) == std::vector<std::size_t>{0, 3});
    f.criterion = FilterCriterion::Random;
    CHECK(select_indices(t, f).size() == 2);
    f.criterion = FilterCriterion::Consensus;
    CHECK_THROWS_AS(select_indices(t, f), std::invalid_argument);
    CHECK(parse_filter_criterion("cake_hm") == FilterCriterion::CakeHm);
}

TEST_CASE("filter and recluster reports intervals over trials") {
    SyntheticSpec spec;
    spec.family = SyntheticFamily::S1;
    spec.total_points = 300;
    auto ds = generate_synthetic(spec);
    EnsembleConfig c;
    c.k = 3;
    c.runs = 5;
    auto e = build_ensemble(ds.data, c);
    auto scores = compute_scores(ds.data, e.labels);
    FilterSpec f;
    auto r = filter_and_recluster(ds.data, scores, f, c, ds.truth, 3);
    CHECK(r.kept.size() == 210);
    CHECK(r.trials.size() == 3);
    CHECK(r.acc.mean > 0.9);
    CHECK(r.acc.lower() <= r.acc.mean);
}

TEST_CASE("consensus correctness labels count noise as wrong") {
    std::vector<Partition> runs{{{0, 0, 1, 1}, 2, {}, {}}, {{0, 0, 1, 1}, 2, {}, {}}};
    LabelMatrix e(runs);
    GroundTruth gt{{1, 1, 0, -1}, 2};
    CHECK(consensus_correctness_labels(e, gt) == std::vector<int>{1, 1, 1, 0});
}

TEST_CASE("quantiles interpolate linearly") {
    CHECK(quantile({1, 2, 3, 4}, 0.25) == doctest::Approx(1.75));
    CHECK(median({3, 1, 2}) == 2.0);
}
