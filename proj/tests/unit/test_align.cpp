#include <doctest.h>

#include <numeric>

#include "cake/align.hpp"
#include "oracles.hpp"

using namespace cake;

namespace {

ContingencyMatrix to_matrix(const oracle::Table& t) {
    ContingencyMatrix m(t.size(), t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = 0; j < t.size(); ++j) m(i, j) = t[i][j];
    }
    return m;
}

LabelMatrix make_ensemble(const std::vector<oracle::Labels>& runs, int k) {
    std::vector<Partition> parts;
    for (const auto& r : runs) parts.push_back({r, k, {}, {}});
    return LabelMatrix(std::move(parts));
}

}  // namespace

TEST_CASE("hungarian matches exhaustive search including tie breaking") {
    Rng rng(21);
    for (int rep = 0; rep < 300; ++rep) {
        const auto k = static_cast<std::size_t>(1 + rng.below(6));
        oracle::Table t(k, std::vector<long long>(k));
        // Small value range forces many ties.
        const auto range = 1 + rng.below(rep % 2 ? 3 : 50);
        for (auto& row : t) {
            for (auto& v : row) v = static_cast<long long>(rng.below(range));
        }
        auto got = hungarian_max(to_matrix(t));
        auto want = oracle::best_permutation(t);
        CHECK(got.agreement == want.value);
        CHECK(got.perm == want.perm);
    }
}

TEST_CASE("padded hungarian handles rectangles") {
    ContingencyMatrix m(2, 3);
    m(0, 2) = 5;
    m(1, 0) = 3;
    m(1, 2) = 4;
    auto r = hungarian_max_padded(m);
    CHECK(r.agreement == 8);
    CHECK(r.perm[0] == 2);
    CHECK(r.perm[1] == 0);
    ContingencyMatrix tall(3, 2);
    tall(0, 0) = 1;
    tall(1, 0) = 4;
    tall(2, 1) = 2;
    auto s = hungarian_max_padded(tall);
    CHECK(s.agreement == 6);
    CHECK(s.perm[1] == 0);
    CHECK(s.perm[2] == 1);
    CHECK(s.perm[0] >= 2);
}

TEST_CASE("contingency counts and validation") {
    std::vector<int> a{0, 0, 1, 2, 2}, b{1, 1, 0, 0, 2};
    auto m = contingency(a, 3, b, 3);
    CHECK(m(0, 1) == 2);
    CHECK(m(1, 0) == 1);
    CHECK(m(2, 0) == 1);
    CHECK(m(2, 2) == 1);
    CHECK(m.total() == 5);
    std::vector<int> bad{0, 3, 0, 0, 0};
    CHECK_THROWS_AS(contingency(a, 3, bad, 3), std::invalid_argument);
}

TEST_CASE("aligning a relabelled copy recovers the original") {
    Rng rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        const int k = 2 + static_cast<int>(rng.below(5));
        auto a = oracle::random_labels(rng, 40, k);
        std::vector<int> perm(static_cast<std::size_t>(k));
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm.begin(), perm.end());
        std::vector<int> b(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) b[i] = perm[static_cast<std::size_t>(a[i])];
        Partition pa{a, k, {}, {}}, pb{b, k, {}, {}};
        CHECK(align(pb, pa).labels == a);
    }
}

TEST_CASE("stability matches the naive pairwise oracle") {
    Rng rng(8);
    for (int rep = 0; rep < 60; ++rep) {
        const int k = 2 + static_cast<int>(rng.below(4));
        const std::size_t R = 2 + rng.below(6);
        const std::size_t n = 10 + rng.below(40);
        std::vector<oracle::Labels> runs;
        for (std::size_t r = 0; r < R; ++r) runs.push_back(oracle::random_labels(rng, n, k));
        auto got = stability(make_ensemble(runs, k), rep % 3);
        auto want = oracle::stability(runs, k);
        CHECK(got.pair_count == R * (R - 1) / 2);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(got.c[i] == want[i]);
            CHECK(got.agree_counts[i] == static_cast<std::uint32_t>(std::lround(want[i] * got.pair_count)));
        }
    }
}

TEST_CASE("stability values lie on the pair grid and are invariant to relabelling") {
    Rng rng(5);
    const int k = 4;
    const std::size_t R = 7, n = 60;
    // Noisy copies of one partition, so that every alignment has a unique optimum.
    auto truth = oracle::random_labels(rng, n, k);
    std::vector<oracle::Labels> runs;
    for (std::size_t r = 0; r < R; ++r) {
        auto run = truth;
        for (auto& l : run) {
            if (rng.uniform() < 0.2) l = static_cast<int>(rng.below(k));
        }
        runs.push_back(run);
    }
    auto base = stability(make_ensemble(runs, k));
    for (double c : base.c) {
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
        const double scaled = c * 21.0;
        CHECK(std::abs(scaled - std::round(scaled)) < 1e-12);
    }
    // Relabel every run by its own bijection.
    auto relabelled = runs;
    for (auto& r : relabelled) {
        std::vector<int> perm{0, 1, 2, 3};
        rng.shuffle(perm.begin(), perm.end());
        for (auto& l : r) l = perm[static_cast<std::size_t>(l)];
    }
    CHECK(stability(make_ensemble(relabelled, k)).c == base.c);
    // Permuting the points permutes c.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order.begin(), order.end());
    auto shuffled = runs;
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t i = 0; i < n; ++i) shuffled[r][i] = runs[r][order[i]];
    }
    auto sc = stability(make_ensemble(shuffled, k));
    for (std::size_t i = 0; i < n; ++i) CHECK(sc.c[i] == base.c[order[i]]);
}

TEST_CASE("identical runs give full stability") {
    Rng rng(1);
    auto r = oracle::random_labels(rng, 30, 3);
    auto s = stability(make_ensemble({r, r, r}, 3));
    for (double c : s.c) CHECK(c == 1.0);
    auto pw = pairwise_agreement(make_ensemble({r, r, r}, 3));
    for (auto v : pw) CHECK(v == 30);
}

TEST_CASE("stability does not depend on the thread count") {
    Rng rng(77);
    std::vector<oracle::Labels> runs;
    for (int r = 0; r < 12; ++r) runs.push_back(oracle::random_labels(rng, 500, 5));
    auto e = make_ensemble(runs, 5);
    CHECK(stability(e, 1).c == stability(e, 8).c);
}
