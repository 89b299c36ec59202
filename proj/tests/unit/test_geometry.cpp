#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "cake/geometry.hpp"
#include "oracles.hpp"

using namespace cake;

namespace {

double centroid_silhouette_oracle(const DataMatrix& x, const std::vector<int>& labels, int k, std::size_t i) {
    if (std::count(labels.begin(), labels.end(), labels[i]) == 1) return 0.0;
    auto c = oracle::centroids(x, labels, k);
    const double a = oracle::dist(x.row(i), c[static_cast<std::size_t>(labels[i])]);
    double b = std::numeric_limits<double>::infinity();
    for (int l = 0; l < k; ++l) {
        if (l != labels[i]) b = std::min(b, oracle::dist(x.row(i), c[static_cast<std::size_t>(l)]));
    }
    const double m = std::max(a, b);
    return m == 0 ? 0 : (b - a) / m;
}

}  // namespace

TEST_CASE("exact silhouette matches the naive double loop") {
    Rng rng(31);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 5 + rng.below(56);
        const int k = 2 + static_cast<int>(rng.below(std::min<std::uint64_t>(4, n - 3)));
        auto x = oracle::random_data(rng, n, 1 + rng.below(4));
        auto l = oracle::random_labels(rng, n, k);
        auto got = silhouette_exact(x, Partition{l, k, {}, {}});
        auto want = oracle::silhouette(x, l);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-12);
    }
}

TEST_CASE("ensemble silhouettes agree with per-run ones") {
    Rng rng(2);
    auto x = oracle::random_data(rng, 70, 3);
    std::vector<Partition> runs;
    for (int r = 0; r < 5; ++r) runs.push_back({oracle::random_labels(rng, 70, 3), 3, {}, {}});
    LabelMatrix e(runs);
    auto ex = silhouette_exact_ensemble(x, e, 3);
    auto ce = silhouette_centroid_ensemble(x, e, 2);
    for (std::size_t r = 0; r < 5; ++r) {
        auto a = silhouette_exact(x, runs[r]);
        auto b = silhouette_centroid(x, runs[r]);
        for (std::size_t i = 0; i < 70; ++i) {
            CHECK(std::abs(ex(i, r) - a[i]) <= 1e-12);
            CHECK(ce(i, r) == b[i]);
        }
    }
    CHECK(silhouette_exact_ensemble(x, e, 1) == silhouette_exact_ensemble(x, e, 6));
}

TEST_CASE("centroid proxy matches its direct definition") {
    Rng rng(17);
    for (int rep = 0; rep < 30; ++rep) {
        auto x = oracle::random_data(rng, 40, 2);
        auto l = oracle::random_labels(rng, 40, 4);
        auto got = silhouette_centroid(x, Partition{l, 4, {}, {}});
        for (std::size_t i = 0; i < 40; ++i) CHECK(std::abs(got[i] - centroid_silhouette_oracle(x, l, 4, i)) <= 1e-12);
    }
}

TEST_CASE("linear kernel silhouette equals the centroid proxy") {
    Rng rng(44);
    for (int rep = 0; rep < 20; ++rep) {
        auto x = oracle::random_data(rng, 50, 3);
        auto l = oracle::random_labels(rng, 50, 3);
        Partition p{l, 3, {}, {}};
        auto k = silhouette_kernel(kernel_gram_linear(x), p);
        auto c = silhouette_centroid(x, p);
        for (std::size_t i = 0; i < 50; ++i) CHECK(std::abs(k[i] - c[i]) <= 1e-9);
    }
}

TEST_CASE("quadratic kernel distances match the explicit feature map") {
    Rng rng(6);
    auto x = oracle::random_data(rng, 25, 2, 1.0);
    auto g = kernel_gram_quadratic(x);
    std::vector<std::size_t> members{1, 4, 7, 9, 20};
    for (std::size_t i = 0; i < 25; ++i) {
        const double want = oracle::lifted_distance_sq(x, i, members);
        CHECK(std::abs(kernel_distance_sq(g, i, members) - want) <= 1e-9 * std::max(1.0, want));
    }
}

TEST_CASE("rbf grams are symmetric with unit diagonal") {
    Rng rng(8);
    auto x = oracle::random_data(rng, 30, 2);
    for (const auto& g : {kernel_gram_rbf(x, 0.3), kernel_gram_self_tuning_rbf(x, 7)}) {
        for (std::size_t i = 0; i < 30; ++i) {
            CHECK(g(i, i) == doctest::Approx(1.0));
            for (std::size_t j = 0; j < 30; ++j) {
                CHECK(g(i, j) == g(j, i));
                CHECK(g(i, j) > 0.0);
            }
        }
    }
    CHECK_THROWS_AS(KernelGram(2, {1, 0.5, 0.4, 1}), std::invalid_argument);
}

TEST_CASE("self-tuning bandwidth skips duplicate points") {
    DataMatrix x(4, 1, {0.0, 0.0, 1.0, 3.0});
    auto g = kernel_gram_self_tuning_rbf(x, 1);
    REQUIRE(g.bandwidths.has_value());
    CHECK((*g.bandwidths)[0] == doctest::Approx(1.0));
    CHECK((*g.bandwidths)[3] == doctest::Approx(2.0));
}

TEST_CASE("gram cache round trips") {
    Rng rng(1);
    auto x = oracle::random_data(rng, 12, 2);
    auto g = kernel_gram_rbf(x, 0.1);
    auto path = std::filesystem::temp_directory_path() / "cake_gram_test.bin";
    save_gram(path, g);
    auto back = load_gram(path);
    CHECK(back.values() == g.values());
    std::filesystem::remove(path);
}

TEST_CASE("aggregation uses population moments") {
    DataMatrix s(2, 4, {0.2, 0.4, 0.6, 0.8, -0.5, -0.5, 0.1, 0.1});
    auto t = aggregate(s, false);
    CHECK(t.mu[0] == doctest::Approx(0.5));
    CHECK(t.sigma[0] == doctest::Approx(std::sqrt(0.05)));
    CHECK(t.s_tilde[0] == doctest::Approx(0.5 - std::sqrt(0.05)));
    CHECK(t.s_tilde[1] == 0.0);
    auto r = aggregate(s, true);
    CHECK(r.s_tilde[1] == doctest::Approx((-0.2 - 0.3 + 1.0) / 2.0));
    for (auto v : r.s_tilde) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("silhouettes are invariant to point order and label names") {
    Rng rng(12);
    auto x = oracle::random_data(rng, 40, 2);
    auto l = oracle::random_labels(rng, 40, 3);
    auto base = silhouette_exact(x, Partition{l, 3, {}, {}});
    std::vector<int> renamed(l);
    for (auto& v : renamed) v = (v + 1) % 3;
    auto again = silhouette_exact(x, Partition{renamed, 3, {}, {}});
    for (std::size_t i = 0; i < 40; ++i) CHECK(std::abs(base[i] - again[i]) <= 1e-15);
}

TEST_CASE("silhouette edge cases") {
    DataMatrix x(4, 1, {0, 1, 5, 6});
    CHECK_THROWS_AS(silhouette_exact(x, Partition{{0, 0, 0, 0}, 2, {}, {}}), std::invalid_argument);
    // Singleton cluster gets 0; label 2 is empty and ignored.
    auto s = silhouette_exact(x, Partition{{0, 0, 1, 1}, 3, {}, {}});
    CHECK(s[0] == doctest::Approx((5.5 - 1.0) / 5.5));
    Partition lone{{0, 0, 0, 1}, 2, {}, {}};
    CHECK(silhouette_exact(x, lone)[3] == 0.0);
    CHECK(silhouette_centroid(x, lone)[3] == 0.0);
    CHECK(silhouette_kernel(kernel_gram_linear(x), lone)[3] == 0.0);
    // point 2 sits exactly on its centroid, the other centroid is 5 away
    DataMatrix z(5, 1, {-1, 1, 0, 4, 6});
    CHECK(silhouette_centroid(z, Partition{{0, 0, 0, 1, 1}, 2, {}, {}})[2] == 1.0);
    CHECK(parse_silhouette_mode("proxy") == SilhouetteMode::Centroid);
}
