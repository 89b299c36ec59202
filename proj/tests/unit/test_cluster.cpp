#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "cake/cluster.hpp"
#include "oracles.hpp"

using namespace cake;

namespace {

// Two tight groups in 1-D far apart, plus a bit of jitter.
DataMatrix separated_1d(Rng& rng, std::size_t n) {
    DataMatrix x(n, 1);
    for (std::size_t i = 0; i < n; ++i) x(i, 0) = (i % 2 ? 10.0 : 0.0) + rng.uniform(-1, 1);
    return x;
}

double inertia_of(const DataMatrix& x, const std::vector<int>& labels, int k) {
    auto c = oracle::centroids(x, labels, k);
    double s = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double d = x(i, j) - c[static_cast<std::size_t>(labels[i])][j];
            s += d * d;
        }
    }
    return s;
}

// Minimum inertia over every labeling with both clusters non-empty.
double brute_force_two_means(const DataMatrix& x) {
    const std::size_t n = x.rows();
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
        std::vector<int> l(n);
        for (std::size_t i = 0; i < n; ++i) l[i] = (mask >> i) & 1u;
        best = std::min(best, inertia_of(x, l, 2));
    }
    return best;
}

double brute_force_two_medoids(const DataMatrix& x) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < x.rows(); ++a) {
        for (std::size_t b = a + 1; b < x.rows(); ++b) {
            double cost = 0;
            for (std::size_t i = 0; i < x.rows(); ++i) {
                cost += std::min(oracle::dist(x.row(i), x.row(a)), oracle::dist(x.row(i), x.row(b)));
            }
            best = std::min(best, cost);
        }
    }
    return best;
}

}  // namespace

TEST_CASE("k-means reaches the exhaustive optimum on separable data") {
    Rng rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        auto x = separated_1d(rng, 12);
        for (auto init : {KMeansInit::Random, KMeansInit::D2Sampling}) {
            KMeansOptions o;
            o.k = 2;
            o.init = init;
            o.seed = static_cast<std::uint64_t>(rep);
            auto fit = kmeans_fit(x, o);
            CHECK(*fit.partition.inertia == doctest::Approx(brute_force_two_means(x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("k-means result is a Lloyd fixed point with monotone inertia") {
    Rng rng(2);
    for (int rep = 0; rep < 10; ++rep) {
        auto x = oracle::random_data(rng, 80, 3);
        KMeansOptions o;
        o.k = 4;
        o.seed = static_cast<std::uint64_t>(rep);
        o.tol = 0.0;
        auto fit = kmeans_fit(x, o);
        const auto& p = fit.partition;
        CHECK_NOTHROW(p.validate());
        for (std::size_t t = 1; t < fit.inertia_trace.size(); ++t) {
            CHECK(fit.inertia_trace[t] <= fit.inertia_trace[t - 1] + 1e-9);
        }
        REQUIRE(p.centroids.has_value());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            double own = squared_distance(x.row(i), p.centroids->row(static_cast<std::size_t>(p.labels[i])));
            for (int c = 0; c < 4; ++c) {
                CHECK(own <= squared_distance(x.row(i), p.centroids->row(static_cast<std::size_t>(c))) + 1e-9);
            }
        }
        CHECK(*p.inertia == doctest::Approx(inertia_of(x, p.labels, 4)).epsilon(1e-9));
    }
}

TEST_CASE("k-means seeding picks distinct data points") {
    Rng rng(4);
    auto x = oracle::random_data(rng, 30, 2);
    for (auto init : {KMeansInit::Random, KMeansInit::D2Sampling}) {
        Rng r(1);
        auto c = kmeans_seed_centers(x, 5, init, r);
        CHECK(c.rows() == 5);
        std::set<std::vector<double>> uniq;
        for (std::size_t i = 0; i < 5; ++i) uniq.insert({c.row(i).begin(), c.row(i).end()});
        CHECK(uniq.size() == 5);
    }
}

TEST_CASE("k-medoids matches brute force on separable data") {
    Rng rng(13);
    for (int rep = 0; rep < 10; ++rep) {
        auto x = separated_1d(rng, 14);
        auto fit = kmedoids(x, 2, static_cast<std::uint64_t>(rep));
        double cost = 0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            cost += oracle::dist(x.row(i), x.row(fit.medoids[static_cast<std::size_t>(fit.partition.labels[i])]));
        }
        CHECK(cost == doctest::Approx(brute_force_two_medoids(x)).epsilon(1e-12));
    }
}

TEST_CASE("mini-batch k-means separates clear clusters") {
    SyntheticSpec spec;
    spec.family = SyntheticFamily::S1;
    spec.total_points = 900;
    auto ds = generate_synthetic(spec);
    MiniBatchOptions o;
    o.k = 3;
    o.seed = 1;
    o.batch_size = 128;
    auto p = minibatch_kmeans(ds.data, o);
    CHECK_NOTHROW(p.validate());
    CHECK(oracle::accuracy(p.labels, ds.truth.labels) > 0.9);
}

TEST_CASE("gmm log-likelihood is non-decreasing and posteriors normalise") {
    SyntheticSpec spec;
    spec.family = SyntheticFamily::S2;
    spec.total_points = 600;
    auto ds = generate_synthetic(spec);
    for (auto cov : {Covariance::Full, Covariance::Diagonal}) {
        GmmOptions o;
        o.k = 3;
        o.seed = 5;
        o.covariance = cov;
        o.tol = 0.0;
        o.max_iter = 40;
        auto m = gmm_fit(ds.data, o);
        for (std::size_t t = 1; t < m.log_likelihood_trace.size(); ++t) {
            CHECK(m.log_likelihood_trace[t] >= m.log_likelihood_trace[t - 1] - 1e-9);
        }
        auto post = gmm_posteriors(m, ds.data);
        for (std::size_t i = 0; i < post.rows(); ++i) {
            double s = 0;
            for (std::size_t c = 0; c < 3; ++c) s += post(i, c);
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
        for (double v : gmm_pmax(m, ds.data)) {
            CHECK(v >= 1.0 / 3.0 - 1e-12);
            CHECK(v <= 1.0 + 1e-12);
        }
        CHECK(oracle::accuracy(gmm_partition(m, ds.data).labels, ds.truth.labels) > 0.85);
    }
}

TEST_CASE("ensembles are deterministic and thread independent") {
    SyntheticSpec spec;
    spec.family = SyntheticFamily::S4;
    spec.total_points = 400;
    auto ds = generate_synthetic(spec);
    for (auto alg : {Algorithm::KMeansRandom, Algorithm::KMeansPlusPlus, Algorithm::MiniBatchKMeans,
                     Algorithm::KMedoids, Algorithm::Gmm}) {
        EnsembleConfig c;
        c.algorithm = alg;
        c.runs = 4;
        c.k = 4;
        c.seed = 17;
        c.threads = 1;
        auto a = build_ensemble(ds.data, c);
        c.threads = 4;
        auto b = build_ensemble(ds.data, c);
        CAPTURE(to_string(alg));
        CHECK(a.labels.hash() == b.labels.hash());
        for (std::size_t r = 0; r < 4; ++r) CHECK(a.records[r].seed == derive_seed(17, "run", r));
    }
}

TEST_CASE("label import and export are an identity on canonical labels") {
    SyntheticSpec spec;
    spec.family = SyntheticFamily::S1;
    spec.total_points = 300;
    auto ds = generate_synthetic(spec);
    EnsembleConfig c;
    c.runs = 5;
    c.k = 3;
    auto e = build_ensemble(ds.data, c);
    std::stringstream ss;
    export_labels(ss, e.labels);
    auto back = import_labels(ss);
    REQUIRE(back.runs() == 5);
    REQUIRE(back.n() == 300);
    // Import re-encodes by first occurrence, so compare partitions up to naming.
    for (std::size_t r = 0; r < 5; ++r) {
        std::vector<int> a(e.labels.column(r).begin(), e.labels.column(r).end());
        std::vector<int> b(back.column(r).begin(), back.column(r).end());
        CHECK(oracle::ari(a, b) == doctest::Approx(1.0));
    }
    std::stringstream again;
    export_labels(again, back);
    std::stringstream twice(again.str());
    CHECK(import_labels(twice).hash() == back.hash());

    std::stringstream mismatch("0,0\n1,1\n0,2\n");
    CHECK_THROWS_AS(import_labels(mismatch), std::invalid_argument);
}

TEST_CASE("config and label matrix validation") {
    EnsembleConfig c;
    c.runs = 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.runs = 2;
    c.k = 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    Partition p{{0, 1, 2}, 3, {}, {}};
    CHECK_THROWS_AS(LabelMatrix({p}), std::invalid_argument);
    Partition q{{0, 1}, 3, {}, {}};
    CHECK_THROWS_AS(LabelMatrix({p, q}), std::invalid_argument);
    Partition bad{{0, 5, 1}, 3, {}, {}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK(parse_algorithm("kmeans++") == Algorithm::KMeansPlusPlus);
    CHECK(parse_covariance("diag") == Covariance::Diagonal);
    CHECK_THROWS_AS(parse_algorithm("dbscan"), std::invalid_argument);
}
