#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cake/bounds.hpp"

using namespace cake;

TEST_CASE("closed-form bounds") {
    CHECK(misranking_bound(20, 0.2) == doctest::Approx(2.0 * std::exp(-20 * 0.04 / 8)));
    CHECK(false_positive_bound(20, 3, 0.5) == doctest::Approx(std::exp(-10.0 * (0.5 - 1.0 / 3) * (0.5 - 1.0 / 3))));
    CHECK(generalized_false_positive_bound(20, 3, 1.0 / 3, 0.5) == doctest::Approx(false_positive_bound(20, 3, 0.5)));
    CHECK(expected_noise_count(1000, 0.1, 20, 3, 0.5) == doctest::Approx(100 * false_positive_bound(20, 3, 0.5)));
    CHECK_THROWS_AS(false_positive_bound(20, 2, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(false_positive_bound(20, 2, 0.4), std::invalid_argument);
    CHECK_THROWS_AS(misranking_bound(20, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(generalized_false_positive_bound(20, 3, 0.2, 0.5), std::invalid_argument);
}

TEST_CASE("bounds shrink with more runs") {
    for (std::size_t R = 2; R < 200; R += 7) {
        CHECK(misranking_bound(R + 1, 0.3) < misranking_bound(R, 0.3));
        CHECK(false_positive_bound(R + 1, 3, 0.6) < false_positive_bound(R, 3, 0.6));
    }
}

TEST_CASE("sticky process matches its pair agreement rate") {
    for (int k : {2, 3, 5}) {
        for (double theta : {1.0 / k, 0.5, 0.75, 1.0}) {
            if (theta < 1.0 / k) continue;
            const double q = sticky_keep_probability(theta, k);
            CHECK(q * q + (1 - q * q) / k == doctest::Approx(theta));
            Rng rng(derive_seed(1, "sticky", static_cast<std::uint64_t>(k)));
            std::vector<int> l(2);
            double agree = 0;
            const int trials = 200000;
            for (int t = 0; t < trials; ++t) {
                draw_sticky_labels(rng, k, q, l);
                agree += l[0] == l[1];
            }
            const double se = std::sqrt(theta * (1 - theta) / trials) + 1e-12;
            CHECK(std::abs(agree / trials - theta) <= 4 * se);
        }
    }
    CHECK_THROWS_AS(sticky_keep_probability(0.2, 3), std::invalid_argument);
}

TEST_CASE("pair agreement fraction") {
    std::vector<int> l{0, 0, 1, 0};
    CHECK(pair_agreement_fraction(l, 2) == doctest::Approx(3.0 / 6.0));
    std::vector<int> all{2, 2, 2};
    CHECK(pair_agreement_fraction(all, 3) == 1.0);
}

TEST_CASE("simulations are deterministic and thread independent") {
    BoundParams p;
    p.trials = 20000;
    p.seed = 5;
    p.threads = 1;
    auto a = simulate_misranking(p);
    p.threads = 4;
    auto b = simulate_misranking(p);
    CHECK(a.probability == b.probability);
    CHECK(a.mean_ci == b.mean_ci);
    auto fa = simulate_false_positive(p);
    p.threads = 1;
    auto fb = simulate_false_positive(p);
    CHECK(fa.probability == fb.probability);
    CHECK(fa.mean_c == doctest::Approx(1.0 / 3).epsilon(0.01));
    // any tau can be simulated even where the bound does not apply
    p.k = 2;
    p.R = 2;
    p.tau = 0.4;
    auto low = simulate_false_positive(p);
    CHECK(low.probability == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("stability estimator is unbiased for the sticky probe") {
    for (double theta : {1.0 / 3, 0.6}) {
        auto e = simulate_stability_mean(8, 3, theta, 3000, 11, 10, 0);
        CHECK(std::abs(e.mean_c - theta) <= 4 * e.std_error);
    }
}

TEST_CASE("sweeps skip infeasible cells and stay under the bound") {
    SweepConfig c;
    c.Rs = {8, 32};
    c.trials = 5000;
    auto mis = misranking_sweep(c);
    // k=2 with gamma=0.4 is feasible (<= 0.5); every cell present
    CHECK(mis.size() == 3 * 2 * 2);
    for (const auto& r : mis) {
        CHECK(r.theta_i <= 1.0 + 1e-12);
        CHECK(r.theta_j >= 1.0 / r.k - 1e-12);
        CHECK(r.theta_i - r.theta_j == doctest::Approx(r.gamma_or_tau));
        CHECK(r.holds());
    }
    auto fp = false_positive_sweep(c);
    // tau = 0.5 is dropped for k = 2
    CHECK(fp.size() == (1 + 2 + 2) * 2);
    for (const auto& r : fp) CHECK(r.holds());
    std::stringstream ss;
    write_sweep_csv(ss, fp);
    CHECK(ss.str().rfind("R,k,gamma_or_tau,empirical,stderr,bound\n", 0) == 0);
}
