#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cake/rng.hpp"

namespace cake {

struct BoundParams {
    std::size_t R = 20;
    int k = 3;
    double gamma = 0.2;
    double tau = 0.5;
    double theta = 0.9;
    double phi = 0.1;
    std::size_t trials = 100000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

/// 2 exp(-R gamma^2 / 8)
double misranking_bound(std::size_t R, double gamma);
/// exp(-(R/2)(tau - 1/k)^2); requires tau > 1/k.
double false_positive_bound(std::size_t R, int k, double tau);
/// exp(-(R/2)(tau - theta)^2); requires theta >= 1/k and tau >= theta.
double generalized_false_positive_bound(std::size_t R, int k, double theta, double tau);
/// n phi exp(-(R/2)(tau - 1/k)^2)
double expected_noise_count(std::size_t n, double phi, std::size_t R, int k, double tau);

/// Probability q of repeating the anchor label such that two runs agree with
/// probability theta: theta = q^2 + (1 - q^2)/k. The redraw probability is 1 - q.
double sticky_keep_probability(double theta, int k);

/// R labels from the sticky process (anchor label 0).
void draw_sticky_labels(Rng& rng, int k, double keep, std::span<int> out);

/// Fraction of agreeing run pairs among R labels already in a common frame.
double pair_agreement_fraction(std::span<const int> labels, int k);

struct MisrankingEstimate {
    double probability = 0.0;  // Pr[c_i < c_j]
    double std_error = 0.0;
    double tie_probability = 0.0;
    double mean_ci = 0.0;
    double mean_cj = 0.0;
    std::size_t trials = 0;
};

MisrankingEstimate simulate_misranking_pair(std::size_t R, int k, double theta_i, double theta_j, std::size_t trials,
                                            std::uint64_t seed, unsigned threads = 0);
/// theta_i = params.theta, theta_j = params.theta - params.gamma.
MisrankingEstimate simulate_misranking(const BoundParams& params);

struct FalsePositiveEstimate {
    double probability = 0.0;  // Pr[c_i > tau]
    double std_error = 0.0;
    double mean_c = 0.0;
    double mean_c_stderr = 0.0;
    std::size_t trials = 0;
};

/// Probe point with i.i.d. uniform labels. Any tau is simulated; the bound
/// itself needs tau > 1/k.
FalsePositiveEstimate simulate_false_positive(const BoundParams& params);

struct UnbiasednessEstimate {
    double mean_c = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
};

/// Full-pipeline check: each trial builds an ensemble of R runs over a stable
/// backbone (backbone_per_label points per label) plus one sticky-process
/// probe point, relabels every run by a random bijection, and reads the
/// probe's c from the alignment-based stability estimator.
UnbiasednessEstimate simulate_stability_mean(std::size_t R, int k, double theta, std::size_t trials,
                                             std::uint64_t seed, std::size_t backbone_per_label = 20,
                                             unsigned threads = 0);

struct SweepConfig {
    std::vector<std::size_t> Rs = {8, 16, 32, 64};
    std::vector<double> gammas = {0.2, 0.4};
    std::vector<double> taus = {0.5, 0.7};
    std::vector<int> ks = {2, 3, 5};
    std::size_t trials = 100000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct SweepRow {
    std::size_t R = 0;
    int k = 0;
    double gamma_or_tau = 0.0;
    double empirical = 0.0;
    double std_error = 0.0;
    double bound = 0.0;
    double theta_i = 0.0;
    double theta_j = 0.0;

    bool holds() const { return empirical <= bound + 3.0 * std_error; }
};

/// theta_j = 1/k + (1 - 1/k - gamma)/2 and theta_i = theta_j + gamma. Cells
/// with gamma > 1 - 1/k are skipped.
std::vector<SweepRow> misranking_sweep(const SweepConfig& config);
/// Cells with tau <= 1/k are skipped.
std::vector<SweepRow> false_positive_sweep(const SweepConfig& config);

/// Header R,k,gamma_or_tau,empirical,stderr,bound.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

}  // namespace cake
