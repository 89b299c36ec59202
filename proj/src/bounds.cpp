#include "cake/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "cake/align.hpp"
#include "cake/data.hpp"
#include "cake/parallel.hpp"

namespace cake {

namespace {

constexpr std::size_t kChunk = 4096;

void require_runs(std::size_t R, int k) {
    if (R < 2) throw std::invalid_argument("bounds: R must be at least 2");
    if (k < 2) throw std::invalid_argument("bounds: k must be at least 2");
}

// Runs fn(rng, trials_in_chunk, chunk_index) per chunk with its own substream.
template <class Fn>
void by_chunks(std::size_t trials, std::uint64_t seed, std::string_view role, unsigned threads, Fn&& fn) {
    const std::size_t chunks = (trials + kChunk - 1) / kChunk;
    parallel_for(chunks, threads, [&](std::size_t c) {
        Rng rng(derive_seed(seed, role, c));
        const std::size_t count = std::min(kChunk, trials - c * kChunk);
        fn(rng, count, c);
    });
}

}  // namespace

double misranking_bound(std::size_t R, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("misranking bound: gamma must be positive");
    return 2.0 * std::exp(-static_cast<double>(R) * gamma * gamma / 8.0);
}

double false_positive_bound(std::size_t R, int k, double tau) {
    if (k < 1) throw std::invalid_argument("false-positive bound: k must be positive");
    const double floor_ = 1.0 / k;
    if (!(tau > floor_)) {
        throw std::invalid_argument("false-positive bound: tau must exceed 1/k");
    }
    return std::exp(-0.5 * static_cast<double>(R) * (tau - floor_) * (tau - floor_));
}

double generalized_false_positive_bound(std::size_t R, int k, double theta, double tau) {
    if (theta < 1.0 / k - 1e-12 || theta > 1.0) {
        throw std::invalid_argument("false-positive bound: theta must lie in [1/k, 1]");
    }
    if (tau < theta) {
        throw std::invalid_argument("false-positive bound: tau must be at least theta");
    }
    return std::exp(-0.5 * static_cast<double>(R) * (tau - theta) * (tau - theta));
}

double expected_noise_count(std::size_t n, double phi, std::size_t R, int k, double tau) {
    if (phi < 0.0 || phi > 1.0) throw std::invalid_argument("expected noise count: phi must lie in [0, 1]");
    return static_cast<double>(n) * phi * false_positive_bound(R, k, tau);
}

double sticky_keep_probability(double theta, int k) {
    if (k < 2) throw std::invalid_argument("sticky process: k must be at least 2");
    const double base = 1.0 / k;
    if (theta < base - 1e-12 || theta > 1.0 + 1e-12) {
        throw std::invalid_argument("sticky process: theta=" + std::to_string(theta) + " infeasible for k=" +
                                    std::to_string(k) + " (needs 1/k <= theta <= 1)");
    }
    const double q2 = std::clamp((theta - base) / (1.0 - base), 0.0, 1.0);
    return std::sqrt(q2);
}

void draw_sticky_labels(Rng& rng, int k, double keep, std::span<int> out) {
    for (auto& l : out) {
        l = rng.uniform() < keep ? 0 : static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    }
}

double pair_agreement_fraction(std::span<const int> labels, int k) {
    const std::size_t R = labels.size();
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++counts.at(static_cast<std::size_t>(l));
    double agree = 0.0;
    for (auto c : counts) agree += 0.5 * static_cast<double>(c) * static_cast<double>(c > 0 ? c - 1 : 0);
    return agree / (0.5 * static_cast<double>(R) * static_cast<double>(R - 1));
}

MisrankingEstimate simulate_misranking_pair(std::size_t R, int k, double theta_i, double theta_j, std::size_t trials,
                                            std::uint64_t seed, unsigned threads) {
    require_runs(R, k);
    if (trials == 0) throw std::invalid_argument("misranking: trials must be positive");
    const double qi = sticky_keep_probability(theta_i, k);
    const double qj = sticky_keep_probability(theta_j, k);
    const std::size_t chunks = (trials + kChunk - 1) / kChunk;
    std::vector<double> below(chunks), ties(chunks), sum_i(chunks), sum_j(chunks);
    by_chunks(trials, seed, "misranking", threads, [&](Rng& rng, std::size_t count, std::size_t c) {
        std::vector<int> li(R), lj(R);
        for (std::size_t t = 0; t < count; ++t) {
            draw_sticky_labels(rng, k, qi, li);
            draw_sticky_labels(rng, k, qj, lj);
            const double ci = pair_agreement_fraction(li, k);
            const double cj = pair_agreement_fraction(lj, k);
            below[c] += ci < cj ? 1.0 : 0.0;
            ties[c] += ci == cj ? 1.0 : 0.0;
            sum_i[c] += ci;
            sum_j[c] += cj;
        }
    });
    const double n = static_cast<double>(trials);
    MisrankingEstimate e;
    e.trials = trials;
    e.probability = std::accumulate(below.begin(), below.end(), 0.0) / n;
    e.std_error = std::sqrt(e.probability * (1.0 - e.probability) / n);
    e.tie_probability = std::accumulate(ties.begin(), ties.end(), 0.0) / n;
    e.mean_ci = std::accumulate(sum_i.begin(), sum_i.end(), 0.0) / n;
    e.mean_cj = std::accumulate(sum_j.begin(), sum_j.end(), 0.0) / n;
    return e;
}

MisrankingEstimate simulate_misranking(const BoundParams& params) {
    return simulate_misranking_pair(params.R, params.k, params.theta, params.theta - params.gamma, params.trials,
                                    params.seed, params.threads);
}

FalsePositiveEstimate simulate_false_positive(const BoundParams& params) {
    require_runs(params.R, params.k);
    if (params.trials == 0) throw std::invalid_argument("false positive: trials must be positive");
    const std::size_t R = params.R;
    const int k = params.k;
    const std::size_t chunks = (params.trials + kChunk - 1) / kChunk;
    std::vector<double> above(chunks), sum(chunks), sum_sq(chunks);
    by_chunks(params.trials, params.seed, "false_positive", params.threads,
              [&](Rng& rng, std::size_t count, std::size_t c) {
                  std::vector<int> l(R);
                  for (std::size_t t = 0; t < count; ++t) {
                      for (auto& v : l) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
                      const double ci = pair_agreement_fraction(l, k);
                      above[c] += ci > params.tau ? 1.0 : 0.0;
                      sum[c] += ci;
                      sum_sq[c] += ci * ci;
                  }
              });
    const double n = static_cast<double>(params.trials);
    FalsePositiveEstimate e;
    e.trials = params.trials;
    e.probability = std::accumulate(above.begin(), above.end(), 0.0) / n;
    e.std_error = std::sqrt(e.probability * (1.0 - e.probability) / n);
    e.mean_c = std::accumulate(sum.begin(), sum.end(), 0.0) / n;
    const double var = std::max(0.0, std::accumulate(sum_sq.begin(), sum_sq.end(), 0.0) / n - e.mean_c * e.mean_c);
    e.mean_c_stderr = std::sqrt(var * n / (n - 1.0 > 0 ? n - 1.0 : 1.0) / n);
    return e;
}

UnbiasednessEstimate simulate_stability_mean(std::size_t R, int k, double theta, std::size_t trials,
                                             std::uint64_t seed, std::size_t backbone_per_label, unsigned threads) {
    require_runs(R, k);
    if (trials < 2) throw std::invalid_argument("unbiasedness: need at least two trials");
    if (backbone_per_label < 2) throw std::invalid_argument("unbiasedness: backbone must hold at least two points per label");
    const double keep = sticky_keep_probability(theta, k);
    const auto kk = static_cast<std::size_t>(k);
    const std::size_t n = kk * backbone_per_label + 1;
    const std::size_t chunks = (trials + kChunk - 1) / kChunk;
    std::vector<double> sum(chunks), sum_sq(chunks);
    by_chunks(trials, seed, "unbiasedness", threads, [&](Rng& rng, std::size_t count, std::size_t c) {
        std::vector<int> probe(R);
        std::vector<int> relabel(kk);
        for (std::size_t t = 0; t < count; ++t) {
            draw_sticky_labels(rng, k, keep, probe);
            std::vector<Partition> runs(R);
            for (std::size_t r = 0; r < R; ++r) {
                std::iota(relabel.begin(), relabel.end(), 0);
                rng.shuffle(relabel.begin(), relabel.end());
                auto& p = runs[r];
                p.k = k;
                p.labels.resize(n);
                for (std::size_t i = 0; i + 1 < n; ++i) p.labels[i] = relabel[i / backbone_per_label];
                p.labels[n - 1] = relabel[static_cast<std::size_t>(probe[r])];
            }
            const double ci = stability(LabelMatrix(std::move(runs)), 1).c[n - 1];
            sum[c] += ci;
            sum_sq[c] += ci * ci;
        }
    });
    const double nt = static_cast<double>(trials);
    UnbiasednessEstimate e;
    e.trials = trials;
    e.mean_c = std::accumulate(sum.begin(), sum.end(), 0.0) / nt;
    const double var = std::max(0.0, (std::accumulate(sum_sq.begin(), sum_sq.end(), 0.0) - nt * e.mean_c * e.mean_c) /
                                         (nt - 1.0));
    e.std_error = std::sqrt(var / nt);
    return e;
}

std::vector<SweepRow> misranking_sweep(const SweepConfig& config) {
    std::vector<SweepRow> rows;
    std::size_t cell = 0;
    for (int k : config.ks) {
        for (double gamma : config.gammas) {
            const double base = 1.0 / k;
            if (gamma > 1.0 - base) continue;
            const double theta_j = base + 0.5 * (1.0 - base - gamma);
            const double theta_i = theta_j + gamma;
            for (std::size_t R : config.Rs) {
                const auto e = simulate_misranking_pair(R, k, theta_i, theta_j, config.trials,
                                                        derive_seed(config.seed, "misranking_cell", cell++),
                                                        config.threads);
                rows.push_back({R, k, gamma, e.probability, e.std_error, misranking_bound(R, gamma), theta_i, theta_j});
            }
        }
    }
    return rows;
}

std::vector<SweepRow> false_positive_sweep(const SweepConfig& config) {
    std::vector<SweepRow> rows;
    std::size_t cell = 0;
    for (int k : config.ks) {
        for (double tau : config.taus) {
            if (!(tau > 1.0 / k)) continue;
            for (std::size_t R : config.Rs) {
                BoundParams p;
                p.R = R;
                p.k = k;
                p.tau = tau;
                p.trials = config.trials;
                p.seed = derive_seed(config.seed, "false_positive_cell", cell++);
                p.threads = config.threads;
                const auto e = simulate_false_positive(p);
                rows.push_back({R, k, tau, e.probability, e.std_error, false_positive_bound(R, k, tau), 1.0 / k, 0.0});
            }
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "R,k,gamma_or_tau,empirical,stderr,bound\n";
    for (const auto& r : rows) {
        out << r.R << ',' << r.k << ',' << format_real(r.gamma_or_tau) << ',' << format_real(r.empirical) << ','
            << format_real(r.std_error) << ',' << format_real(r.bound) << '\n';
    }
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("sweep: cannot write '" + path.string() + "'");
    write_sweep_csv(out, rows);
}

}  // namespace cake
