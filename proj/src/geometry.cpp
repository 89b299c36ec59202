#include "cake/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "cake/parallel.hpp"

namespace cake {

std::string to_string(SilhouetteMode mode) {
    switch (mode) {
        case SilhouetteMode::Exact: return "exact";
        case SilhouetteMode::Centroid: return "centroid";
        case SilhouetteMode::Kernel: return "kernel";
    }
    return "unknown";
}

SilhouetteMode parse_silhouette_mode(std::string_view name) {
    if (name == "exact") return SilhouetteMode::Exact;
    if (name == "centroid" || name == "proxy") return SilhouetteMode::Centroid;
    if (name == "kernel") return SilhouetteMode::Kernel;
    throw std::invalid_argument("unknown silhouette mode '" + std::string(name) + "'");
}

namespace {

std::vector<std::size_t> occupied_sizes(std::span<const int> labels, int k) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) {
        if (l < 0 || l >= k) {
            throw std::invalid_argument("silhouette: label outside [0, k)");
        }
        ++sizes[static_cast<std::size_t>(l)];
    }
    std::size_t occupied = 0;
    for (auto s : sizes) occupied += s > 0 ? 1 : 0;
    if (k < 2 || occupied < 2) {
        throw std::invalid_argument("silhouette: need at least two non-empty clusters");
    }
    return sizes;
}

// s_i from per-cluster distance sums (own cluster sum excludes the point).
double from_sums(std::span<const double> sums, std::span<const std::size_t> sizes, int own) {
    const auto o = static_cast<std::size_t>(own);
    if (sizes[o] <= 1) {
        return 0.0;
    }
    const double a = sums[o] / static_cast<double>(sizes[o] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (c == o || sizes[c] == 0) continue;
        b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    return silhouette_value(a, b);
}

}  // namespace

std::vector<double> silhouette_exact(const DataMatrix& data, const Partition& partition) {
    if (partition.size() != data.rows()) {
        throw std::invalid_argument("silhouette: partition size does not match data");
    }
    const auto sizes = occupied_sizes(partition.labels, partition.k);
    const std::size_t n = data.rows();
    std::vector<double> out(n);
    std::vector<double> sums(sizes.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(sums.begin(), sums.end(), 0.0);
        auto xi = data.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sums[static_cast<std::size_t>(partition.labels[j])] += std::sqrt(squared_distance(xi, data.row(j)));
        }
        out[i] = from_sums(sums, sizes, partition.labels[i]);
    }
    return out;
}

DataMatrix silhouette_exact_ensemble(const DataMatrix& data, const LabelMatrix& ensemble, unsigned threads) {
    const std::size_t n = data.rows();
    const std::size_t runs = ensemble.runs();
    const auto k = static_cast<std::size_t>(ensemble.k());
    if (ensemble.n() != n) {
        throw std::invalid_argument("silhouette: ensemble size does not match data");
    }
    std::vector<std::vector<std::size_t>> sizes(runs);
    for (std::size_t r = 0; r < runs; ++r) {
        sizes[r] = occupied_sizes(ensemble.column(r), ensemble.k());
    }
    // Point-major labels keep the per-distance accumulation contiguous.
    std::vector<std::uint32_t> offset(n * runs);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t r = 0; r < runs; ++r) {
            offset[j * runs + r] = static_cast<std::uint32_t>(r * k + static_cast<std::size_t>(ensemble.label(j, r)));
        }
    }
    DataMatrix out(n, runs);
    const unsigned workers = threads == 0 ? default_threads() : threads;
    const std::size_t blocks = std::min<std::size_t>(n, std::max<unsigned>(1, workers) * 4);
    const std::size_t chunk = (n + blocks - 1) / blocks;
    parallel_for(blocks, workers, [&](std::size_t b) {
        std::vector<double> dist(n);
        std::vector<double> sums(runs * k);
        const std::size_t end = std::min(n, (b + 1) * chunk);
        for (std::size_t i = b * chunk; i < end; ++i) {
            auto xi = data.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                dist[j] = std::sqrt(squared_distance(xi, data.row(j)));
            }
            dist[i] = 0.0;
            std::fill(sums.begin(), sums.end(), 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                const double d = dist[j];
                const std::uint32_t* off = offset.data() + j * runs;
                for (std::size_t r = 0; r < runs; ++r) {
                    sums[off[r]] += d;
                }
            }
            for (std::size_t r = 0; r < runs; ++r) {
                out(i, r) = from_sums(std::span<const double>(sums.data() + r * k, k), sizes[r],
                                      ensemble.label(i, r));
            }
        }
    });
    return out;
}

std::vector<double> silhouette_centroid(const DataMatrix& data, const Partition& partition) {
    if (partition.size() != data.rows()) {
        throw std::invalid_argument("silhouette: partition size does not match data");
    }
    const auto sizes = occupied_sizes(partition.labels, partition.k);
    const std::size_t d = data.cols();
    const auto k = sizes.size();
    DataMatrix centers(k, d);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        auto dst = centers.row(static_cast<std::size_t>(partition.labels[i]));
        auto x = data.row(i);
        for (std::size_t j = 0; j < d; ++j) dst[j] += x[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] == 0) continue;
        for (auto& v : centers.row(c)) v /= static_cast<double>(sizes[c]);
    }
    std::vector<double> out(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const auto own = static_cast<std::size_t>(partition.labels[i]);
        if (sizes[own] <= 1) {
            out[i] = 0.0;  // singleton, as in the exact and kernel forms
            continue;
        }
        const double a = std::sqrt(squared_distance(data.row(i), centers.row(own)));
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c == own || sizes[c] == 0) continue;
            b = std::min(b, std::sqrt(squared_distance(data.row(i), centers.row(c))));
        }
        out[i] = silhouette_value(a, b);
    }
    return out;
}

namespace {

template <class PerRun>
DataMatrix per_run_table(std::size_t n, std::size_t runs, unsigned threads, PerRun&& fn) {
    DataMatrix out(n, runs);
    parallel_for(runs, threads, [&](std::size_t r) {
        const std::vector<double> s = fn(r);
        for (std::size_t i = 0; i < n; ++i) out(i, r) = s[i];
    });
    return out;
}

}  // namespace

DataMatrix silhouette_centroid_ensemble(const DataMatrix& data, const LabelMatrix& ensemble, unsigned threads) {
    if (ensemble.n() != data.rows()) {
        throw std::invalid_argument("silhouette: ensemble size does not match data");
    }
    return per_run_table(ensemble.n(), ensemble.runs(), threads,
                         [&](std::size_t r) { return silhouette_centroid(data, ensemble.run(r)); });
}

// ---------------------------------------------------------------------------
// Kernels

KernelGram::KernelGram(std::size_t n, std::vector<double> values) : n_(n), values_(std::move(values)) {
    if (values_.size() != n * n) {
        throw std::invalid_argument("gram: expected " + std::to_string(n * n) + " entries, got " +
                                    std::to_string(values_.size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double a = values_[i * n + j];
            const double b = values_[j * n + i];
            if (!std::isfinite(a) || !std::isfinite(b)) {
                throw std::invalid_argument("gram: non-finite entry");
            }
            if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a))) {
                throw std::invalid_argument("gram: not symmetric at (" + std::to_string(i) + ", " +
                                            std::to_string(j) + ")");
            }
        }
    }
}

namespace {

template <class Fn>
KernelGram build_gram(const DataMatrix& data, Fn&& kernel) {
    const std::size_t n = data.rows();
    std::vector<double> values(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = kernel(i, j);
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    return KernelGram(n, std::move(values));
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

}  // namespace

KernelGram kernel_gram_linear(const DataMatrix& data) {
    return build_gram(data, [&](std::size_t i, std::size_t j) { return dot(data.row(i), data.row(j)); });
}

KernelGram kernel_gram_quadratic(const DataMatrix& data) {
    return build_gram(data, [&](std::size_t i, std::size_t j) {
        const double v = dot(data.row(i), data.row(j)) + 1.0;
        return v * v;
    });
}

KernelGram kernel_gram_rbf(const DataMatrix& data, double gamma) {
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("rbf: gamma must be positive");
    }
    return build_gram(data, [&](std::size_t i, std::size_t j) {
        return std::exp(-gamma * squared_distance(data.row(i), data.row(j)));
    });
}

KernelGram kernel_gram_self_tuning_rbf(const DataMatrix& data, std::size_t knn) {
    const std::size_t n = data.rows();
    if (knn < 1 || knn >= n) {
        throw std::invalid_argument("self-tuning rbf: need 1 <= knn < n");
    }
    std::vector<double> sigma(n);
    std::vector<double> dist;
    for (std::size_t i = 0; i < n; ++i) {
        dist.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) dist.push_back(std::sqrt(squared_distance(data.row(i), data.row(j))));
        }
        std::sort(dist.begin(), dist.end());
        std::size_t pos = knn - 1;
        while (pos < dist.size() && dist[pos] <= 0.0) ++pos;
        if (pos == dist.size()) {
            throw std::invalid_argument("self-tuning rbf: point " + std::to_string(i) +
                                        " has no neighbour at positive distance");
        }
        sigma[i] = dist[pos];
    }
    KernelGram gram = build_gram(data, [&](std::size_t i, std::size_t j) {
        return std::exp(-squared_distance(data.row(i), data.row(j)) / (sigma[i] * sigma[j]));
    });
    gram.bandwidths = std::move(sigma);
    gram.knn = knn;
    return gram;
}

void save_gram(const std::filesystem::path& path, const KernelGram& gram) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("gram: cannot write '" + path.string() + "'");
    }
    const std::uint64_t n = gram.size();
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(gram.values().data()),
              static_cast<std::streamsize>(gram.values().size() * sizeof(double)));
    if (!out) {
        throw std::runtime_error("gram: write failed for '" + path.string() + "'");
    }
}

KernelGram load_gram(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("gram: cannot open '" + path.string() + "'");
    }
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!in || n == 0 || n > (1ULL << 20)) {
        throw std::runtime_error("gram: bad header in '" + path.string() + "'");
    }
    std::vector<double> values(n * n);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) {
        throw std::runtime_error("gram: truncated file '" + path.string() + "'");
    }
    return KernelGram(n, std::move(values));
}

double kernel_distance_sq(const KernelGram& gram, std::size_t point, std::span<const std::size_t> members) {
    if (members.empty()) {
        throw std::invalid_argument("kernel distance: empty cluster");
    }
    const double m = static_cast<double>(members.size());
    double cross = 0.0;
    double within = 0.0;
    for (auto p : members) {
        cross += gram(point, p);
        for (auto q : members) within += gram(p, q);
    }
    return std::max(0.0, gram(point, point) - 2.0 * cross / m + within / (m * m));
}

std::vector<double> silhouette_kernel(const KernelGram& gram, const Partition& partition) {
    const std::size_t n = gram.size();
    if (partition.size() != n) {
        throw std::invalid_argument("silhouette: partition size does not match gram");
    }
    const auto sizes = occupied_sizes(partition.labels, partition.k);
    const std::size_t k = sizes.size();
    // within[c] = sum over p, q in c of K(p, q)
    std::vector<double> within(k, 0.0);
    std::vector<double> cross(k);
    std::vector<double> out(n);
    std::vector<std::vector<double>> row_sums(n, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        auto row = gram.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            row_sums[i][static_cast<std::size_t>(partition.labels[j])] += row[j];
        }
        within[static_cast<std::size_t>(partition.labels[i])] +=
            row_sums[i][static_cast<std::size_t>(partition.labels[i])];
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(partition.labels[i]);
        if (sizes[own] <= 1) {
            out[i] = 0.0;
            continue;
        }
        auto dist = [&](std::size_t c) {
            const double m = static_cast<double>(sizes[c]);
            return std::sqrt(std::max(0.0, gram(i, i) - 2.0 * row_sums[i][c] / m + within[c] / (m * m)));
        };
        const double a = dist(own);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c == own || sizes[c] == 0) continue;
            b = std::min(b, dist(c));
        }
        out[i] = silhouette_value(a, b);
    }
    return out;
}

DataMatrix silhouette_kernel_ensemble(const KernelGram& gram, const LabelMatrix& ensemble, unsigned threads) {
    if (ensemble.n() != gram.size()) {
        throw std::invalid_argument("silhouette: ensemble size does not match gram");
    }
    return per_run_table(ensemble.n(), ensemble.runs(), threads,
                         [&](std::size_t r) { return silhouette_kernel(gram, ensemble.run(r)); });
}

SilhouetteTable aggregate(const DataMatrix& s, bool remap, SilhouetteMode mode) {
    if (s.cols() < 1) {
        throw std::invalid_argument("aggregate: need at least one run");
    }
    SilhouetteTable t;
    t.s = s;
    t.mode = mode;
    t.remap = remap;
    const std::size_t n = s.rows();
    const auto runs = static_cast<double>(s.cols());
    t.mu.resize(n);
    t.sigma.resize(n);
    t.s_tilde.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = s.row(i);
        double mean = 0.0;
        for (double v : row) mean += v;
        mean /= runs;
        double var = 0.0;
        for (double v : row) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / runs);
        t.mu[i] = mean;
        t.sigma[i] = sd;
        const double gap = mean - sd;
        t.s_tilde[i] = remap ? std::clamp((gap + 1.0) / 2.0, 0.0, 1.0) : std::clamp(gap, 0.0, 1.0);
    }
    return t;
}

}  // namespace cake
