#include "cake/cluster.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cake/parallel.hpp"

namespace cake {

void Partition::validate() const {
    if (k < 1) {
        throw std::invalid_argument("Partition: k must be positive");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= k) {
            throw std::invalid_argument("Partition: label " + std::to_string(labels[i]) + " at point " +
                                        std::to_string(i) + " outside [0, k)");
        }
    }
    if (centroids && centroids->rows() != static_cast<std::size_t>(k)) {
        throw std::invalid_argument("Partition: centroid rows do not match k");
    }
}

std::vector<std::size_t> Partition::cluster_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) {
        ++sizes[static_cast<std::size_t>(l)];
    }
    return sizes;
}

LabelMatrix::LabelMatrix(std::vector<Partition> runs) : runs_(std::move(runs)) {
    if (runs_.size() < 2) {
        throw std::invalid_argument("LabelMatrix: need at least two runs, got " + std::to_string(runs_.size()));
    }
    n_ = runs_.front().size();
    k_ = runs_.front().k;
    for (std::size_t r = 0; r < runs_.size(); ++r) {
        runs_[r].validate();
        if (runs_[r].size() != n_) {
            throw std::invalid_argument("LabelMatrix: run " + std::to_string(r) + " has " +
                                        std::to_string(runs_[r].size()) + " points, expected " +
                                        std::to_string(n_));
        }
        if (runs_[r].k != k_) {
            throw std::invalid_argument("LabelMatrix: run " + std::to_string(r) + " has k=" +
                                        std::to_string(runs_[r].k) + ", expected " + std::to_string(k_));
        }
    }
    if (n_ == 0) {
        throw std::invalid_argument("LabelMatrix: empty partitions");
    }
}

LabelMatrix LabelMatrix::subset_runs(std::span<const std::size_t> run_indices) const {
    std::vector<Partition> picked;
    picked.reserve(run_indices.size());
    for (auto r : run_indices) {
        picked.push_back(runs_.at(r));
    }
    return LabelMatrix(std::move(picked));
}

std::string LabelMatrix::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const std::uint64_t header[3] = {n_, runs_.size(), static_cast<std::uint64_t>(k_)};
    h = fnv1a64(header, sizeof header, h);
    for (const auto& run : runs_) {
        for (int l : run.labels) {
            const auto v = static_cast<std::int32_t>(l);
            h = fnv1a64(&v, sizeof v, h);
        }
    }
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(h));
    return buffer;
}

LabelMatrix concat(const LabelMatrix& a, const LabelMatrix& b) {
    if (a.n() != b.n() || a.k() != b.k()) {
        throw std::invalid_argument("concat: ensembles differ in n or k");
    }
    std::vector<Partition> runs;
    for (std::size_t r = 0; r < a.runs(); ++r) {
        runs.push_back(a.run(r));
    }
    for (std::size_t r = 0; r < b.runs(); ++r) {
        runs.push_back(b.run(r));
    }
    return LabelMatrix(std::move(runs));
}

std::string to_string(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::KMeansRandom: return "kmeans_random";
        case Algorithm::KMeansPlusPlus: return "kmeans_plusplus";
        case Algorithm::MiniBatchKMeans: return "minibatch_kmeans";
        case Algorithm::KMedoids: return "kmedoids";
        case Algorithm::Gmm: return "gmm";
    }
    return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
    static const std::map<std::string_view, Algorithm> kNames = {
        {"kmeans_random", Algorithm::KMeansRandom}, {"kmeans", Algorithm::KMeansRandom},
        {"kmeans_plusplus", Algorithm::KMeansPlusPlus}, {"kmeans++", Algorithm::KMeansPlusPlus},
        {"minibatch_kmeans", Algorithm::MiniBatchKMeans}, {"minibatch", Algorithm::MiniBatchKMeans},
        {"kmedoids", Algorithm::KMedoids}, {"gmm", Algorithm::Gmm},
    };
    auto it = kNames.find(name);
    if (it == kNames.end()) {
        throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
    }
    return it->second;
}

std::string to_string(Covariance covariance) {
    return covariance == Covariance::Full ? "full" : "diagonal";
}

Covariance parse_covariance(std::string_view name) {
    if (name == "full") return Covariance::Full;
    if (name == "diagonal" || name == "diag") return Covariance::Diagonal;
    throw std::invalid_argument("unknown covariance type '" + std::string(name) + "'");
}

void EnsembleConfig::validate() const {
    if (runs < 2) {
        throw std::invalid_argument("ensemble: R must be at least 2, got " + std::to_string(runs));
    }
    if (k < 2) {
        throw std::invalid_argument("ensemble: k must be at least 2, got " + std::to_string(k));
    }
    if (max_iter < 1) {
        throw std::invalid_argument("ensemble: max_iter must be at least 1");
    }
    if (tol < 0.0) {
        throw std::invalid_argument("ensemble: tol must be nonnegative");
    }
    if (reg && *reg < 0.0) {
        throw std::invalid_argument("ensemble: reg must be nonnegative");
    }
    if (restarts < 1) {
        throw std::invalid_argument("ensemble: restarts must be at least 1");
    }
    if (batch_size && *batch_size == 0) {
        throw std::invalid_argument("ensemble: batch_size must be positive");
    }
}

nlohmann::json to_json(const EnsembleConfig& config) {
    nlohmann::json j = {
        {"algorithm", to_string(config.algorithm)},
        {"R", config.runs},
        {"k", config.k},
        {"seed", config.seed},
        {"max_iter", config.max_iter},
        {"tol", config.tol},
        {"covariance", to_string(config.covariance)},
        {"restarts", config.restarts},
    };
    j["batch_size"] = config.batch_size ? nlohmann::json(*config.batch_size) : nlohmann::json(nullptr);
    j["reg"] = config.reg ? nlohmann::json(*config.reg) : nlohmann::json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------
// k-means family

namespace {

void require_clusterable(const DataMatrix& data, int k, const char* who) {
    if (data.empty()) {
        throw std::invalid_argument(std::string(who) + ": empty data");
    }
    if (k < 1) {
        throw std::invalid_argument(std::string(who) + ": k must be positive");
    }
    if (static_cast<std::size_t>(k) > data.rows()) {
        throw std::invalid_argument(std::string(who) + ": k=" + std::to_string(k) + " exceeds n=" +
                                    std::to_string(data.rows()));
    }
    data.require_finite();
}

struct Assignment {
    std::vector<int> labels;
    std::vector<double> dist2;
    double inertia = 0.0;
};

int nearest_center(std::span<const double> x, const DataMatrix& centers, double& best) {
    int arg = 0;
    best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.rows(); ++c) {
        const double d2 = squared_distance(x, centers.row(c));
        if (d2 < best) {
            best = d2;
            arg = static_cast<int>(c);
        }
    }
    return arg;
}

void assign(const DataMatrix& data, const DataMatrix& centers, Assignment& out) {
    const std::size_t n = data.rows();
    out.labels.resize(n);
    out.dist2.resize(n);
    out.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.labels[i] = nearest_center(data.row(i), centers, out.dist2[i]);
        out.inertia += out.dist2[i];
    }
}

// Means of assigned points; empty clusters are reseeded at the points
// farthest from their assigned centers (each point used at most once).
DataMatrix update_centers(const DataMatrix& data, const Assignment& a, int k) {
    const std::size_t d = data.cols();
    DataMatrix centers(static_cast<std::size_t>(k), d);
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        auto c = static_cast<std::size_t>(a.labels[i]);
        ++counts[c];
        auto row = data.row(i);
        auto dst = centers.row(c);
        for (std::size_t j = 0; j < d; ++j) {
            dst[j] += row[j];
        }
    }
    std::vector<double> remaining = a.dist2;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        auto dst = centers.row(c);
        if (counts[c] > 0) {
            for (auto& v : dst) {
                v /= static_cast<double>(counts[c]);
            }
            continue;
        }
        const auto far = static_cast<std::size_t>(
            std::distance(remaining.begin(), std::max_element(remaining.begin(), remaining.end())));
        std::copy(data.row(far).begin(), data.row(far).end(), dst.begin());
        remaining[far] = -1.0;
    }
    return centers;
}

}  // namespace

DataMatrix kmeans_seed_centers(const DataMatrix& data, int k, KMeansInit init, Rng& rng) {
    require_clusterable(data, k, "kmeans");
    const std::size_t n = data.rows();
    const auto kk = static_cast<std::size_t>(k);
    std::vector<std::size_t> chosen;
    chosen.reserve(kk);
    if (init == KMeansInit::Random) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t c = 0; c < kk; ++c) {
            const auto j = c + rng.below(n - c);
            std::swap(idx[c], idx[j]);
            chosen.push_back(idx[c]);
        }
    } else {
        std::vector<double> d2(n, std::numeric_limits<double>::infinity());
        std::vector<char> taken(n, 0);
        auto first = static_cast<std::size_t>(rng.below(n));
        chosen.push_back(first);
        taken[first] = 1;
        while (chosen.size() < kk) {
            const auto last = data.row(chosen.back());
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                d2[i] = std::min(d2[i], squared_distance(data.row(i), last));
                if (!taken[i]) {
                    total += d2[i];
                }
            }
            std::size_t pick = n;
            if (total > 0.0) {
                double target = rng.uniform() * total;
                for (std::size_t i = 0; i < n; ++i) {
                    if (taken[i] || d2[i] <= 0.0) {
                        continue;
                    }
                    pick = i;
                    target -= d2[i];
                    if (target < 0.0) {
                        break;
                    }
                }
            }
            if (pick == n) {
                // Every remaining point coincides with a chosen center.
                std::vector<std::size_t> free;
                for (std::size_t i = 0; i < n; ++i) {
                    if (!taken[i]) free.push_back(i);
                }
                pick = free[rng.below(free.size())];
            }
            chosen.push_back(pick);
            taken[pick] = 1;
        }
    }
    return data.select_rows(chosen);
}

KMeansFit kmeans_fit(const DataMatrix& data, const KMeansOptions& options) {
    require_clusterable(data, options.k, "kmeans");
    if (options.max_iter < 1) {
        throw std::invalid_argument("kmeans: max_iter must be at least 1");
    }
    Rng rng(options.seed);
    DataMatrix centers = kmeans_seed_centers(data, options.k, options.init, rng);

    KMeansFit fit;
    Assignment a;
    for (int it = 1; it <= options.max_iter; ++it) {
        assign(data, centers, a);
        fit.inertia_trace.push_back(a.inertia);
        DataMatrix next = update_centers(data, a, options.k);
        double shift = 0.0;
        for (std::size_t c = 0; c < next.rows(); ++c) {
            shift += squared_distance(next.row(c), centers.row(c));
        }
        centers = std::move(next);
        fit.iterations = it;
        if (shift <= options.tol) {
            break;
        }
    }
    assign(data, centers, a);
    fit.inertia_trace.push_back(a.inertia);
    fit.partition.labels = std::move(a.labels);
    fit.partition.k = options.k;
    fit.partition.centroids = std::move(centers);
    fit.partition.inertia = a.inertia;
    return fit;
}

Partition kmeans(const DataMatrix& data, const KMeansOptions& options) {
    return kmeans_fit(data, options).partition;
}

Partition minibatch_kmeans(const DataMatrix& data, const MiniBatchOptions& options) {
    require_clusterable(data, options.k, "minibatch_kmeans");
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    const std::size_t batch = options.batch_size.value_or(std::min<std::size_t>(1024, n));
    if (batch < 1 || batch > n) {
        throw std::invalid_argument("minibatch_kmeans: batch_size must be in [1, n]");
    }
    if (options.max_iter < 1) {
        throw std::invalid_argument("minibatch_kmeans: max_iter must be at least 1");
    }
    Rng rng(options.seed);
    DataMatrix centers = kmeans_seed_centers(data, options.k, KMeansInit::D2Sampling, rng);
    std::vector<double> seen(static_cast<std::size_t>(options.k), 0.0);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<int> batch_labels(batch);

    for (int step = 0; step < options.max_iter; ++step) {
        for (std::size_t b = 0; b < batch; ++b) {
            const auto j = b + rng.below(n - b);
            std::swap(idx[b], idx[j]);
        }
        for (std::size_t b = 0; b < batch; ++b) {
            double best = 0.0;
            batch_labels[b] = nearest_center(data.row(idx[b]), centers, best);
        }
        for (std::size_t b = 0; b < batch; ++b) {
            const auto c = static_cast<std::size_t>(batch_labels[b]);
            seen[c] += 1.0;
            const double eta = 1.0 / seen[c];
            auto x = data.row(idx[b]);
            auto center = centers.row(c);
            for (std::size_t j = 0; j < d; ++j) {
                center[j] += eta * (x[j] - center[j]);
            }
        }
    }
    Assignment a;
    assign(data, centers, a);
    Partition p;
    p.labels = std::move(a.labels);
    p.k = options.k;
    p.centroids = std::move(centers);
    p.inertia = a.inertia;
    return p;
}

KMedoidsFit kmedoids(const DataMatrix& data, int k, std::uint64_t seed, int max_iter) {
    require_clusterable(data, k, "kmedoids");
    const std::size_t n = data.rows();
    const auto kk = static_cast<std::size_t>(k);
    Rng rng(seed);

    // D^2 seeding directly on indices so medoids are data points.
    std::vector<std::size_t> medoids;
    {
        DataMatrix seeds = kmeans_seed_centers(data, k, KMeansInit::D2Sampling, rng);
        std::vector<char> used(n, 0);
        for (std::size_t c = 0; c < kk; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                if (!used[i] && squared_distance(data.row(i), seeds.row(c)) == 0.0) {
                    medoids.push_back(i);
                    used[i] = 1;
                    break;
                }
            }
        }
    }

    std::vector<int> labels(n, 0);
    double cost = 0.0;
    auto assign_to_medoids = [&] {
        cost = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < kk; ++c) {
                const double dist = std::sqrt(squared_distance(data.row(i), data.row(medoids[c])));
                if (dist < best) {
                    best = dist;
                    labels[i] = static_cast<int>(c);
                }
            }
            cost += best;
        }
    };

    assign_to_medoids();
    for (int it = 0; it < max_iter; ++it) {
        std::vector<std::vector<std::size_t>> members(kk);
        for (std::size_t i = 0; i < n; ++i) {
            members[static_cast<std::size_t>(labels[i])].push_back(i);
        }
        bool changed = false;
        for (std::size_t c = 0; c < kk; ++c) {
            if (members[c].empty()) {
                continue;
            }
            std::size_t best_idx = medoids[c];
            double best_sum = std::numeric_limits<double>::infinity();
            for (auto cand : members[c]) {
                double s = 0.0;
                for (auto other : members[c]) {
                    s += std::sqrt(squared_distance(data.row(cand), data.row(other)));
                }
                if (s < best_sum) {
                    best_sum = s;
                    best_idx = cand;
                }
            }
            if (best_idx != medoids[c]) {
                medoids[c] = best_idx;
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
        assign_to_medoids();
    }

    KMedoidsFit fit;
    fit.medoids = medoids;
    fit.partition.labels = std::move(labels);
    fit.partition.k = k;
    fit.partition.centroids = data.select_rows(medoids);
    fit.partition.inertia = cost;
    return fit;
}

// ---------------------------------------------------------------------------
// Ensembles

namespace {

Partition run_once(const DataMatrix& data, const EnsembleConfig& config, std::uint64_t run_seed) {
    switch (config.algorithm) {
        case Algorithm::KMeansRandom:
        case Algorithm::KMeansPlusPlus: {
            KMeansOptions opt;
            opt.k = config.k;
            opt.init = config.algorithm == Algorithm::KMeansRandom ? KMeansInit::Random : KMeansInit::D2Sampling;
            opt.seed = run_seed;
            opt.max_iter = config.max_iter;
            opt.tol = config.tol;
            return kmeans(data, opt);
        }
        case Algorithm::MiniBatchKMeans: {
            MiniBatchOptions opt;
            opt.k = config.k;
            opt.seed = run_seed;
            opt.max_iter = config.max_iter;
            opt.batch_size = config.batch_size;
            return minibatch_kmeans(data, opt);
        }
        case Algorithm::KMedoids: return kmedoids(data, config.k, run_seed, config.max_iter).partition;
        case Algorithm::Gmm: {
            GmmOptions opt;
            opt.k = config.k;
            opt.seed = run_seed;
            opt.max_iter = config.max_iter;
            opt.tol = config.tol;
            opt.covariance = config.covariance;
            opt.reg = config.reg;
            return gmm_partition(gmm_fit(data, opt), data);
        }
    }
    throw std::invalid_argument("run_base_algorithm: unknown algorithm");
}

double within_sse(const DataMatrix& data, const Partition& p) {
    if (p.inertia) return *p.inertia;
    // empty labels simply contribute nothing
    DataMatrix centers(static_cast<std::size_t>(p.k), data.cols());
    std::vector<double> counts(static_cast<std::size_t>(p.k), 0.0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const auto l = static_cast<std::size_t>(p.labels[i]);
        counts[l] += 1.0;
        for (std::size_t j = 0; j < data.cols(); ++j) centers(l, j) += data(i, j);
    }
    for (std::size_t l = 0; l < counts.size(); ++l) {
        for (std::size_t j = 0; j < data.cols(); ++j) centers(l, j) /= std::max(counts[l], 1.0);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        s += squared_distance(data.row(i), centers.row(static_cast<std::size_t>(p.labels[i])));
    }
    return s;
}

}  // namespace

Partition run_base_algorithm(const DataMatrix& data, const EnsembleConfig& config, std::uint64_t run_seed) {
    Partition best = run_once(data, config, run_seed);
    if (config.restarts <= 1) return best;
    double best_sse = within_sse(data, best);
    for (std::size_t j = 1; j < config.restarts; ++j) {
        Partition p = run_once(data, config, derive_seed(run_seed, "restart", j));
        const double sse = within_sse(data, p);
        if (sse < best_sse) {
            best_sse = sse;
            best = std::move(p);
        }
    }
    return best;
}

Ensemble build_ensemble(const DataMatrix& data, const EnsembleConfig& config) {
    config.validate();
    require_clusterable(data, config.k, "ensemble");
    std::vector<Partition> runs(config.runs);
    std::vector<RunRecord> records(config.runs);
    parallel_for(config.runs, config.threads, [&](std::size_t r) {
        const std::uint64_t seed = derive_seed(config.seed, "run", r);
        try {
            runs[r] = run_base_algorithm(data, config, seed);
        } catch (const std::exception& e) {
            throw std::runtime_error("ensemble run " + std::to_string(r) + " failed: " + e.what());
        }
        records[r] = {seed, runs[r].inertia};
    });
    return {LabelMatrix(std::move(runs)), std::move(records)};
}

nlohmann::json ensemble_manifest(const EnsembleConfig& config, const Ensemble& ensemble) {
    nlohmann::json runs = nlohmann::json::array();
    for (std::size_t r = 0; r < ensemble.records.size(); ++r) {
        const auto& rec = ensemble.records[r];
        runs.push_back({{"run", r},
                        {"seed", rec.seed},
                        {"inertia", rec.inertia ? nlohmann::json(*rec.inertia) : nlohmann::json(nullptr)}});
    }
    return {{"config", to_json(config)},
            {"n", ensemble.labels.n()},
            {"labels_hash", ensemble.labels.hash()},
            {"runs", runs}};
}

void export_labels(std::ostream& out, const LabelMatrix& labels) {
    for (std::size_t i = 0; i < labels.n(); ++i) {
        for (std::size_t r = 0; r < labels.runs(); ++r) {
            out << (r ? "," : "") << labels.label(i, r);
        }
        out << '\n';
    }
}

void export_labels(const std::filesystem::path& path, const LabelMatrix& labels) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("labels: cannot write '" + path.string() + "'");
    }
    export_labels(out, labels);
}

LabelMatrix import_labels(std::istream& in) {
    std::vector<std::vector<int>> columns;
    std::vector<std::map<long long, int>> codes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        auto fields = split_csv_record(line);
        if (columns.empty()) {
            columns.resize(fields.size());
            codes.resize(fields.size());
        }
        if (fields.size() != columns.size()) {
            throw ParseError("labels: row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                 " columns, expected " + std::to_string(columns.size()),
                             line_no, fields.size());
        }
        for (std::size_t r = 0; r < fields.size(); ++r) {
            std::string_view cell = fields[r];
            while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
            while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r' || cell.back() == '\t')) {
                cell.remove_suffix(1);
            }
            long long v = 0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
                throw ParseError("labels: non-integer cell '" + std::string(cell) + "' at row " +
                                     std::to_string(line_no) + ", col " + std::to_string(r + 1),
                                 line_no, r + 1);
            }
            auto [it, inserted] = codes[r].try_emplace(v, static_cast<int>(codes[r].size()));
            columns[r].push_back(it->second);
        }
    }
    if (columns.empty()) {
        throw ParseError("labels: empty file", line_no, 0);
    }
    const int k = static_cast<int>(codes.front().size());
    std::vector<Partition> runs;
    for (std::size_t r = 0; r < columns.size(); ++r) {
        const int kr = static_cast<int>(codes[r].size());
        if (kr != k) {
            throw std::invalid_argument("labels: column " + std::to_string(r + 1) + " has " + std::to_string(kr) +
                                        " distinct labels, first column has " + std::to_string(k));
        }
        Partition p;
        p.labels = std::move(columns[r]);
        p.k = k;
        runs.push_back(std::move(p));
    }
    return LabelMatrix(std::move(runs));
}

LabelMatrix import_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("labels: cannot open '" + path.string() + "'");
    }
    return import_labels(in);
}

DataMatrix centroids_from_labels(const DataMatrix& data, std::span<const int> labels, int k) {
    if (labels.size() != data.rows()) {
        throw std::invalid_argument("centroids_from_labels: label count does not match rows");
    }
    const std::size_t d = data.cols();
    DataMatrix centers(static_cast<std::size_t>(k), d);
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        ++counts.at(c);
        auto dst = centers.row(c);
        auto x = data.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            dst[j] += x[j];
        }
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) {
            throw std::invalid_argument("centroids_from_labels: cluster " + std::to_string(c) + " is empty");
        }
        for (auto& v : centers.row(c)) {
            v /= static_cast<double>(counts[c]);
        }
    }
    return centers;
}

}  // namespace cake
