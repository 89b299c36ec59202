#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "cake/baseline.hpp"
#include "cake/bounds.hpp"
#include "cake/cluster.hpp"
#include "cake/data.hpp"
#include "cake/eval.hpp"
#include "cake/geometry.hpp"
#include "cake/score.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cake::cli {
namespace {

// Usage errors discovered after parsing (missing inputs, bad combinations).
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Global {
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out_dir;
};

struct InputArgs {
    std::string data;
    bool no_header = false;
    int label_column = -1;  // -1 = use a column named "label" when present
    bool no_label = false;
    bool standardize = false;
};

struct EnsembleArgs {
    std::string algorithm = "kmeans_random";
    std::size_t R = 20;
    int k = 3;
    int max_iter = 300;
    double tol = 1e-4;
    std::size_t batch_size = 0;
    std::string covariance = "full";
    double reg = -1.0;
    std::size_t restarts = 1;
};

void add_input(CLI::App* app, InputArgs& in, bool required) {
    auto* opt = app->add_option("--data", in.data, "data CSV");
    if (required) opt->required();
    app->add_flag("--no-header", in.no_header, "CSV has no header row");
    app->add_option("--label-column", in.label_column, "0-based truth column (default: header 'label')");
    app->add_flag("--no-label", in.no_label, "ignore any truth column");
    app->add_flag("--standardize", in.standardize, "z-score every feature");
}

void add_ensemble(CLI::App* app, EnsembleArgs& e) {
    app->add_option("--algorithm", e.algorithm, "kmeans_random|kmeans_plusplus|minibatch_kmeans|kmedoids|gmm")
        ->capture_default_str();
    app->add_option("--R,-R", e.R, "ensemble size")->capture_default_str();
    app->add_option("--k,-k", e.k, "clusters per run")->capture_default_str();
    app->add_option("--max-iter", e.max_iter)->capture_default_str();
    app->add_option("--tol", e.tol)->capture_default_str();
    app->add_option("--batch-size", e.batch_size, "mini-batch size (default min(1024, n))");
    app->add_option("--covariance", e.covariance, "full|diagonal")->capture_default_str();
    app->add_option("--reg", e.reg, "GMM covariance regulariser (default 1e-6 trace/d)");
    app->add_option("--restarts", e.restarts, "starts per run, lowest SSE kept")->capture_default_str();
}

EnsembleConfig to_config(const EnsembleArgs& e, const Global& g, std::string_view role) {
    EnsembleConfig c;
    c.algorithm = parse_algorithm(e.algorithm);
    c.runs = e.R;
    c.k = e.k;
    c.seed = derive_seed(g.seed, role);
    c.max_iter = e.max_iter;
    c.tol = e.tol;
    if (e.batch_size > 0) c.batch_size = e.batch_size;
    c.covariance = parse_covariance(e.covariance);
    if (e.reg >= 0.0) c.reg = e.reg;
    c.restarts = e.restarts;
    c.threads = g.threads;
    c.validate();
    return c;
}

CsvData load_input(const InputArgs& in) {
    if (in.data.empty()) throw UsageError("--data is required");
    std::optional<std::size_t> label;
    if (!in.no_label) {
        if (in.label_column >= 0) {
            label = static_cast<std::size_t>(in.label_column);
        } else if (!in.no_header) {
            std::ifstream probe(in.data);
            if (!probe) throw std::runtime_error("cannot open '" + in.data + "'");
            std::string first;
            std::getline(probe, first);
            const auto fields = split_csv_record(first);
            for (std::size_t j = 0; j < fields.size(); ++j) {
                if (fields[j] == "label") label = j;
            }
        }
    }
    CsvData csv = load_csv(in.data, !in.no_header, label);
    if (in.standardize) csv.data = standardize(csv.data);
    return csv;
}

fs::path prepare_out(const Global& g) {
    fs::path dir = g.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("CAKE_OUTPUT_DIR");
        dir = env && *env ? fs::path(env) : fs::path("out");
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

template <class T>
std::vector<double> as_double(const std::vector<T>& v) {
    return {v.begin(), v.end()};
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
    std::string family = "s1";
    std::size_t n = 0;
    std::size_t noise = 0;
    bool noise_set = false;
    std::size_t blob_dims = 20;
    std::size_t blob_clusters = 10;
    double blob_std = 1.0;
};

int cmd_generate(const GenerateArgs& a, const Global& g, std::ostream& out) {
    SyntheticSpec spec;
    spec.family = parse_family(a.family);
    spec.seed = g.seed;
    if (a.n > 0) spec.total_points = a.n;
    if (a.noise_set) spec.noise_points = a.noise;
    spec.blob_dims = a.blob_dims;
    spec.blob_clusters = a.blob_clusters;
    spec.blob_std = a.blob_std;
    const Dataset ds = generate_synthetic(spec);
    const fs::path dir = prepare_out(g);
    save_csv(dir / "data.csv", ds.data, &ds.truth);
    write_json(dir / "manifest.json", dataset_manifest(spec, ds));
    out << "wrote " << (dir / "data.csv").string() << " (" << ds.data.rows() << "x" << ds.data.cols() << ")\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
    InputArgs input;
    EnsembleArgs ensemble;
    std::string labels;
    std::string mode = "auto";
    bool remap = false;
    std::size_t knn = 7;
    std::string gram_cache;
    bool baselines = false;
    std::size_t bootstrap_B = 0;
    double bootstrap_fraction = 0.8;
    std::string format = "csv";
};

int cmd_score(const ScoreArgs& a, const Global& g, std::ostream& out) {
    if (a.format != "csv" && a.format != "json" && a.format != "both") {
        throw UsageError("--format must be csv, json or both");
    }
    const CsvData csv = load_input(a.input);
    std::optional<EnsembleConfig> config;
    LabelMatrix labels;
    json manifest;
    if (!a.labels.empty()) {
        labels = import_labels(fs::path(a.labels));
        if (labels.n() != csv.data.rows()) {
            throw UsageError("label matrix has " + std::to_string(labels.n()) + " rows, data has " +
                             std::to_string(csv.data.rows()));
        }
        manifest = {{"config", {{"source", a.labels}, {"R", labels.runs()}, {"k", labels.k()}}},
                    {"n", labels.n()},
                    {"labels_hash", labels.hash()},
                    {"runs", json::array()}};
    } else {
        config = to_config(a.ensemble, g, "ensemble");
        Ensemble e = build_ensemble(csv.data, *config);
        manifest = ensemble_manifest(*config, e);
        labels = std::move(e.labels);
    }

    ScoreOptions so;
    so.remap = a.remap;
    so.threads = g.threads;
    if (a.mode != "auto") so.mode = parse_silhouette_mode(a.mode);
    std::optional<KernelGram> gram;
    if (so.mode == SilhouetteMode::Kernel) {
        if (!a.gram_cache.empty() && fs::exists(a.gram_cache)) {
            gram = load_gram(a.gram_cache);
        } else {
            gram = kernel_gram_self_tuning_rbf(csv.data, a.knn);
            if (!a.gram_cache.empty()) save_gram(a.gram_cache, *gram);
        }
        so.gram = &*gram;
    }
    ScoreTable table = compute_scores(csv.data, labels, so);

    if (a.baselines) {
        const ConsensusResult cons = consensus(labels, g.threads);
        table.set_baseline("consensus_agree", cons.agreement);
        table.set_baseline("entropy_hhat", entropy_agreement(labels, cons).hhat);
        EnsembleConfig base = config.value_or(to_config(a.ensemble, g, "ensemble"));
        base.k = labels.k();
        BootstrapConfig bc;
        bc.B = a.bootstrap_B > 0 ? a.bootstrap_B : std::max<std::size_t>(labels.runs(), 2);
        bc.subsample_fraction = a.bootstrap_fraction;
        bc.seed = derive_seed(g.seed, "bootstrap");
        bc.threads = g.threads;
        table.set_baseline("boot", bootstrap_stability(csv.data, base, bc).score);
        const auto pmax = gmm_pmax_scores(csv.data, labels.k(), derive_seed(g.seed, "gmm_pmax"));
        table.set_baseline("gmm_pmax", pmax);
        table.set_baseline("fusion", rank_average_fusion(table.cake_hm, pmax));
    }

    const fs::path dir = prepare_out(g);
    if (a.format != "json") write_scores_csv(dir / "scores.csv", table);
    if (a.format != "csv") {
        json j = to_json(table);
        j["manifest"] = manifest;
        write_json(dir / "scores.json", j);
    }
    write_json(dir / "ensemble_manifest.json", manifest);
    export_labels(dir / "labels.csv", labels);
    out << "scored " << table.size() << " points, R=" << labels.runs() << ", mode=" << to_string(table.mode)
        << ", hash=" << table.manifest_hash << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    InputArgs input;
    EnsembleArgs ensemble;
    std::string protocol;
    std::string scores;
    std::string labels;
    std::vector<std::string> criteria;
    double keep = 0.7;
    std::size_t trials = 10;
    std::size_t bins = 10;
    std::size_t grid_points = 100;
    std::vector<std::size_t> r_grid = {5, 10, 20, 30, 40};
    std::size_t B = 10;
    std::size_t recluster_restarts = 10;
    std::size_t pool = 0;
    std::vector<int> k_grid;
    std::string mode = "auto";
};

const std::vector<std::string> kProtocols = {"filter", "coverage", "auroc", "aurc",
                                             "spearman", "convergence", "misspec", "error-discovery"};

std::vector<std::pair<std::string, const std::vector<double>*>> score_columns(const ScoreTable& t) {
    std::vector<std::pair<std::string, const std::vector<double>*>> cols = {
        {"c", &t.c}, {"s_tilde", &t.s_tilde}, {"cake_pr", &t.cake_pr}, {"cake_hm", &t.cake_hm}};
    for (const auto& [name, col] : t.baselines) cols.emplace_back(name, &col);
    return cols;
}

int cmd_eval(const EvalArgs& a, const Global& g, std::ostream& out) {
    if (std::find(kProtocols.begin(), kProtocols.end(), a.protocol) == kProtocols.end()) {
        throw UsageError("unknown protocol '" + a.protocol + "'");
    }
    const CsvData csv = load_input(a.input);
    if (!csv.truth) {
        throw UsageError("protocol '" + a.protocol + "' needs ground-truth labels in the data file");
    }
    const GroundTruth& truth = *csv.truth;
    const fs::path dir = prepare_out(g);
    json dataset = {{"path", a.input.data}, {"n", csv.data.rows()}, {"d", csv.data.cols()}, {"k_true", truth.k_true}};
    json config = {{"protocol", a.protocol}, {"seed", g.seed}};
    json metrics = json::object();
    json curves = json::object();
    json intervals = json::object();

    auto need_scores = [&]() {
        if (a.scores.empty()) throw UsageError("protocol '" + a.protocol + "' needs --scores");
        ScoreTable t = read_scores_csv(fs::path(a.scores));
        if (t.size() != csv.data.rows()) throw UsageError("score table and data differ in length");
        return t;
    };
    auto need_correctness = [&]() {
        if (a.labels.empty()) throw UsageError("protocol '" + a.protocol + "' needs --labels (ensemble label CSV)");
        const LabelMatrix lm = import_labels(fs::path(a.labels));
        if (lm.n() != csv.data.rows()) throw UsageError("label matrix and data differ in length");
        return consensus_correctness_labels(lm, truth, g.threads);
    };

    if (a.protocol == "filter") {
        const ScoreTable t = need_scores();
        EnsembleConfig rc = to_config(a.ensemble, g, "recluster");
        rc.k = a.ensemble.k;
        rc.restarts = a.recluster_restarts;
        std::vector<std::string> criteria = a.criteria;
        if (criteria.empty()) {
            criteria = {"random", "c", "s_tilde", "cake_pr", "cake_hm"};
            if (t.column("consensus_agree")) criteria.insert(criteria.begin() + 1, "consensus");
        }
        config["keep_fraction"] = a.keep;
        config["trials"] = a.trials;
        config["recluster"] = to_json(rc);
        {
            FilterSpec full{FilterCriterion::Random, 1.0, g.seed};
            const auto r = filter_and_recluster(csv.data, t, full, rc, truth, a.trials);
            metrics["full"] = {{"acc", r.acc.mean}, {"ari", r.ari.mean}, {"ami", r.ami.mean}, {"nmi", r.nmi.mean}};
            intervals["full"] = to_json(r);
        }
        for (const auto& name : criteria) {
            FilterSpec spec{parse_filter_criterion(name), a.keep, derive_seed(g.seed, "filter")};
            const auto r = filter_and_recluster(csv.data, t, spec, rc, truth, a.trials);
            intervals[name] = to_json(r);
            metrics[name] = {{"acc", r.acc.mean}, {"ari", r.ari.mean}, {"ami", r.ami.mean}, {"nmi", r.nmi.mean}};
            out << name << ": ACC " << r.acc.mean << " +/- " << r.acc.half_width << '\n';
        }
    } else if (a.protocol == "coverage") {
        const ScoreTable t = need_scores();
        const auto correct = need_correctness();
        const auto grid = default_coverage_grid();
        for (const auto& [name, col] : score_columns(t)) {
            const Curve c = coverage_accuracy(*col, correct, grid);
            curves[name] = to_json(c);
            write_curve_csv(dir / ("coverage_" + name + ".csv"), c, "coverage", "accuracy");
            metrics[name] = {{"accuracy_at_full", c.y.back()}};
        }
        out << "coverage curves written for " << curves.size() << " scores\n";
    } else if (a.protocol == "auroc") {
        const ScoreTable t = need_scores();
        const auto correct = need_correctness();
        for (const auto& [name, col] : score_columns(t)) {
            metrics[name] = {{"auroc", auroc(*col, correct)}, {"auprc", auprc(*col, correct)}};
            curves[name + "_roc"] = to_json(roc_curve(*col, correct));
            out << name << ": AUROC " << metrics[name]["auroc"].get<double>() << ", AUPRC "
                << metrics[name]["auprc"].get<double>() << '\n';
        }
    } else if (a.protocol == "aurc") {
        const ScoreTable t = need_scores();
        const auto correct = need_correctness();
        config["grid_points"] = a.grid_points;
        for (const auto& [name, col] : score_columns(t)) {
            metrics[name] = {{"aurc", aurc(*col, correct, a.grid_points)},
                             {"aurc_grid_20", aurc(*col, correct, 20)}};
            const Curve c = risk_coverage(*col, correct, a.grid_points);
            write_curve_csv(dir / ("risk_" + name + ".csv"), c, "coverage", "risk");
            curves[name] = to_json(c);
        }
    } else if (a.protocol == "spearman") {
        const ScoreTable t = need_scores();
        const auto correct = need_correctness();
        config["bins"] = a.bins;
        for (const auto& [name, col] : score_columns(t)) {
            metrics[name] = {{"spearman", spearman_percentile(*col, correct, a.bins)},
                             {"bin_accuracy", percentile_bin_accuracy(*col, correct, a.bins)}};
        }
    } else if (a.protocol == "error-discovery") {
        const ScoreTable t = need_scores();
        const auto correct = need_correctness();
        for (const auto& [name, col] : score_columns(t)) {
            metrics[name] = {{"auprc_error", error_discovery_auprc(*col, correct)}};
        }
    } else if (a.protocol == "convergence") {
        const EnsembleConfig ec = to_config(a.ensemble, g, "ensemble");
        ConvergenceOptions co;
        co.r_grid = a.r_grid;
        co.B = a.B;
        co.pool_size = a.pool;
        co.seed = derive_seed(g.seed, "convergence");
        co.threads = g.threads;
        if (a.mode != "auto") co.mode = parse_silhouette_mode(a.mode);
        config["ensemble"] = to_json(ec);
        config["B"] = a.B;
        config["pool"] = a.pool;
        Curve c;
        c.kind = CurveKind::CoverageAccuracy;
        json rows = json::array();
        for (const auto& p : convergence_study(csv.data, ec, co)) {
            rows.push_back({{"R", p.R}, {"median", p.median}, {"q1", p.q1}, {"q3", p.q3}});
            c.x.push_back(static_cast<double>(p.R));
            c.y.push_back(p.median);
            out << "R=" << p.R << " median std " << p.median << '\n';
        }
        metrics["convergence"] = rows;
        write_curve_csv(dir / "convergence.csv", c, "R", "median_std");
    } else if (a.protocol == "misspec") {
        EnsembleConfig ec = to_config(a.ensemble, g, "ensemble");
        std::vector<int> grid = a.k_grid;
        if (grid.empty()) {
            for (int k = std::max(2, truth.k_true - 1); k <= truth.k_true + 2; ++k) grid.push_back(k);
        }
        ScoreOptions so;
        so.threads = g.threads;
        if (a.mode != "auto") so.mode = parse_silhouette_mode(a.mode);
        json rows = json::array();
        for (const auto& r : misspecified_k_study(csv.data, truth, ec, grid, so)) {
            rows.push_back({{"k", r.k},
                            {"ari", r.ari},
                            {"aurc_cake_hm", r.aurc_cake_hm},
                            {"aurc_cake_pr", r.aurc_cake_pr},
                            {"aurc_c", r.aurc_c},
                            {"aurc_s_tilde", r.aurc_s_tilde},
                            {"aurc_entropy", r.aurc_entropy}});
        }
        metrics["misspec"] = rows;
        config["ensemble"] = to_json(ec);
    }
    write_json(dir / "report.json", make_eval_report(dataset, config, metrics, curves, intervals));
    out << "wrote " << (dir / "report.json").string() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// bounds

struct BoundsArgs {
    std::string kind = "all";
    std::vector<std::size_t> Rs = {8, 16, 32, 64};
    std::vector<double> gammas = {0.2, 0.4};
    std::vector<double> taus = {0.5, 0.7};
    std::vector<int> ks = {2, 3, 5};
    std::size_t trials = 100000;
};

int cmd_bounds(const BoundsArgs& a, const Global& g, std::ostream& out) {
    if (a.kind != "all" && a.kind != "misranking" && a.kind != "false-positive") {
        throw UsageError("--kind must be all, misranking or false-positive");
    }
    for (int k : a.ks) {
        if (k < 2) throw UsageError("every k must be at least 2");
    }
    for (auto R : a.Rs) {
        if (R < 2) throw UsageError("every R must be at least 2");
    }
    for (double gm : a.gammas) {
        if (!(gm > 0.0 && gm <= 1.0)) throw UsageError("gamma must lie in (0, 1]");
    }
    if (a.trials == 0) throw UsageError("--trials must be positive");
    SweepConfig sc;
    sc.Rs = a.Rs;
    sc.gammas = a.gammas;
    sc.taus = a.taus;
    sc.ks = a.ks;
    sc.trials = a.trials;
    sc.seed = derive_seed(g.seed, "bounds");
    sc.threads = g.threads;
    std::vector<SweepRow> mis, fp;
    if (a.kind != "false-positive") {
        mis = misranking_sweep(sc);
        if (mis.empty()) throw UsageError("no feasible misranking cell (needs gamma <= 1 - 1/k)");
    }
    if (a.kind != "misranking") {
        fp = false_positive_sweep(sc);
        if (fp.empty()) throw UsageError("no feasible false-positive cell (needs tau > 1/k)");
    }
    const fs::path dir = prepare_out(g);
    std::size_t violations = 0;
    if (!mis.empty()) write_sweep_csv(dir / "misranking.csv", mis);
    if (!fp.empty()) write_sweep_csv(dir / "false_positive.csv", fp);
    for (const auto* rows : {&mis, &fp}) {
        for (const auto& r : *rows) {
            if (!r.holds()) {
                ++violations;
                out << "violation: R=" << r.R << " k=" << r.k << " param=" << r.gamma_or_tau << " empirical "
                    << r.empirical << " > bound " << r.bound << '\n';
            }
        }
    }
    out << mis.size() + fp.size() << " cells, " << violations << " violations\n";
    return violations == 0 ? kExitOk : kExitRuntime;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
    std::vector<std::size_t> sizes = {4000};
    std::vector<std::size_t> Rs = {5, 10, 20, 40};
    std::string family = "s1";
    std::string algorithm = "kmeans_random";
    int k = 0;
    std::size_t repeats = 1;
    bool skip_exact = false;
};

int cmd_bench(const BenchArgs& a, const Global& g, std::ostream& out) {
    if (a.repeats == 0) throw UsageError("--repeats must be positive");
    const fs::path dir = prepare_out(g);
    std::ofstream csv(dir / "timing.csv");
    if (!csv) throw std::runtime_error("cannot write timing.csv");
    csv << "n,R,ensemble_s,exact_s,proxy_s,pearson,mae\n";
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point t0) { return std::chrono::duration<double>(clock::now() - t0).count(); };
    for (auto n : a.sizes) {
        SyntheticSpec spec;
        spec.family = parse_family(a.family);
        spec.seed = derive_seed(g.seed, "bench_data", n);
        spec.total_points = n;
        const Dataset ds = generate_synthetic(spec);
        for (auto R : a.Rs) {
            EnsembleConfig ec;
            ec.algorithm = parse_algorithm(a.algorithm);
            ec.runs = R;
            ec.k = a.k > 0 ? a.k : ds.truth.k_true;
            ec.seed = derive_seed(g.seed, "bench_ensemble", R);
            ec.threads = g.threads;
            ec.validate();
            std::vector<double> t_ens, t_exact, t_proxy;
            double corr = 0.0, mae = 0.0;
            for (std::size_t rep = 0; rep < a.repeats; ++rep) {
                auto t0 = clock::now();
                const Ensemble e = build_ensemble(ds.data, ec);
                t_ens.push_back(seconds(t0));
                ScoreOptions so;
                so.threads = g.threads;
                so.mode = SilhouetteMode::Centroid;
                t0 = clock::now();
                const ScoreTable proxy = compute_scores(ds.data, e.labels, so);
                t_proxy.push_back(seconds(t0));
                if (!a.skip_exact) {
                    so.mode = SilhouetteMode::Exact;
                    t0 = clock::now();
                    const ScoreTable exact = compute_scores(ds.data, e.labels, so);
                    t_exact.push_back(seconds(t0));
                    corr = pearson(exact.cake_hm, proxy.cake_hm);
                    mae = 0.0;
                    for (std::size_t i = 0; i < exact.size(); ++i) mae += std::abs(exact.cake_hm[i] - proxy.cake_hm[i]);
                    mae /= static_cast<double>(exact.size());
                }
            }
            const double exact_s = t_exact.empty() ? std::nan("") : median(t_exact);
            csv << n << ',' << R << ',' << format_real(median(t_ens)) << ',' << format_real(exact_s) << ','
                << format_real(median(t_proxy)) << ',' << format_real(a.skip_exact ? std::nan("") : corr) << ','
                << format_real(a.skip_exact ? std::nan("") : mae) << '\n';
            out << "n=" << n << " R=" << R << " proxy " << median(t_proxy) << "s";
            if (!a.skip_exact) out << " exact " << exact_s << "s pearson " << corr << " mae " << mae;
            out << '\n';
        }
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"CAKE: per-point confidence for clustering ensembles", "cake"};
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML config file mirroring the flags");

    Global g;
    app.add_option("--seed", g.seed, "master seed")->capture_default_str();
    app.add_option("--threads", g.threads, "worker cap (0 = all cores)")->capture_default_str();
    app.add_option("--out", g.out_dir, "output directory (default $CAKE_OUTPUT_DIR or ./out)");

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "write a synthetic dataset");
    generate->add_option("--family", gen.family, "s1..s7, moons, blobs")->capture_default_str();
    generate->add_option("--n", gen.n, "total points (rescales the family sizes)");
    generate->add_option("--noise", gen.noise, "noise points (s3, moons)")->each([&](const std::string&) {
        gen.noise_set = true;
    });
    generate->add_option("--blob-dims", gen.blob_dims)->capture_default_str();
    generate->add_option("--blob-clusters", gen.blob_clusters)->capture_default_str();
    generate->add_option("--blob-std", gen.blob_std)->capture_default_str();

    ScoreArgs sc;
    auto* score = app.add_subcommand("score", "build or import an ensemble and score every point");
    add_input(score, sc.input, true);
    add_ensemble(score, sc.ensemble);
    score->add_option("--labels", sc.labels, "import an n x R label CSV instead of clustering");
    score->add_option("--mode", sc.mode, "auto|exact|centroid|kernel")->capture_default_str();
    score->add_flag("--remap", sc.remap, "map mu - sigma affinely into [0, 1]");
    score->add_option("--knn", sc.knn, "self-tuning kernel neighbour")->capture_default_str();
    score->add_option("--gram-cache", sc.gram_cache, "binary Gram cache path");
    score->add_flag("--baselines", sc.baselines, "append consensus, entropy, bootstrap, GMM and fusion columns");
    score->add_option("--bootstrap-B", sc.bootstrap_B, "bootstrap draws (default R)");
    score->add_option("--bootstrap-fraction", sc.bootstrap_fraction)->capture_default_str();
    score->add_option("--format", sc.format, "csv|json|both")->capture_default_str();

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "run an evaluation protocol");
    add_input(eval, ev.input, true);
    add_ensemble(eval, ev.ensemble);
    eval->add_option("--protocol", ev.protocol,
                     "filter|coverage|auroc|aurc|spearman|convergence|misspec|error-discovery")
        ->required();
    eval->add_option("--scores", ev.scores, "score table CSV");
    eval->add_option("--labels", ev.labels, "ensemble label CSV (consensus reference)");
    eval->add_option("--criteria", ev.criteria, "filter criteria");
    eval->add_option("--keep", ev.keep)->capture_default_str();
    eval->add_option("--recluster-restarts", ev.recluster_restarts, "starts per filter reclustering")
        ->capture_default_str();
    eval->add_option("--trials", ev.trials)->capture_default_str();
    eval->add_option("--bins", ev.bins)->capture_default_str();
    eval->add_option("--grid-points", ev.grid_points)->capture_default_str();
    eval->add_option("--r-grid", ev.r_grid)->capture_default_str();
    eval->add_option("--B", ev.B, "sub-ensembles per R")->capture_default_str();
    eval->add_option("--pool", ev.pool, "draw sub-ensembles from one pool of this many runs (0 = fresh)");
    eval->add_option("--k-grid", ev.k_grid);
    eval->add_option("--mode", ev.mode, "auto|exact|centroid|kernel")->capture_default_str();

    BoundsArgs bo;
    auto* bounds = app.add_subcommand("bounds", "Monte-Carlo check of the stability concentration bounds");
    bounds->add_option("--kind", bo.kind, "all|misranking|false-positive")->capture_default_str();
    bounds->add_option("--R", bo.Rs)->capture_default_str();
    bounds->add_option("--gamma", bo.gammas)->capture_default_str();
    bounds->add_option("--tau", bo.taus)->capture_default_str();
    bounds->add_option("--k", bo.ks)->capture_default_str();
    bounds->add_option("--trials", bo.trials)->capture_default_str();

    BenchArgs be;
    auto* bench = app.add_subcommand("bench", "time ensemble construction and exact vs proxy scoring");
    bench->add_option("--sizes", be.sizes)->capture_default_str();
    bench->add_option("--Rs", be.Rs)->capture_default_str();
    bench->add_option("--family", be.family)->capture_default_str();
    bench->add_option("--algorithm", be.algorithm)->capture_default_str();
    bench->add_option("--k", be.k, "clusters (default: true k)");
    bench->add_option("--repeats", be.repeats)->capture_default_str();
    bench->add_flag("--skip-exact", be.skip_exact);

    std::vector<const char*> argv = {"cake"};
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "cake: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (generate->parsed()) return cmd_generate(gen, g, out);
        if (score->parsed()) return cmd_score(sc, g, out);
        if (eval->parsed()) return cmd_eval(ev, g, out);
        if (bounds->parsed()) return cmd_bounds(bo, g, out);
        if (bench->parsed()) return cmd_bench(be, g, out);
    } catch (const std::invalid_argument& e) {
        err << "cake: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "cake: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace cake::cli
