#include "cake/score.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace cake {

void ScoreTable::set_baseline(const std::string& name, std::vector<double> values) {
    if (values.size() != size()) {
        throw std::invalid_argument("score table: column '" + name + "' has " + std::to_string(values.size()) +
                                    " rows, expected " + std::to_string(size()));
    }
    for (auto& [key, col] : baselines) {
        if (key == name) {
            col = std::move(values);
            return;
        }
    }
    baselines.emplace_back(name, std::move(values));
}

const std::vector<double>* ScoreTable::column(std::string_view name) const {
    if (name == "c") return &c;
    if (name == "s_tilde") return &s_tilde;
    if (name == "cake_pr") return &cake_pr;
    if (name == "cake_hm") return &cake_hm;
    for (const auto& [key, col] : baselines) {
        if (key == name) return &col;
    }
    return nullptr;
}

namespace {

void check_inputs(std::span<const double> c, std::span<const double> s) {
    if (c.size() != s.size()) {
        throw std::invalid_argument("cake: length mismatch (" + std::to_string(c.size()) + " vs " +
                                    std::to_string(s.size()) + ")");
    }
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!(c[i] >= 0.0 && c[i] <= 1.0) || !(s[i] >= 0.0 && s[i] <= 1.0)) {
            throw std::invalid_argument("cake: input outside [0, 1] at point " + std::to_string(i));
        }
    }
}

}  // namespace

std::vector<double> cake_pr(std::span<const double> c, std::span<const double> s_tilde) {
    check_inputs(c, s_tilde);
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i] * s_tilde[i];
    return out;
}

std::vector<double> cake_hm(std::span<const double> c, std::span<const double> s_tilde) {
    check_inputs(c, s_tilde);
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double sum = c[i] + s_tilde[i];
        out[i] = sum > 0.0 ? 2.0 * c[i] * s_tilde[i] / sum : 0.0;
    }
    return out;
}

SilhouetteMode default_silhouette_mode(std::size_t n) {
    return n <= 5000 ? SilhouetteMode::Exact : SilhouetteMode::Centroid;
}

ScoreDetail compute_scores_detailed(const DataMatrix& data, const LabelMatrix& ensemble,
                                    const ScoreOptions& options) {
    if (ensemble.n() != data.rows()) {
        throw std::invalid_argument("score: ensemble has " + std::to_string(ensemble.n()) + " points, data has " +
                                    std::to_string(data.rows()));
    }
    const SilhouetteMode mode = options.mode.value_or(default_silhouette_mode(data.rows()));
    DataMatrix s;
    switch (mode) {
        case SilhouetteMode::Exact: s = silhouette_exact_ensemble(data, ensemble, options.threads); break;
        case SilhouetteMode::Centroid: s = silhouette_centroid_ensemble(data, ensemble, options.threads); break;
        case SilhouetteMode::Kernel:
            if (options.gram == nullptr) {
                throw std::invalid_argument("score: kernel mode needs a Gram matrix");
            }
            s = silhouette_kernel_ensemble(*options.gram, ensemble, options.threads);
            break;
    }
    ScoreDetail out;
    out.silhouettes = aggregate(s, options.remap, mode);
    out.stability = stability(ensemble, options.threads);
    auto& t = out.table;
    t.c = out.stability.c;
    t.s_tilde = out.silhouettes.s_tilde;
    t.cake_pr = cake_pr(t.c, t.s_tilde);
    t.cake_hm = cake_hm(t.c, t.s_tilde);
    t.manifest_hash = ensemble.hash();
    t.mode = mode;
    t.remap = options.remap;
    return out;
}

ScoreTable compute_scores(const DataMatrix& data, const LabelMatrix& ensemble, const ScoreOptions& options) {
    return compute_scores_detailed(data, ensemble, options).table;
}

void write_scores_csv(std::ostream& out, const ScoreTable& table) {
    out << "index,c,s_tilde,cake_pr,cake_hm";
    for (const auto& [name, col] : table.baselines) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < table.size(); ++i) {
        out << i << ',' << format_real(table.c[i]) << ',' << format_real(table.s_tilde[i]) << ','
            << format_real(table.cake_pr[i]) << ',' << format_real(table.cake_hm[i]);
        for (const auto& [name, col] : table.baselines) out << ',' << format_real(col[i]);
        out << '\n';
    }
}

void write_scores_csv(const std::filesystem::path& path, const ScoreTable& table) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("scores: cannot write '" + path.string() + "'");
    }
    write_scores_csv(out, table);
}

ScoreTable read_scores_csv(std::istream& in) {
    const CsvData csv = parse_csv(in, true);
    const auto& h = csv.header;
    if (h.size() < 5 || h[0] != "index" || h[1] != "c" || h[2] != "s_tilde" || h[3] != "cake_pr" ||
        h[4] != "cake_hm") {
        throw ParseError("scores: header must start with index,c,s_tilde,cake_pr,cake_hm", 1, 0);
    }
    ScoreTable t;
    const std::size_t n = csv.data.rows();
    auto col = [&](std::size_t j) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = csv.data(i, j);
        return v;
    };
    t.c = col(1);
    t.s_tilde = col(2);
    t.cake_pr = col(3);
    t.cake_hm = col(4);
    for (std::size_t j = 5; j < h.size(); ++j) t.baselines.emplace_back(h[j], col(j));
    return t;
}

ScoreTable read_scores_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("scores: cannot open '" + path.string() + "'");
    }
    return read_scores_csv(in);
}

nlohmann::json to_json(const ScoreTable& table) {
    nlohmann::json columns = {
        {"c", table.c}, {"s_tilde", table.s_tilde}, {"cake_pr", table.cake_pr}, {"cake_hm", table.cake_hm}};
    for (const auto& [name, col] : table.baselines) columns[name] = col;
    return {{"n", table.size()},
            {"manifest_hash", table.manifest_hash},
            {"silhouette_mode", to_string(table.mode)},
            {"remap", table.remap},
            {"columns", columns}};
}

}  // namespace cake
