#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cake/align.hpp"
#include "cake/geometry.hpp"

namespace cake {

struct ScoreTable {
    std::vector<double> c;
    std::vector<double> s_tilde;
    std::vector<double> cake_pr;
    std::vector<double> cake_hm;
    /// Extra columns in insertion order (consensus_agree, entropy_hhat, ...).
    std::vector<std::pair<std::string, std::vector<double>>> baselines;
    std::string manifest_hash;
    SilhouetteMode mode = SilhouetteMode::Exact;
    bool remap = false;

    std::size_t size() const { return c.size(); }
    /// Adds or replaces a named column; length must match.
    void set_baseline(const std::string& name, std::vector<double> values);
    /// Core or baseline column by name; nullptr when absent.
    const std::vector<double>* column(std::string_view name) const;
};

/// Elementwise product. Inputs must be equal length and within [0, 1].
std::vector<double> cake_pr(std::span<const double> c, std::span<const double> s_tilde);
/// Elementwise 2cs/(c+s), with 0 when c + s = 0.
std::vector<double> cake_hm(std::span<const double> c, std::span<const double> s_tilde);

/// Exact up to n = 5000, centroid proxy above.
SilhouetteMode default_silhouette_mode(std::size_t n);

struct ScoreOptions {
    std::optional<SilhouetteMode> mode;
    bool remap = false;
    const KernelGram* gram = nullptr;  // required for kernel mode
    unsigned threads = 0;
};

struct ScoreDetail {
    ScoreTable table;
    SilhouetteTable silhouettes;
    StabilityVector stability;
};

ScoreDetail compute_scores_detailed(const DataMatrix& data, const LabelMatrix& ensemble,
                                    const ScoreOptions& options = {});
ScoreTable compute_scores(const DataMatrix& data, const LabelMatrix& ensemble, const ScoreOptions& options = {});

/// Header index,c,s_tilde,cake_pr,cake_hm[,baselines...]; 17 significant digits.
void write_scores_csv(std::ostream& out, const ScoreTable& table);
void write_scores_csv(const std::filesystem::path& path, const ScoreTable& table);
ScoreTable read_scores_csv(std::istream& in);
ScoreTable read_scores_csv(const std::filesystem::path& path);

nlohmann::json to_json(const ScoreTable& table);

}  // namespace cake
