#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "psmdid/changepoint.hpp"
#include "psmdid/config.hpp"
#include "psmdid/did.hpp"
#include "psmdid/panel.hpp"
#include "psmdid/psm.hpp"

namespace psmdid {

struct PolicySpec {
    std::string code;
    std::optional<double> threshold;  // default: floor of the median at the earliest anchor
};

struct AnchorDetection {
    DetectorConfig detector;
    PromotionOptions promotion;
    std::size_t rising_window = 14;
    std::string series_variable = "R";
    std::optional<std::string> country;  // per-country stream instead of the cross-country mean
};

struct EvaluationConfig {
    std::filesystem::path panel_path;
    std::filesystem::path covariates_path;
    std::vector<std::string> countries;  // empty: every country in the panel
    std::vector<PolicySpec> policies;
    std::vector<OutbreakPoint> anchors;  // configured anchors; empty means detect
    AnchorDetection detection;
    std::size_t min_group_size = 3;
    int max_gap = 3;
    std::string outcome = "NCSM";
    LogisticOptions logistic;
    MatchOptions matching;
    OlsOptions inference;
    unsigned threads = 0;  // 0: hardware concurrency

    // Reads keys: panel, covariates, countries, policies (CODE[:threshold], ...),
    // anchors (dates or "detect"), min_group_size, max_gap, outcome, ridge,
    // caliper, se (classical|cluster), threads, and detector.* / promote.* keys.
    static EvaluationConfig from_config(const KeyValueConfig& kv);

    // Throws InputError when a policy code is absent from the panel or the
    // group-size floor is zero.
    void validate(const PanelDataset& panel) const;
};

enum class CellStatus { fitted, skipped, failed };

struct GridCell {
    std::string policy;
    Date anchor;
    double threshold = 0.0;
    CellStatus status = CellStatus::failed;
    std::string reason;  // why a cell is "/" or failed
    std::size_t n_control = 0;
    std::size_t n_treated = 0;
    std::size_t n_pairs = 0;
    std::optional<DidFit> fit;
    double orthogonality = 0.0;
    // retained for figure-data output
    std::optional<TreatmentAssignment> assignment;
    std::optional<MatchResult> match;
    std::map<std::string, double> scores;
};

struct LoadedInputs {
    PanelDataset panel;
    CovariateTable covariates;
    Diagnostics diagnostics;
};

// Loads, restricts to configured countries and forward-fills policy gaps.
LoadedInputs load_inputs(const EvaluationConfig& cfg);

// Configured anchors, or detected ones when none are configured.
std::vector<OutbreakPoint> resolve_anchors(const EvaluationConfig& cfg, const PanelDataset& panel,
                                           Diagnostics* diag = nullptr);

// Threshold per policy, resolved once and held fixed across anchors.
double resolve_threshold(const PolicySpec& policy, const PanelDataset& panel, Date reference_anchor);

// Evaluates every (policy, anchor) cell in policy-major order. Cell failures
// are recorded in the cell; the grid always has |policies| x |anchors| cells.
std::vector<GridCell> run_grid(const EvaluationConfig& cfg, const PanelDataset& panel, const CovariateTable& covs,
                               const std::vector<OutbreakPoint>& anchors);

// A single cell; used by run_grid.
GridCell evaluate_cell(const EvaluationConfig& cfg, const PanelDataset& panel, const CovariateTable& covs,
                       const std::string& policy, double threshold, Date anchor);

struct PolicyRank {
    std::string policy;
    double mean_cr = 0.0;
    std::size_t cells = 0;
};

// Descending mean containment ratio over fitted cells with a defined ratio;
// ties broken alphabetically. Policies with no such cell are left out.
std::vector<PolicyRank> rank_policies(const std::vector<GridCell>& cells);

struct CellText {
    std::string estimate;  // "-3.4422**" or "/"
    std::string se;        // "(1.1956)"
    std::string cr;        // "52.31%"
};

CellText format_cell(const GridCell& cell);

// Three-line cells, policies as rows and anchors as columns.
std::string render_table(const std::vector<GridCell>& cells);
void write_grid_csv(const std::vector<GridCell>& cells, std::ostream& out);
void write_grid_json(const std::vector<GridCell>& cells, const std::vector<PolicyRank>& ranking,
                     const std::vector<OutbreakPoint>& anchors, std::ostream& out);

}  // namespace psmdid
