#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "psmdid/date.hpp"
#include "psmdid/panel.hpp"

namespace psmdid {

struct TreatmentAssignment {
    std::string policy;
    Date anchor_date;
    double threshold = 0.0;
    std::vector<std::string> treated;   // policy value > threshold, sorted
    std::vector<std::string> control;   // policy value <= threshold, sorted
    std::vector<std::string> excluded;  // ineligible, with no covariates or no policy value
};

// Raised when one of the two groups is empty.
class DegenerateSplit : public std::runtime_error {
public:
    DegenerateSplit(std::size_t n_control, std::size_t n_treated);
    std::size_t n_control;
    std::size_t n_treated;
};

// Splits countries by the policy value at the anchor. When `eligible` is
// given, only those countries are considered; the rest are listed as excluded.
TreatmentAssignment assign_treatment(const PanelDataset& ds, const CovariateTable& covs, const std::string& policy,
                                     Date anchor, double threshold,
                                     const std::vector<std::string>* eligible = nullptr);

struct LogisticOptions {
    double ridge = 1e-6;  // penalty on slope coefficients, never on the intercept
    int max_iterations = 100;
    double gradient_tolerance = 1e-8;
};

struct LogisticFit {
    Eigen::VectorXd coefficients;  // intercept first
    bool converged = false;
    bool separation = false;
    int iterations = 0;
    double gradient_max_norm = 0.0;
    double penalized_log_likelihood = 0.0;
};

// Penalized Bernoulli maximum likelihood by damped Newton steps. `x` holds
// the regressors without an intercept column; labels are 0/1.
LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& labels, const LogisticOptions& opts = {});

struct PropensityModel {
    double intercept = 0.0;
    std::array<double, MacroCovariates::kCount> coefficients{};  // per standardized covariate
    std::array<double, MacroCovariates::kCount> mean{};
    std::array<double, MacroCovariates::kCount> sd{};
    std::array<bool, MacroCovariates::kCount> used{};  // constant covariates are dropped
    bool converged = false;
    bool separation = false;
    int iterations = 0;
    double gradient_max_norm = 0.0;
};

struct LabeledCovariates {
    MacroCovariates covariates;
    int label = 0;
};

PropensityModel fit_propensity(std::span<const LabeledCovariates> data, const LogisticOptions& opts = {},
                               Diagnostics* diag = nullptr);

double predict_propensity(const PropensityModel& model, const MacroCovariates& cov);

struct MatchedPair {
    std::string control;
    std::string treated;
    double distance = 0.0;
};

struct MatchOptions {
    std::optional<double> caliper;  // on the logit scale
};

struct MatchResult {
    std::vector<MatchedPair> pairs;  // ordered by control code
    double total_distance = 0.0;
    std::vector<std::string> unmatched_treated;
    std::vector<std::string> unmatched_control;  // only when roles are swapped or a caliper drops pairs
    bool roles_swapped = false;  // more controls than treated: each treated got a distinct control
    std::vector<MatchedPair> caliper_dropped;
};

// Logit used for match distances; exact 0 or 1 is clamped to -/+36.7.
double clamped_logit(double p, bool* clamped = nullptr);

// Minimum total |logit difference| pairing without replacement.
MatchResult optimal_pair_match(const TreatmentAssignment& assignment, const std::map<std::string, double>& scores,
                               const MatchOptions& opts = {}, Diagnostics* diag = nullptr);

struct BalanceRow {
    std::string covariate;
    std::optional<double> smd_before;
    std::optional<double> smd_after;
};

struct BalanceReport {
    std::vector<BalanceRow> rows;
    std::size_t n_control_before = 0;
    std::size_t n_treated_before = 0;
    std::size_t n_control_after = 0;
    std::size_t n_treated_after = 0;
};

// Standardized mean difference (mean_T - mean_C) / sqrt((var_T + var_C) / 2),
// sample variances; empty when the pooled variance is zero or undefined.
std::optional<double> standardized_mean_difference(std::span<const double> treated, std::span<const double> control);

BalanceReport balance_report(const TreatmentAssignment& assignment, const CovariateTable& covs,
                             const MatchResult& result);

struct HistogramBin {
    std::string stage;  // "before" or "after"
    std::string group;  // "control" or "treated"
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
};

std::vector<HistogramBin> propensity_histogram(const TreatmentAssignment& assignment,
                                               const std::map<std::string, double>& scores,
                                               const MatchResult& result, std::size_t bins = 10);

void write_pairs_csv(const MatchResult& result, std::ostream& out);
MatchResult read_pairs_csv(std::istream& in);
void write_balance_csv(const BalanceReport& report, std::ostream& out);
void write_histogram_csv(const std::vector<HistogramBin>& bins, std::ostream& out);
void write_scores_csv(const TreatmentAssignment& assignment, const std::map<std::string, double>& scores,
                      std::ostream& out);

}  // namespace psmdid
