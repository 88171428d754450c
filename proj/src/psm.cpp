#include "psmdid/psm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "psmdid/assignment.hpp"
#include "psmdid/csv.hpp"
#include "psmdid/stats.hpp"

namespace psmdid {

DegenerateSplit::DegenerateSplit(std::size_t n_control_, std::size_t n_treated_)
    : std::runtime_error("degenerate split: " + std::to_string(n_control_) + " control, " +
                         std::to_string(n_treated_) + " treated"),
      n_control(n_control_),
      n_treated(n_treated_) {}

TreatmentAssignment assign_treatment(const PanelDataset& ds, const CovariateTable& covs, const std::string& policy,
                                     Date anchor, double threshold, const std::vector<std::string>* eligible) {
    const std::size_t v = ds.require_variable(policy);
    const auto d = ds.date_index(anchor);
    if (!d) throw InputError("anchor " + anchor.to_string() + " is outside the panel date range");

    std::set<std::string> allowed;
    if (eligible) allowed.insert(eligible->begin(), eligible->end());

    TreatmentAssignment a;
    a.policy = policy;
    a.anchor_date = anchor;
    a.threshold = threshold;
    for (std::size_t c = 0; c < ds.countries().size(); ++c) {
        const auto& code = ds.countries()[c];
        const auto value = ds.value(c, *d, v);
        if ((eligible && !allowed.count(code)) || !covs.count(code) || !value) {
            a.excluded.push_back(code);
            continue;
        }
        (*value > threshold ? a.treated : a.control).push_back(code);
    }
    std::sort(a.treated.begin(), a.treated.end());
    std::sort(a.control.begin(), a.control.end());
    if (a.treated.empty() || a.control.empty()) throw DegenerateSplit(a.control.size(), a.treated.size());
    return a;
}

namespace {

double penalized_log_likelihood(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                                double ridge) {
    const Eigen::VectorXd eta = design * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        // log(1 + exp(eta)) without overflow
        const double softplus = eta[i] > 0 ? eta[i] + std::log1p(std::exp(-eta[i])) : std::log1p(std::exp(eta[i]));
        ll += y[i] * eta[i] - softplus;
    }
    return ll - 0.5 * ridge * beta.tail(beta.size() - 1).squaredNorm();
}

}  // namespace

LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& labels, const LogisticOptions& opts) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols() + 1;
    if (labels.size() != n) throw std::invalid_argument("fit_logistic: label count mismatch");
    for (Eigen::Index i = 0; i < n; ++i)
        if (labels[i] != 0.0 && labels[i] != 1.0) throw std::invalid_argument("fit_logistic: labels must be 0/1");

    Eigen::MatrixXd design(n, p);
    design.col(0).setOnes();
    design.rightCols(p - 1) = x;

    Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p, opts.ridge);
    penalty[0] = 0.0;

    LogisticFit fit;
    fit.coefficients = Eigen::VectorXd::Zero(p);
    // start the intercept at the observed log-odds
    const double n1 = labels.sum();
    if (n1 > 0 && n1 < static_cast<double>(n)) fit.coefficients[0] = std::log(n1 / (static_cast<double>(n) - n1));

    Eigen::VectorXd& beta = fit.coefficients;
    double objective = penalized_log_likelihood(design, labels, beta, opts.ridge);
    constexpr int kMaxPolish = 8;
    int polish = 0;
    for (int iter = 0;; ++iter) {
        Eigen::VectorXd prob(n), weight(n);
        const Eigen::VectorXd eta = design * beta;
        for (Eigen::Index i = 0; i < n; ++i) {
            prob[i] = stats::logistic(eta[i]);
            weight[i] = prob[i] * (1.0 - prob[i]);
        }
        const Eigen::VectorXd gradient = design.transpose() * (labels - prob) - penalty.cwiseProduct(beta);
        fit.gradient_max_norm = gradient.cwiseAbs().maxCoeff();
        fit.iterations = iter;
        // Near separation the curvature along some directions is only the ridge,
        // so a small gradient can still leave the coefficients well off the
        // optimum. Past the tolerance keep taking Newton steps until they vanish.
        const bool small_gradient = fit.gradient_max_norm < opts.gradient_tolerance;
        if (small_gradient) fit.converged = true;
        if (iter >= opts.max_iterations || (small_gradient && polish >= kMaxPolish)) break;
        if (small_gradient) ++polish;

        Eigen::MatrixXd hessian = design.transpose() * weight.asDiagonal() * design;
        hessian.diagonal() += penalty;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
        Eigen::VectorXd step = ldlt.solve(gradient);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) {
            hessian.diagonal().array() += 1e-10 * (1.0 + hessian.diagonal().cwiseAbs().maxCoeff());
            step = hessian.ldlt().solve(gradient);
        }

        // step halving until the penalized likelihood stops decreasing
        double scale = 1.0;
        Eigen::VectorXd candidate = beta + step;
        double cand_obj = penalized_log_likelihood(design, labels, candidate, opts.ridge);
        for (int h = 0; h < 40 && !(cand_obj >= objective - 1e-12 * std::fabs(objective)); ++h) {
            scale *= 0.5;
            candidate = beta + scale * step;
            cand_obj = penalized_log_likelihood(design, labels, candidate, opts.ridge);
        }
        const double moved = (candidate - beta).cwiseAbs().maxCoeff();
        beta = candidate;
        objective = cand_obj;
        if (small_gradient && moved <= 1e-13 * std::max(1.0, beta.cwiseAbs().maxCoeff())) break;
    }
    fit.penalized_log_likelihood = objective;

    // complete separation: some linear score orders every treated unit above every control
    const Eigen::VectorXd eta = design * beta;
    double max0 = -std::numeric_limits<double>::infinity(), min1 = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (labels[i] == 1.0)
            min1 = std::min(min1, eta[i]);
        else
            max0 = std::max(max0, eta[i]);
    }
    if (p > 1 && max0 < min1) {
        fit.separation = true;
        fit.converged = false;
    }
    return fit;
}

PropensityModel fit_propensity(std::span<const LabeledCovariates> data, const LogisticOptions& opts,
                               Diagnostics* diag) {
    constexpr std::size_t K = MacroCovariates::kCount;
    std::size_t n1 = 0;
    for (const auto& d : data) {
        if (d.label != 0 && d.label != 1) throw std::invalid_argument("fit_propensity: labels must be 0/1");
        n1 += static_cast<std::size_t>(d.label);
    }
    const std::size_t n0 = data.size() - n1;
    if (n1 < 2 || n0 < 2) throw std::invalid_argument("fit_propensity: need at least two observations per label");

    PropensityModel model;
    const double n = static_cast<double>(data.size());
    for (std::size_t k = 0; k < K; ++k) {
        double sum = 0.0;
        for (const auto& d : data) sum += d.covariates.to_array()[k];
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& d : data) {
            const double dx = d.covariates.to_array()[k] - mean;
            ss += dx * dx;
        }
        model.mean[k] = mean;
        model.sd[k] = std::sqrt(ss / (n - 1.0));
        model.used[k] = model.sd[k] > 1e-12 * std::max(1.0, std::fabs(mean));
        if (!model.used[k]) {
            warn(diag, std::string("covariate ") + MacroCovariates::names()[k] + " is constant; dropped");
            model.sd[k] = 1.0;
        }
    }

    std::vector<std::size_t> cols;
    for (std::size_t k = 0; k < K; ++k)
        if (model.used[k]) cols.push_back(k);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(cols.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto values = data[i].covariates.to_array();
        for (std::size_t j = 0; j < cols.size(); ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (values[cols[j]] - model.mean[cols[j]]) / model.sd[cols[j]];
        y[static_cast<Eigen::Index>(i)] = data[i].label;
    }

    const LogisticFit fit = fit_logistic(x, y, opts);
    model.intercept = fit.coefficients[0];
    for (std::size_t j = 0; j < cols.size(); ++j)
        model.coefficients[cols[j]] = fit.coefficients[static_cast<Eigen::Index>(j) + 1];
    model.converged = fit.converged;
    model.separation = fit.separation;
    model.iterations = fit.iterations;
    model.gradient_max_norm = fit.gradient_max_norm;
    if (fit.separation) warn(diag, "propensity model: groups are perfectly separated; using penalized estimates");
    else if (!fit.converged) warn(diag, "propensity model did not converge");
    return model;
}

double predict_propensity(const PropensityModel& model, const MacroCovariates& cov) {
    const auto values = cov.to_array();
    double eta = model.intercept;
    for (std::size_t k = 0; k < MacroCovariates::kCount; ++k)
        if (model.used[k]) eta += model.coefficients[k] * (values[k] - model.mean[k]) / model.sd[k];
    return stats::logistic(eta);
}

double clamped_logit(double p, bool* clamped) {
    constexpr double kLimit = 36.7;
    if (clamped) *clamped = false;
    if (p <= 0.0 || p >= 1.0) {
        if (clamped) *clamped = true;
        return p <= 0.0 ? -kLimit : kLimit;
    }
    return std::clamp(stats::logit(p), -kLimit, kLimit);
}

MatchResult optimal_pair_match(const TreatmentAssignment& assignment, const std::map<std::string, double>& scores,
                               const MatchOptions& opts, Diagnostics* diag) {
    auto logit_of = [&](const std::string& code) {
        auto it = scores.find(code);
        if (it == scores.end()) throw std::invalid_argument("optimal_pair_match: no score for " + code);
        bool clamped = false;
        const double l = clamped_logit(it->second, &clamped);
        if (clamped) warn(diag, "propensity score of " + code + " is exactly 0 or 1; logit clamped");
        return l;
    };

    std::vector<std::string> control = assignment.control;
    std::vector<std::string> treated = assignment.treated;
    std::sort(control.begin(), control.end());
    std::sort(treated.begin(), treated.end());

    MatchResult result;
    result.roles_swapped = control.size() > treated.size();
    if (result.roles_swapped)
        warn(diag, "more control than treated units; each treated unit is matched to a distinct control");
    const auto& rows = result.roles_swapped ? treated : control;
    const auto& cols = result.roles_swapped ? control : treated;

    std::vector<double> row_logit, col_logit;
    for (const auto& c : rows) row_logit.push_back(logit_of(c));
    for (const auto& c : cols) col_logit.push_back(logit_of(c));

    CostMatrix cost{rows.size(), cols.size(), {}};
    cost.cost.reserve(rows.size() * cols.size());
    for (double r : row_logit)
        for (double c : col_logit) cost.cost.push_back(std::fabs(r - c));
    const auto chosen = solve_assignment_canonical(cost);

    std::vector<bool> col_used(cols.size(), false);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        col_used[chosen[i]] = true;
        MatchedPair pair;
        pair.control = result.roles_swapped ? cols[chosen[i]] : rows[i];
        pair.treated = result.roles_swapped ? rows[i] : cols[chosen[i]];
        pair.distance = cost.at(i, chosen[i]);
        if (opts.caliper && pair.distance > *opts.caliper) {
            result.caliper_dropped.push_back(pair);
            continue;
        }
        result.pairs.push_back(pair);
    }
    std::sort(result.pairs.begin(), result.pairs.end(),
              [](const MatchedPair& a, const MatchedPair& b) { return a.control < b.control; });
    for (const auto& p : result.pairs) result.total_distance += p.distance;

    std::set<std::string> matched_c, matched_t;
    for (const auto& p : result.pairs) {
        matched_c.insert(p.control);
        matched_t.insert(p.treated);
    }
    for (const auto& t : treated)
        if (!matched_t.count(t)) result.unmatched_treated.push_back(t);
    for (const auto& c : control)
        if (!matched_c.count(c)) result.unmatched_control.push_back(c);
    if (!result.caliper_dropped.empty())
        warn(diag, std::to_string(result.caliper_dropped.size()) + " pairs exceed the caliper and were dropped");
    return result;
}

std::optional<double> standardized_mean_difference(std::span<const double> treated, std::span<const double> control) {
    if (treated.size() < 2 || control.size() < 2) return std::nullopt;
    auto moments = [](std::span<const double> v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        return std::pair{mean, ss / static_cast<double>(v.size() - 1)};
    };
    const auto [mt, vt] = moments(treated);
    const auto [mc, vc] = moments(control);
    const double pooled = std::sqrt((vt + vc) / 2.0);
    if (!(pooled > 0)) return std::nullopt;
    return (mt - mc) / pooled;
}

BalanceReport balance_report(const TreatmentAssignment& assignment, const CovariateTable& covs,
                             const MatchResult& result) {
    if (result.pairs.empty()) throw std::invalid_argument("balance_report: no matched pairs");
    auto column = [&](const std::vector<std::string>& codes, std::size_t k) {
        std::vector<double> out;
        for (const auto& c : codes) {
            auto it = covs.find(c);
            if (it == covs.end()) throw std::invalid_argument("balance_report: no covariates for " + c);
            out.push_back(it->second.to_array()[k]);
        }
        return out;
    };
    std::vector<std::string> matched_c, matched_t;
    for (const auto& p : result.pairs) {
        matched_c.push_back(p.control);
        matched_t.push_back(p.treated);
    }

    BalanceReport report;
    report.n_control_before = assignment.control.size();
    report.n_treated_before = assignment.treated.size();
    report.n_control_after = matched_c.size();
    report.n_treated_after = matched_t.size();
    for (std::size_t k = 0; k < MacroCovariates::kCount; ++k) {
        BalanceRow row;
        row.covariate = MacroCovariates::names()[k];
        row.smd_before = standardized_mean_difference(column(assignment.treated, k), column(assignment.control, k));
        row.smd_after = standardized_mean_difference(column(matched_t, k), column(matched_c, k));
        report.rows.push_back(row);
    }
    return report;
}

std::vector<HistogramBin> propensity_histogram(const TreatmentAssignment& assignment,
                                               const std::map<std::string, double>& scores,
                                               const MatchResult& result, std::size_t bins) {
    if (bins == 0) throw std::invalid_argument("propensity_histogram: bins must be positive");
    std::vector<std::string> matched_c, matched_t;
    for (const auto& p : result.pairs) {
        matched_c.push_back(p.control);
        matched_t.push_back(p.treated);
    }
    std::vector<HistogramBin> out;
    auto add = [&](const char* stage, const char* group, const std::vector<std::string>& codes) {
        std::vector<std::size_t> counts(bins, 0);
        for (const auto& c : codes) {
            const double s = scores.at(c);
            auto b = static_cast<std::size_t>(s * static_cast<double>(bins));
            counts[std::min(b, bins - 1)]++;
        }
        for (std::size_t b = 0; b < bins; ++b)
            out.push_back({stage, group, static_cast<double>(b) / static_cast<double>(bins),
                           static_cast<double>(b + 1) / static_cast<double>(bins), counts[b]});
    };
    add("before", "control", assignment.control);
    add("before", "treated", assignment.treated);
    add("after", "control", matched_c);
    add("after", "treated", matched_t);
    return out;
}

void write_pairs_csv(const MatchResult& result, std::ostream& out) {
    out << "control,treated,distance\n";
    for (const auto& p : result.pairs)
        out << csv::escape(p.control) << ',' << csv::escape(p.treated) << ',' << csv::format_double(p.distance)
            << '\n';
}

MatchResult read_pairs_csv(std::istream& in) {
    csv::Reader reader(in);
    std::vector<std::string> row;
    if (!reader.next(row) || row.size() < 3 || csv::trim(row[0]) != "control" || csv::trim(row[1]) != "treated")
        throw InputError("pairs file: expected header control,treated,distance");
    MatchResult result;
    std::set<std::string> seen;
    while (reader.next(row)) {
        const std::string where = "pairs file line " + std::to_string(reader.line());
        if (row.size() < 3) throw InputError(where + ": expected 3 fields");
        MatchedPair p{csv::trim(row[0]), csv::trim(row[1]), 0.0};
        try {
            p.distance = csv::parse_double(row[2]);
        } catch (const std::invalid_argument& e) {
            throw InputError(where + ": " + e.what());
        }
        if (!seen.insert("c:" + p.control).second || !seen.insert("t:" + p.treated).second)
            throw InputError(where + ": country appears in more than one pair");
        result.total_distance += p.distance;
        result.pairs.push_back(std::move(p));
    }
    if (result.pairs.empty()) throw InputError("pairs file: no pairs");
    return result;
}

void write_balance_csv(const BalanceReport& report, std::ostream& out) {
    auto text = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string("NA"); };
    out << "covariate,smd_before,smd_after,n_control_before,n_treated_before,n_control_after,n_treated_after\n";
    for (const auto& r : report.rows)
        out << r.covariate << ',' << text(r.smd_before) << ',' << text(r.smd_after) << ','
            << report.n_control_before << ',' << report.n_treated_before << ',' << report.n_control_after << ','
            << report.n_treated_after << '\n';
}

void write_histogram_csv(const std::vector<HistogramBin>& bins, std::ostream& out) {
    out << "stage,group,bin_lower,bin_upper,count\n";
    for (const auto& b : bins)
        out << b.stage << ',' << b.group << ',' << csv::format_double(b.lower) << ',' << csv::format_double(b.upper)
            << ',' << b.count << '\n';
}

void write_scores_csv(const TreatmentAssignment& assignment, const std::map<std::string, double>& scores,
                      std::ostream& out) {
    out << "country,group,propensity\n";
    for (const auto& c : assignment.control) out << csv::escape(c) << ",control," << csv::format_double(scores.at(c)) << '\n';
    for (const auto& t : assignment.treated) out << csv::escape(t) << ",treated," << csv::format_double(scores.at(t)) << '\n';
}

}  // namespace psmdid
