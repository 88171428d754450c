#include "psmdid/did.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "json.hpp"
#include "psmdid/csv.hpp"
#include "psmdid/stats.hpp"

namespace psmdid {

const std::array<const char*, kDidParams>& did_coefficient_names() {
    static const std::array<const char*, kDidParams> names = {"intercept", "time", "treated", "post_slope",
                                                              "post_slope_treated"};
    return names;
}

std::array<double, kDidParams> DidObservation::regressors() const {
    const double kink = static_cast<double>(t - kDidBreak) * post;
    return {1.0, static_cast<double>(t), static_cast<double>(treated), kink, kink * treated};
}

Eigen::MatrixXd DidDesign::matrix() const {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(observations.size()), static_cast<Eigen::Index>(kDidParams));
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto r = observations[i].regressors();
        for (std::size_t j = 0; j < kDidParams; ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[j];
    }
    return x;
}

Eigen::VectorXd DidDesign::response() const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(observations.size()));
    for (std::size_t i = 0; i < observations.size(); ++i) y[static_cast<Eigen::Index>(i)] = observations[i].y;
    return y;
}

namespace {

void append_unit(DidDesign& design, const Window& window, const std::string& country, int treated) {
    const auto* series = window.find(country);
    if (!series) throw InputError("matched country " + country + " has no complete series in the window");
    for (int t = 1; t <= Window::kLength; ++t) {
        DidObservation obs;
        obs.country = country;
        obs.t = t;
        obs.y = (*series)[static_cast<std::size_t>(t - 1)];
        obs.treated = treated;
        obs.post = t > kDidBreak ? 1 : 0;
        design.observations.push_back(std::move(obs));
    }
}

}  // namespace

DidDesign build_design(const Window& window, const MatchResult& matches) {
    DidDesign design;
    for (const auto& pair : matches.pairs) {
        append_unit(design, window, pair.control, 0);
        append_unit(design, window, pair.treated, 1);
    }
    return design;
}

DidDesign build_design(const Window& window, const std::vector<std::string>& control,
                       const std::vector<std::string>& treated) {
    DidDesign design;
    for (const auto& c : control) append_unit(design, window, c, 0);
    for (const auto& t : treated) append_unit(design, window, t, 1);
    return design;
}

RankDeficientDesign::RankDeficientDesign(std::string column_name)
    : std::runtime_error("design matrix is rank deficient: column '" + column_name +
                         "' is collinear with earlier columns"),
      column(std::move(column_name)) {}

std::string significance_stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

std::optional<double> containment_ratio(double b1, double b3, double b4) {
    const double baseline = b1 + b3;
    if (!(baseline > 0)) return std::nullopt;
    return std::max(-b4, 0.0) / baseline * 100.0;
}

std::optional<double> containment_ratio(const DidFit& fit) {
    return containment_ratio(fit.beta[1], fit.beta[3], fit.beta[4]);
}

DidFit fit_ols(const DidDesign& design, const OlsOptions& opts) {
    const Eigen::MatrixXd x = design.matrix();
    const Eigen::VectorXd y = design.response();
    const Eigen::Index n = x.rows();
    const auto p = static_cast<Eigen::Index>(kDidParams);
    if (n <= p) throw std::invalid_argument("fit_ols: need more than 5 observations");

    // name the first column that adds no rank
    {
        const double tol = 1e-10;
        Eigen::Index rank_before = 0;
        for (Eigen::Index j = 1; j <= p; ++j) {
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.leftCols(j));
            qr.setThreshold(tol);
            const Eigen::Index r = qr.rank();
            if (r <= rank_before) throw RankDeficientDesign(did_coefficient_names()[static_cast<std::size_t>(j - 1)]);
            rank_before = r;
        }
    }

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    const Eigen::VectorXd beta = qr.solve(y);
    const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd xtx_inv = r_inv * r_inv.transpose();

    DidFit fit;
    fit.n = static_cast<std::size_t>(n);
    fit.se_type = opts.se_type;
    fit.residuals = y - x * beta;
    fit.rss = fit.residuals.squaredNorm();
    fit.sigma2 = fit.rss / static_cast<double>(n - p);

    if (opts.se_type == StandardErrorType::classical) {
        fit.covariance = fit.sigma2 * xtx_inv;
        fit.df = static_cast<double>(n - p);
    } else {
        std::map<std::string, Eigen::VectorXd> scores;
        for (Eigen::Index i = 0; i < n; ++i) {
            auto& s = scores[design.observations[static_cast<std::size_t>(i)].country];
            if (s.size() == 0) s = Eigen::VectorXd::Zero(p);
            s += x.row(i).transpose() * fit.residuals[i];
        }
        const double g = static_cast<double>(scores.size());
        if (g < 2) throw std::invalid_argument("fit_ols: clustered errors need at least two countries");
        Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
        for (const auto& [country, s] : scores) meat += s * s.transpose();
        const double adjust = g / (g - 1.0) * static_cast<double>(n - 1) / static_cast<double>(n - p);
        fit.covariance = adjust * xtx_inv * meat * xtx_inv;
        fit.df = g - 1.0;
    }

    for (std::size_t j = 0; j < kDidParams; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        fit.beta[j] = beta[jj];
        fit.se[j] = std::sqrt(fit.covariance(jj, jj));
        fit.t_stats[j] = fit.se[j] > 0 ? fit.beta[j] / fit.se[j]
                                       : (fit.beta[j] == 0 ? 0.0 : std::copysign(INFINITY, fit.beta[j]));
        fit.p_values[j] = stats::student_t_two_sided_p(fit.t_stats[j], fit.df);
        fit.stars[j] = significance_stars(fit.p_values[j]);
    }
    fit.cr = containment_ratio(fit);
    return fit;
}

FittedLines fitted_lines(const DidFit& fit) {
    const auto& b = fit.beta;
    FittedLines lines;
    for (int t = 1; t <= Window::kLength; ++t) {
        const double kink = t > kDidBreak ? static_cast<double>(t - kDidBreak) : 0.0;
        const auto i = static_cast<std::size_t>(t - 1);
        lines.control[i] = b[0] + b[1] * t + b[3] * kink;
        lines.counterfactual[i] = lines.control[i] + b[2];
        lines.treatment[i] = lines.counterfactual[i] + b[4] * kink;
    }
    return lines;
}

double residual_orthogonality(const DidDesign& design, const DidFit& fit) {
    const Eigen::MatrixXd x = design.matrix();
    const double scale = std::max(1.0, (x.transpose() * design.response()).cwiseAbs().maxCoeff());
    return (x.transpose() * fit.residuals).cwiseAbs().maxCoeff() / scale;
}

void write_fit_json(const DidFit& fit, std::ostream& out) {
    nlohmann::ordered_json j;
    j["coefficients"] = std::vector<std::string>(did_coefficient_names().begin(), did_coefficient_names().end());
    j["beta"] = fit.beta;
    j["se"] = fit.se;
    j["t"] = fit.t_stats;
    j["p"] = fit.p_values;
    j["stars"] = fit.stars;
    j["cr"] = fit.cr ? nlohmann::ordered_json(*fit.cr) : nlohmann::ordered_json(nullptr);
    j["n"] = fit.n;
    j["df"] = fit.df;
    j["sigma2"] = fit.sigma2;
    j["se_type"] = fit.se_type == StandardErrorType::classical ? "classical" : "cluster_country";
    out << j.dump(2) << '\n';
}

void write_fitted_lines_csv(const FittedLines& lines, std::ostream& out) {
    out << "t,control,treatment,counterfactual_treatment\n";
    for (std::size_t i = 0; i < lines.control.size(); ++i)
        out << (i + 1) << ',' << csv::format_double(lines.control[i]) << ',' << csv::format_double(lines.treatment[i])
            << ',' << csv::format_double(lines.counterfactual[i]) << '\n';
}

}  // namespace psmdid
