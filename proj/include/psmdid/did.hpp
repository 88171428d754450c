#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "psmdid/panel.hpp"
#include "psmdid/psm.hpp"

namespace psmdid {

// Piecewise-linear DID model
//   Y = b0 + b1*t + b2*P + b3*(t - t0)*D + b4*(t - t0)*D*P + e,  D = [t > t0],
// over t = 1..60 with t0 = 30.
inline constexpr std::size_t kDidParams = 5;
inline constexpr int kDidBreak = Window::kAnchorOffset;

const std::array<const char*, kDidParams>& did_coefficient_names();

struct DidObservation {
    std::string country;
    int t = 0;
    double y = 0.0;
    int treated = 0;  // P
    int post = 0;     // D

    std::array<double, kDidParams> regressors() const;
};

struct DidDesign {
    std::vector<DidObservation> observations;
    int t0 = kDidBreak;

    Eigen::MatrixXd matrix() const;
    Eigen::VectorXd response() const;
};

// Stacks each matched control (P = 0) followed by its treated partner (P = 1).
DidDesign build_design(const Window& window, const MatchResult& matches);

// Same layout from explicit groups (all units, no matching).
DidDesign build_design(const Window& window, const std::vector<std::string>& control,
                       const std::vector<std::string>& treated);

enum class StandardErrorType { classical, cluster_country };

struct OlsOptions {
    StandardErrorType se_type = StandardErrorType::classical;
};

class RankDeficientDesign : public std::runtime_error {
public:
    explicit RankDeficientDesign(std::string column_name);
    std::string column;
};

struct DidFit {
    std::array<double, kDidParams> beta{};
    Eigen::Matrix<double, kDidParams, kDidParams> covariance;
    std::array<double, kDidParams> se{};
    std::array<double, kDidParams> t_stats{};
    std::array<double, kDidParams> p_values{};
    std::array<std::string, kDidParams> stars;
    double sigma2 = 0.0;
    double rss = 0.0;
    std::size_t n = 0;
    double df = 0.0;
    StandardErrorType se_type = StandardErrorType::classical;
    std::optional<double> cr;  // containment ratio in percent
    Eigen::VectorXd residuals;
};

// Least squares through Householder QR; classical covariance sigma^2 (X'X)^-1
// with sigma^2 = RSS / (n - 5) and Student-t p-values on n - 5 df, or
// country-clustered sandwich errors with G - 1 df.
DidFit fit_ols(const DidDesign& design, const OlsOptions& opts = {});

// "***" p < 0.001, "**" p < 0.01, "*" p < 0.05, "" otherwise.
std::string significance_stars(double p);

// max(-b4, 0) / (b1 + b3) * 100; empty when b1 + b3 <= 0.
std::optional<double> containment_ratio(double b1, double b3, double b4);
std::optional<double> containment_ratio(const DidFit& fit);

struct FittedLines {
    std::array<double, Window::kLength> control{};
    std::array<double, Window::kLength> treatment{};
    std::array<double, Window::kLength> counterfactual{};  // treatment without the b4 term
};

FittedLines fitted_lines(const DidFit& fit);

// max |X'r| divided by max(1, max |X'y|).
double residual_orthogonality(const DidDesign& design, const DidFit& fit);

void write_fit_json(const DidFit& fit, std::ostream& out);
void write_fitted_lines_csv(const FittedLines& lines, std::ostream& out);

}  // namespace psmdid
