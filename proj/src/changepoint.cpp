#include "psmdid/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cpm_thresholds.hpp"

namespace psmdid {

std::string to_string(Direction d) { return d == Direction::rising ? "rising" : "falling"; }

void DetectorConfig::validate() const {
    if (arl0 != 370 && arl0 != 500 && arl0 != 1000)
        throw std::invalid_argument("unsupported arl0 " + std::to_string(arl0) + " (supported: 370, 500, 1000)");
    if (warmup < 20) throw std::invalid_argument("warmup must be at least 20 observations");
}

namespace {

double standardize(double u, double n1, double n2, double tie_sum) {
    const double n = n1 + n2;
    const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
    if (!(var > 1e-12)) return 0.0;
    return (u - 0.5 * n1 * n2) / std::sqrt(var);
}

}  // namespace

SplitStatistic mann_whitney_split(std::span<const double> series, std::size_t k) {
    const std::size_t n = series.size();
    if (n < 4) throw std::invalid_argument("mann_whitney_split: series needs at least 4 values");
    if (k < 1 || k >= n) throw std::invalid_argument("mann_whitney_split: split must satisfy 1 <= k < n");
    for (double x : series)
        if (std::isnan(x)) throw std::invalid_argument("mann_whitney_split: missing value in series");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return series[a] < series[b]; });

    // midranks; sums of midranks stay on the half-integer grid
    std::vector<double> rank(n);
    double tie_sum = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && series[order[j + 1]] == series[order[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t q = i; q <= j; ++q) rank[order[q]] = mid;
        const double c = static_cast<double>(j - i + 1);
        tie_sum += c * c * c - c;
        i = j + 1;
    }
    const double n1 = static_cast<double>(k);
    const double n2 = static_cast<double>(n - k);
    double post_rank_sum = 0.0;
    for (std::size_t i = k; i < n; ++i) post_rank_sum += rank[i];
    SplitStatistic out;
    out.u = post_rank_sum - n2 * (n2 + 1.0) / 2.0;
    out.standardized = standardize(out.u, n1, n2, tie_sum);
    return out;
}

double cpm_threshold(int arl0, std::size_t t) {
    const auto table = detail::cpm_threshold_table(arl0);
    if (table.empty()) throw std::invalid_argument("unsupported arl0 " + std::to_string(arl0));
    if (t <= table.front().t) return table.front().h;
    if (t >= table.back().t) return table.back().h;
    auto hi = std::lower_bound(table.begin(), table.end(), t,
                               [](const detail::ThresholdPoint& p, std::size_t v) { return p.t < v; });
    if (hi->t == t) return hi->h;
    auto lo = hi - 1;
    const double w = static_cast<double>(t - lo->t) / static_cast<double>(hi->t - lo->t);
    return lo->h + w * (hi->h - lo->h);
}

void MannWhitneyCpm::reset() {
    values_.clear();
    twice_u_.clear();
    tie_counts_.clear();
    tie_sum_ = 0.0;
}

MannWhitneyCpm::Scan MannWhitneyCpm::push(double x) {
    if (std::isnan(x)) throw std::invalid_argument("MannWhitneyCpm: missing value in stream");
    // each existing split k gains the pairs (i <= k, new) ; cumulative over i
    const std::size_t t_prev = values_.size();
    twice_u_.push_back(0);
    std::int64_t cum = 0;
    for (std::size_t k = 0; k < t_prev; ++k) {
        const double v = values_[k];
        cum += v < x ? 2 : (v == x ? 1 : 0);
        twice_u_[k] += cum;
    }
    values_.push_back(x);
    const std::int64_t c = tie_counts_[x]++;
    tie_sum_ += 3.0 * static_cast<double>(c) * static_cast<double>(c) + 3.0 * static_cast<double>(c);

    Scan scan;
    const std::size_t t = values_.size();
    if (t < 2) return scan;
    for (std::size_t k = 1; k < t; ++k) {
        const double z = standardize(0.5 * static_cast<double>(twice_u_[k - 1]), static_cast<double>(k),
                                     static_cast<double>(t - k), tie_sum_);
        if (std::fabs(z) > scan.max_abs) {
            scan.max_abs = std::fabs(z);
            scan.split = k;
            scan.statistic = z;
        }
    }
    return scan;
}

std::vector<ChangePoint> detect(std::span<const double> series, const DetectorConfig& cfg, Date first_date) {
    cfg.validate();
    if (series.size() < cfg.warmup)
        throw std::invalid_argument("detect: series shorter than the warm-up length");

    std::vector<ChangePoint> points;
    MannWhitneyCpm cpm;
    std::size_t start = 0;
    std::size_t pos = 0;
    while (pos < series.size()) {
        const auto scan = cpm.push(series[pos]);
        const std::size_t t = cpm.size();
        if (t >= cfg.warmup && scan.split > 0 && scan.max_abs > cpm_threshold(cfg.arl0, t)) {
            ChangePoint cp;
            cp.index = start + scan.split;
            cp.date = first_date.plus_days(static_cast<int>(cp.index));
            cp.direction = scan.statistic > 0 ? Direction::rising : Direction::falling;
            cp.statistic = scan.statistic;
            cp.detected_at = pos;
            points.push_back(cp);
            if (!cfg.restart) break;
            // monitoring resumes from the estimated change point
            start = cp.index;
            pos = start;
            cpm.reset();
            continue;
        }
        ++pos;
    }
    return points;
}

std::vector<ChangePoint> filter_rising(const std::vector<ChangePoint>& points, std::span<const double> series,
                                       std::size_t window) {
    std::vector<ChangePoint> out;
    for (const auto& p : points) {
        if (p.index >= series.size()) throw std::invalid_argument("filter_rising: point index outside series");
        const std::size_t before_lo = p.index >= window ? p.index - window : 0;
        const std::size_t after_hi = std::min(series.size(), p.index + window);
        if (before_lo == p.index) continue;  // nothing precedes it
        double before = 0.0, after = 0.0;
        for (std::size_t i = before_lo; i < p.index; ++i) before += series[i];
        for (std::size_t i = p.index; i < after_hi; ++i) after += series[i];
        before /= static_cast<double>(p.index - before_lo);
        after /= static_cast<double>(after_hi - p.index);
        if (after > before) out.push_back(p);
    }
    return out;
}

namespace {

double ols_slope(std::span<const double> y) {
    const double n = static_cast<double>(y.size());
    const double mean_x = (n - 1.0) / 2.0;
    double mean_y = 0.0;
    for (double v : y) mean_y += v;
    mean_y /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double dx = static_cast<double>(i) - mean_x;
        sxy += dx * (y[i] - mean_y);
        sxx += dx * dx;
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace

std::vector<OutbreakPoint> promote_outbreaks(const std::vector<ChangePoint>& points, std::span<const double> ncsm,
                                             const PromotionOptions& opts, Diagnostics* diag) {
    if (points.empty()) throw std::invalid_argument("promote_outbreaks: no candidate points");

    struct Candidate {
        const ChangePoint* point;
        double slope;
    };
    std::vector<Candidate> candidates;
    for (const auto& p : points) {
        const bool context = p.index + 1 >= static_cast<std::size_t>(Window::kAnchorOffset) &&
                             p.index + (Window::kLength - Window::kAnchorOffset) < ncsm.size();
        if (!context) {
            warn(diag, "change point " + p.date.to_string() + " lacks a full 60-day window; skipped");
            continue;
        }
        const std::size_t end = std::min(ncsm.size(), p.index + opts.slope_window);
        auto segment = ncsm.subspan(p.index, end - p.index);
        if (std::any_of(segment.begin(), segment.end(), [](double v) { return std::isnan(v); })) {
            warn(diag, "change point " + p.date.to_string() + " has missing outcome values; skipped");
            continue;
        }
        candidates.push_back({&p, ols_slope(segment)});
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.slope != b.slope) return a.slope > b.slope;
        return a.point->index < b.point->index;
    });

    std::vector<Candidate> kept;
    for (const auto& c : candidates) {
        const bool near = std::any_of(kept.begin(), kept.end(), [&](const Candidate& k) {
            return std::abs(days_between(k.point->date, c.point->date)) <= opts.merge_radius_days;
        });
        if (!near) kept.push_back(c);
    }
    if (kept.size() < opts.max_anchors)
        warn(diag, "only " + std::to_string(kept.size()) + " outbreak candidates for " +
                       std::to_string(opts.max_anchors) + " requested anchors");
    if (kept.size() > opts.max_anchors) kept.resize(opts.max_anchors);

    std::vector<OutbreakPoint> out;
    for (const auto& c : kept) out.push_back({c.point->date, OutbreakSource::detected, c.slope});
    std::sort(out.begin(), out.end(),
              [](const OutbreakPoint& a, const OutbreakPoint& b) { return a.anchor_date < b.anchor_date; });
    return out;
}

std::vector<double> cross_country_mean(const PanelDataset& ds, const std::string& variable) {
    const std::size_t v = ds.require_variable(variable);
    std::vector<double> out(ds.num_dates(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t d = 0; d < ds.num_dates(); ++d) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t c = 0; c < ds.countries().size(); ++c) {
            const double x = ds.raw(c, d, v);
            if (!std::isnan(x)) {
                sum += x;
                ++n;
            }
        }
        if (n > 0) out[d] = sum / static_cast<double>(n);
    }
    return out;
}

}  // namespace psmdid
