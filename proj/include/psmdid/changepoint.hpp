#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psmdid/date.hpp"
#include "psmdid/panel.hpp"

namespace psmdid {

enum class Direction { rising, falling };
std::string to_string(Direction d);

struct ChangePoint {
    std::size_t index = 0;  // first observation after the estimated change
    Date date;
    Direction direction = Direction::rising;
    double statistic = 0.0;    // signed standardized Mann-Whitney value at the best split
    std::size_t detected_at = 0;  // index of the observation that triggered the alarm
};

struct DetectorConfig {
    int arl0 = 500;
    std::size_t warmup = 20;
    bool restart = true;

    // Throws std::invalid_argument for unsupported arl0 or warmup < 20.
    void validate() const;
};

enum class OutbreakSource { detected, configured };

struct OutbreakPoint {
    Date anchor_date;
    OutbreakSource source = OutbreakSource::configured;
    std::optional<double> ncsm_slope;
};

struct SplitStatistic {
    double u = 0.0;             // pairs (i <= k < j) with x_i < x_j, ties counted one half
    double standardized = 0.0;  // (U - mean) / sd with tie-corrected variance
};

// Two-sample Mann-Whitney statistic between series[0..k) and series[k..n).
SplitStatistic mann_whitney_split(std::span<const double> series, std::size_t k);

// CPM threshold h_t for the given arl0 at t observations since (re)start.
// Linear interpolation between tabulated points; constant past the table.
double cpm_threshold(int arl0, std::size_t t);

// Streaming Mann-Whitney change-point model. Keeps U for every split of the
// current segment and updates them in O(t) per observation.
class MannWhitneyCpm {
public:
    struct Scan {
        double max_abs = 0.0;
        std::size_t split = 0;     // number of observations before the best split
        double statistic = 0.0;    // signed value at the best split
    };

    void reset();
    // Appends an observation and returns the max over splits (all zero for t < 2).
    Scan push(double x);
    std::size_t size() const { return values_.size(); }

private:
    std::vector<double> values_;
    std::vector<std::int64_t> twice_u_;  // 2*U for split k at index k-1
    std::map<double, std::int64_t> tie_counts_;
    double tie_sum_ = 0.0;  // sum over tie groups of (c^3 - c)
};

// Sequential detection over a finite series. Dates are first_date + index.
std::vector<ChangePoint> detect(std::span<const double> series, const DetectorConfig& cfg,
                                Date first_date = Date{});

// Keeps points whose following `window` observations average above the
// preceding `window` (truncated at the series ends).
std::vector<ChangePoint> filter_rising(const std::vector<ChangePoint>& points, std::span<const double> series,
                                       std::size_t window = 14);

struct PromotionOptions {
    std::size_t max_anchors = 3;
    int merge_radius_days = 45;
    std::size_t slope_window = 30;
};

// Ranks rising points by the least-squares slope of the outcome over the
// following slope_window observations, merges points closer than the radius
// (keeping the steeper) and returns the top anchors in date order. Points
// lacking the 29-before / 30-after context around them are skipped.
std::vector<OutbreakPoint> promote_outbreaks(const std::vector<ChangePoint>& points, std::span<const double> ncsm,
                                             const PromotionOptions& opts = {}, Diagnostics* diag = nullptr);

// Cross-country mean per date over observed cells; NaN where no country is observed.
std::vector<double> cross_country_mean(const PanelDataset& ds, const std::string& variable);

}  // namespace psmdid
