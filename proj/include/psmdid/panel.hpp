#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "psmdid/date.hpp"

namespace psmdid {

// Fatal problem with user-supplied input (files, configuration).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-fatal notes collected while processing. Passing nullptr discards them.
struct Diagnostics {
    std::vector<std::string> warnings;
    void warn(std::string message) { warnings.push_back(std::move(message)); }
};

inline void warn(Diagnostics* diag, std::string message) {
    if (diag) diag->warn(std::move(message));
}

enum class VariableKind { policy, index, outcome };

struct VariableDescriptor {
    std::string name;
    std::string description;
    double min_allowed = 0.0;
    double max_allowed = 0.0;
    VariableKind kind = VariableKind::policy;
};

// C1-C8, E1-E2, H1-H3, H6-H8, the four composite indices, NCSM and R.
std::vector<VariableDescriptor> default_schema();

// Country x date x variable store. Dates form a contiguous daily range;
// missing cells hold NaN.
class PanelDataset {
public:
    PanelDataset() = default;
    PanelDataset(std::vector<std::string> countries, Date first_date, std::size_t num_dates,
                 std::vector<VariableDescriptor> variables);

    const std::vector<std::string>& countries() const { return countries_; }
    const std::vector<VariableDescriptor>& variables() const { return variables_; }
    std::size_t num_dates() const { return num_dates_; }
    Date first_date() const { return first_date_; }
    Date last_date() const { return first_date_.plus_days(static_cast<int>(num_dates_) - 1); }
    Date date_at(std::size_t i) const { return first_date_.plus_days(static_cast<int>(i)); }
    std::optional<std::size_t> date_index(Date d) const;

    std::optional<std::size_t> country_index(const std::string& code) const;
    std::optional<std::size_t> variable_index(const std::string& name) const;
    // Throws InputError naming the variable when absent.
    std::size_t require_variable(const std::string& name) const;

    std::optional<double> value(std::size_t country, std::size_t date, std::size_t variable) const;
    double raw(std::size_t country, std::size_t date, std::size_t variable) const {
        return values_[offset(country, date, variable)];
    }
    void set(std::size_t country, std::size_t date, std::size_t variable, double v) {
        values_[offset(country, date, variable)] = v;
    }

    // Contiguous date series for one (country, variable); NaN marks missing.
    std::span<const double> series(std::size_t country, std::size_t variable) const {
        return {values_.data() + offset(country, 0, variable), num_dates_};
    }

    // Copy limited to the listed countries (in the given order). Unknown codes throw InputError.
    PanelDataset select_countries(const std::vector<std::string>& codes) const;

private:
    std::size_t offset(std::size_t c, std::size_t d, std::size_t v) const {
        return (v * countries_.size() + c) * num_dates_ + d;
    }

    std::vector<std::string> countries_;
    Date first_date_;
    std::size_t num_dates_ = 0;
    std::vector<VariableDescriptor> variables_;
    std::vector<double> values_;
};

// Accepts the canonical long layout (country,date,variable,value) or a wide
// layout (country,date,<variable columns>). Variables outside the schema are
// ignored with a warning; values outside declared bounds are fatal.
PanelDataset load_panel(const std::string& path, const std::vector<VariableDescriptor>& schema,
                        Diagnostics* diag = nullptr);
PanelDataset read_panel(std::istream& in, const std::vector<VariableDescriptor>& schema,
                        Diagnostics* diag = nullptr);

// Long-format writer; non-missing cells only, shortest round-trip numerals.
void write_panel_long(const PanelDataset& ds, std::ostream& out);

// Fills missing runs of at most max_gap days with the last observed value.
// Only policy indicators are touched; outcomes are never imputed.
PanelDataset impute_forward(const PanelDataset& ds, int max_gap);

struct SummaryRow {
    std::string variable;
    std::size_t n = 0;
    std::optional<double> mean;
    std::optional<double> sd;  // n-1 denominator; empty when n < 2
    std::optional<double> min;
    std::optional<double> max;
};

std::vector<SummaryRow> summarize(const PanelDataset& ds);
void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out);

struct CorrelationMatrix {
    std::vector<std::string> variables;
    std::vector<std::optional<double>> cells;  // row-major, size n*n

    const std::optional<double>& at(std::size_t i, std::size_t j) const {
        return cells[i * variables.size() + j];
    }
};

// Pearson correlations over pairwise-complete (country, date) cells.
CorrelationMatrix correlation_matrix(const PanelDataset& ds, const std::vector<std::string>& variables);
void write_correlation_csv(const CorrelationMatrix& m, std::ostream& out);

// Sixty-day slice around an anchor: offsets 1..60 cover anchor-29 .. anchor+30,
// so offset 30 is the anchor itself.
struct Window {
    static constexpr int kLength = 60;
    static constexpr int kAnchorOffset = 30;

    Date anchor;
    std::string variable;
    std::vector<std::string> countries;
    std::vector<std::array<double, kLength>> series;  // series[c][offset - 1]
    std::vector<std::string> dropped;

    Date date_at(int offset) const { return anchor.plus_days(offset - kAnchorOffset); }
    // nullptr when the country is not in the window.
    const std::array<double, kLength>* find(const std::string& country) const;
};

Window extract_window(const PanelDataset& ds, Date anchor, const std::string& variable);
void write_window_csv(const Window& w, std::ostream& out);
Window read_window_csv(std::istream& in);

struct CenteredTable {
    std::vector<Date> dates;
    std::vector<std::string> countries;
    std::vector<std::vector<double>> values;  // values[date][country]; NaN where missing
};

// Subtracts, per date, the mean over countries observed on that date.
CenteredTable center_by_date(const PanelDataset& ds, const std::string& variable,
                             const std::vector<std::string>& countries);
void write_centered_csv(const CenteredTable& t, std::ostream& out);

// Country-level matching covariates.
struct MacroCovariates {
    static constexpr std::size_t kCount = 9;
    static const std::array<const char*, kCount>& names();

    double population = 0;
    double population_density = 0;
    double aged_65_older = 0;
    double gdp_per_capita = 0;
    double cardiovasc_death_rate = 0;
    double diabetes_prevalence = 0;
    double hospital_beds_per_thousand = 0;
    double life_expectancy = 0;
    double human_development_index = 0;

    std::array<double, kCount> to_array() const;
    static MacroCovariates from_array(const std::array<double, kCount>& a);
    // Throws InputError when a field is non-positive or HDI exceeds 1.
    void validate(const std::string& country) const;
};

using CovariateTable = std::map<std::string, MacroCovariates>;

// CSV with a country (or iso_code) column plus the nine covariate columns.
// Rows with a blank covariate are skipped and reported.
CovariateTable load_covariates(const std::string& path, Diagnostics* diag = nullptr);
CovariateTable read_covariates(std::istream& in, Diagnostics* diag = nullptr);
void write_covariates_csv(const CovariateTable& covs, std::ostream& out);

}  // namespace psmdid
