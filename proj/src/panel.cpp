#include "psmdid/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "psmdid/csv.hpp"

namespace psmdid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool is_missing_token(const std::string& t) {
    if (t.empty()) return true;
    const std::string l = lower(t);
    return l == "na" || l == "nan" || l == "null";
}

struct Cell {
    std::size_t country;
    Date date;
    std::size_t variable;
    double value;
    std::size_t line;
};

std::string bound_text(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return csv::format_double(v);
}

}  // namespace

std::vector<VariableDescriptor> default_schema() {
    using K = VariableKind;
    return {
        {"C1", "Closings of schools and universities", 0, 3, K::policy},
        {"C2", "Closings of workplaces", 0, 3, K::policy},
        {"C3", "Canceling public events", 0, 2, K::policy},
        {"C4", "Limits on gatherings", 0, 4, K::policy},
        {"C5", "Closing of public transport", 0, 2, K::policy},
        {"C6", "Requirements of staying at home", 0, 3, K::policy},
        {"C7", "Restrictions on internal movement", 0, 2, K::policy},
        {"C8", "Restrictions on international travel", 0, 4, K::policy},
        {"E1", "Income support for people who lose their jobs", 0, 2, K::policy},
        {"E2", "Debt and contract relief for households", 0, 2, K::policy},
        {"H1", "Public information campaigns", 0, 2, K::policy},
        {"H2", "Testing policy", 0, 3, K::policy},
        {"H3", "Contact tracing", 0, 2, K::policy},
        {"H6", "Facial coverings", 0, 4, K::policy},
        {"H7", "Vaccination policy", 0, 5, K::policy},
        {"H8", "Protection of elderly people", 0, 3, K::policy},
        {"GRI", "Government response index", 0, 100, K::index},
        {"SI", "Stringency index", 0, 100, K::index},
        {"CHI", "Containment and health index", 0, 100, K::index},
        {"ESI", "Economic support index", 0, 100, K::index},
        // reporting corrections can make smoothed case counts negative
        {"NCSM", "New confirmed cases, 7-day smoothed, per million people", -kInf, kInf, K::outcome},
        {"R", "Effective reproduction rate", 0, kInf, K::outcome},
    };
}

PanelDataset::PanelDataset(std::vector<std::string> countries, Date first_date, std::size_t num_dates,
                           std::vector<VariableDescriptor> variables)
    : countries_(std::move(countries)),
      first_date_(first_date),
      num_dates_(num_dates),
      variables_(std::move(variables)),
      values_(countries_.size() * num_dates_ * variables_.size(), kNaN) {
    for (const auto& v : variables_)
        if (!(v.min_allowed <= v.max_allowed))
            throw InputError("variable " + v.name + ": min_allowed exceeds max_allowed");
}

std::optional<std::size_t> PanelDataset::date_index(Date d) const {
    const int i = days_between(first_date_, d);
    if (i < 0 || static_cast<std::size_t>(i) >= num_dates_) return std::nullopt;
    return static_cast<std::size_t>(i);
}

std::optional<std::size_t> PanelDataset::country_index(const std::string& code) const {
    auto it = std::find(countries_.begin(), countries_.end(), code);
    if (it == countries_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - countries_.begin());
}

std::optional<std::size_t> PanelDataset::variable_index(const std::string& name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i)
        if (variables_[i].name == name) return i;
    return std::nullopt;
}

std::size_t PanelDataset::require_variable(const std::string& name) const {
    auto v = variable_index(name);
    if (!v) throw InputError("variable '" + name + "' is not in the panel");
    return *v;
}

std::optional<double> PanelDataset::value(std::size_t country, std::size_t date, std::size_t variable) const {
    const double v = raw(country, date, variable);
    if (std::isnan(v)) return std::nullopt;
    return v;
}

PanelDataset PanelDataset::select_countries(const std::vector<std::string>& codes) const {
    PanelDataset out(codes, first_date_, num_dates_, variables_);
    for (std::size_t c = 0; c < codes.size(); ++c) {
        auto src = country_index(codes[c]);
        if (!src) throw InputError("country '" + codes[c] + "' is not in the panel");
        for (std::size_t v = 0; v < variables_.size(); ++v)
            for (std::size_t d = 0; d < num_dates_; ++d) out.set(c, d, v, raw(*src, d, v));
    }
    return out;
}

PanelDataset load_panel(const std::string& path, const std::vector<VariableDescriptor>& schema,
                        Diagnostics* diag) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open panel file '" + path + "'");
    return read_panel(in, schema, diag);
}

PanelDataset read_panel(std::istream& in, const std::vector<VariableDescriptor>& schema, Diagnostics* diag) {
    csv::Reader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header)) throw InputError("no data rows");
    for (auto& h : header) h = csv::trim(h);

    auto find_col = [&](std::initializer_list<const char*> names) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            for (const char* n : names)
                if (lower(header[i]) == n) return i;
        return std::nullopt;
    };
    const auto country_col = find_col({"country", "iso_code", "countrycode"});
    const auto date_col = find_col({"date"});
    if (!country_col || !date_col) throw InputError("panel header must contain country and date columns");

    std::unordered_map<std::string, std::size_t> schema_index;
    for (std::size_t i = 0; i < schema.size(); ++i) schema_index.emplace(schema[i].name, i);

    const auto variable_col = find_col({"variable"});
    const auto value_col = find_col({"value"});
    const bool long_format = variable_col && value_col;

    // wide layout: map each column to a schema variable
    std::vector<std::optional<std::size_t>> wide_map(header.size());
    if (!long_format) {
        std::set<std::size_t> seen;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i == *country_col || i == *date_col) continue;
            auto it = schema_index.find(header[i]);
            if (it == schema_index.end()) {
                warn(diag, "ignoring unknown column '" + header[i] + "'");
                continue;
            }
            wide_map[i] = it->second;
            seen.insert(it->second);
        }
        for (std::size_t v = 0; v < schema.size(); ++v)
            if (!seen.count(v)) throw InputError("panel header lacks declared variable column '" + schema[v].name + "'");
    }

    std::vector<std::string> country_names;
    std::unordered_map<std::string, std::size_t> country_ids;
    std::vector<Cell> cells;
    std::set<std::string> unknown_variables;
    std::optional<Date> min_date, max_date;

    auto check_bounds = [&](std::size_t v, double x, std::size_t line) {
        const auto& d = schema[v];
        if (x < d.min_allowed || x > d.max_allowed) {
            std::ostringstream msg;
            msg << "line " << line << ": " << d.name << " = " << csv::format_double(x) << " outside ["
                << bound_text(d.min_allowed) << ", " << bound_text(d.max_allowed) << "] (" << d.name
                << (x > d.max_allowed ? " max " + bound_text(d.max_allowed) : " min " + bound_text(d.min_allowed))
                << ")";
            throw InputError(msg.str());
        }
    };

    std::vector<std::string> row;
    std::size_t data_rows = 0;
    while (reader.next(row)) {
        ++data_rows;
        const std::size_t line = reader.line();
        if (row.size() < header.size())
            throw InputError("line " + std::to_string(line) + ": expected " + std::to_string(header.size()) +
                             " fields, found " + std::to_string(row.size()));
        const std::string country = csv::trim(row[*country_col]);
        if (country.empty()) throw InputError("line " + std::to_string(line) + ": empty country");
        Date date;
        try {
            date = Date::parse(row[*date_col]);
        } catch (const std::invalid_argument& e) {
            throw InputError("line " + std::to_string(line) + ": " + e.what());
        }
        auto [it, inserted] = country_ids.emplace(country, country_names.size());
        if (inserted) country_names.push_back(country);
        if (!min_date || date < *min_date) min_date = date;
        if (!max_date || date > *max_date) max_date = date;

        auto add_value = [&](std::size_t v, const std::string& text) {
            const std::string t = csv::trim(text);
            double x = kNaN;
            if (!is_missing_token(t)) {
                try {
                    x = csv::parse_double(t);
                } catch (const std::invalid_argument&) {
                    throw InputError("line " + std::to_string(line) + ": " + schema[v].name + " value '" + t +
                                     "' is not numeric");
                }
                check_bounds(v, x, line);
            }
            cells.push_back({it->second, date, v, x, line});
        };

        if (long_format) {
            const std::string var = csv::trim(row[*variable_col]);
            auto sv = schema_index.find(var);
            if (sv == schema_index.end()) {
                if (unknown_variables.insert(var).second) warn(diag, "ignoring unknown variable '" + var + "'");
                continue;
            }
            add_value(sv->second, row[*value_col]);
        } else {
            for (std::size_t i = 0; i < header.size(); ++i)
                if (wide_map[i]) add_value(*wide_map[i], row[i]);
        }
    }
    if (data_rows == 0) throw InputError("no data rows");

    std::vector<std::string> sorted = country_names;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> remap(country_names.size());
    for (std::size_t i = 0; i < country_names.size(); ++i)
        remap[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), country_names[i]) -
                                            sorted.begin());

    const auto num_dates = static_cast<std::size_t>(days_between(*min_date, *max_date) + 1);
    PanelDataset ds(sorted, *min_date, num_dates, schema);
    std::vector<std::size_t> filled_by(sorted.size() * num_dates * schema.size(), 0);
    for (const auto& cell : cells) {
        const std::size_t c = remap[cell.country];
        const std::size_t d = static_cast<std::size_t>(days_between(*min_date, cell.date));
        const std::size_t slot = (cell.variable * sorted.size() + c) * num_dates + d;
        if (filled_by[slot] != 0)
            throw InputError("line " + std::to_string(cell.line) + ": duplicate cell for " + sorted[c] + " " +
                             cell.date.to_string() + " " + schema[cell.variable].name + " (first at line " +
                             std::to_string(filled_by[slot]) + ")");
        filled_by[slot] = cell.line;
        ds.set(c, d, cell.variable, cell.value);
    }
    if (long_format) {
        std::set<std::size_t> present;
        for (const auto& cell : cells) present.insert(cell.variable);
        for (std::size_t v = 0; v < schema.size(); ++v)
            if (!present.count(v)) warn(diag, "declared variable '" + schema[v].name + "' has no rows");
    }
    return ds;
}

void write_panel_long(const PanelDataset& ds, std::ostream& out) {
    out << "country,date,variable,value\n";
    for (std::size_t c = 0; c < ds.countries().size(); ++c)
        for (std::size_t d = 0; d < ds.num_dates(); ++d) {
            const std::string date = ds.date_at(d).to_string();
            for (std::size_t v = 0; v < ds.variables().size(); ++v) {
                const double x = ds.raw(c, d, v);
                if (std::isnan(x)) continue;
                out << csv::escape(ds.countries()[c]) << ',' << date << ',' << ds.variables()[v].name << ','
                    << csv::format_double(x) << '\n';
            }
        }
}

PanelDataset impute_forward(const PanelDataset& ds, int max_gap) {
    if (max_gap < 0) throw std::invalid_argument("max_gap must be non-negative");
    PanelDataset out = ds;
    const std::size_t n = ds.num_dates();
    for (std::size_t v = 0; v < ds.variables().size(); ++v) {
        if (ds.variables()[v].kind != VariableKind::policy) continue;
        for (std::size_t c = 0; c < ds.countries().size(); ++c) {
            std::size_t d = 0;
            std::optional<double> last;
            while (d < n) {
                const double x = ds.raw(c, d, v);
                if (!std::isnan(x)) {
                    last = x;
                    ++d;
                    continue;
                }
                std::size_t end = d;
                while (end < n && std::isnan(ds.raw(c, end, v))) ++end;
                // trailing runs have no successor but still follow an observation
                if (last && end - d <= static_cast<std::size_t>(max_gap))
                    for (std::size_t k = d; k < end; ++k) out.set(c, k, v, *last);
                d = end;
            }
        }
    }
    return out;
}

std::vector<SummaryRow> summarize(const PanelDataset& ds) {
    if (ds.countries().empty() || ds.num_dates() == 0) throw std::invalid_argument("summarize: empty dataset");
    std::vector<SummaryRow> rows;
    for (std::size_t v = 0; v < ds.variables().size(); ++v) {
        SummaryRow row;
        row.variable = ds.variables()[v].name;
        // two-pass moments in a fixed (country, date) order
        double sum = 0.0;
        double lo = kInf, hi = -kInf;
        for (std::size_t c = 0; c < ds.countries().size(); ++c)
            for (double x : ds.series(c, v))
                if (!std::isnan(x)) {
                    ++row.n;
                    sum += x;
                    lo = std::min(lo, x);
                    hi = std::max(hi, x);
                }
        if (row.n > 0) {
            const double mean = sum / static_cast<double>(row.n);
            row.mean = mean;
            row.min = lo;
            row.max = hi;
            if (row.n > 1) {
                double ss = 0.0;
                for (std::size_t c = 0; c < ds.countries().size(); ++c)
                    for (double x : ds.series(c, v))
                        if (!std::isnan(x)) ss += (x - mean) * (x - mean);
                row.sd = std::sqrt(ss / static_cast<double>(row.n - 1));
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {
std::string opt_text(const std::optional<double>& v) { return v ? csv::format_double(*v) : "NA"; }
}  // namespace

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
    out << "variable,mean,sd,min,max,n\n";
    for (const auto& r : rows)
        out << r.variable << ',' << opt_text(r.mean) << ',' << opt_text(r.sd) << ',' << opt_text(r.min) << ','
            << opt_text(r.max) << ',' << r.n << '\n';
}

CorrelationMatrix correlation_matrix(const PanelDataset& ds, const std::vector<std::string>& variables) {
    if (variables.size() < 2) throw std::invalid_argument("correlation_matrix needs at least two variables");
    std::vector<std::size_t> idx;
    for (const auto& name : variables) idx.push_back(ds.require_variable(name));

    const std::size_t k = variables.size();
    CorrelationMatrix m{variables, std::vector<std::optional<double>>(k * k)};
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            // pairwise-complete cells
            std::vector<std::pair<double, double>> xy;
            for (std::size_t c = 0; c < ds.countries().size(); ++c) {
                auto a = ds.series(c, idx[i]);
                auto b = ds.series(c, idx[j]);
                for (std::size_t d = 0; d < ds.num_dates(); ++d)
                    if (!std::isnan(a[d]) && !std::isnan(b[d])) xy.emplace_back(a[d], b[d]);
            }
            std::optional<double> r;
            if (xy.size() >= 2) {
                double mx = 0, my = 0;
                for (auto [x, y] : xy) {
                    mx += x;
                    my += y;
                }
                mx /= static_cast<double>(xy.size());
                my /= static_cast<double>(xy.size());
                double sxy = 0, sxx = 0, syy = 0;
                for (auto [x, y] : xy) {
                    sxy += (x - mx) * (y - my);
                    sxx += (x - mx) * (x - mx);
                    syy += (y - my) * (y - my);
                }
                if (sxx > 0 && syy > 0) {
                    r = i == j ? 1.0 : std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
                }
            }
            m.cells[i * k + j] = r;
            m.cells[j * k + i] = r;
        }
    }
    return m;
}

void write_correlation_csv(const CorrelationMatrix& m, std::ostream& out) {
    out << "variable";
    for (const auto& v : m.variables) out << ',' << v;
    out << '\n';
    for (std::size_t i = 0; i < m.variables.size(); ++i) {
        out << m.variables[i];
        for (std::size_t j = 0; j < m.variables.size(); ++j) out << ',' << opt_text(m.at(i, j));
        out << '\n';
    }
}

const std::array<double, Window::kLength>* Window::find(const std::string& country) const {
    for (std::size_t i = 0; i < countries.size(); ++i)
        if (countries[i] == country) return &series[i];
    return nullptr;
}

Window extract_window(const PanelDataset& ds, Date anchor, const std::string& variable) {
    const std::size_t v = ds.require_variable(variable);
    const Date first = anchor.plus_days(1 - Window::kAnchorOffset);
    const Date last = anchor.plus_days(Window::kLength - Window::kAnchorOffset);
    const auto begin = ds.date_index(first);
    if (!begin || !ds.date_index(last))
        throw InputError("anchor " + anchor.to_string() + " needs data from " + first.to_string() + " to " +
                         last.to_string() + " but the panel covers " + ds.first_date().to_string() + " to " +
                         ds.last_date().to_string());

    Window w;
    w.anchor = anchor;
    w.variable = variable;
    for (std::size_t c = 0; c < ds.countries().size(); ++c) {
        auto s = ds.series(c, v);
        std::array<double, Window::kLength> values{};
        bool complete = true;
        for (int k = 0; k < Window::kLength; ++k) {
            values[k] = s[*begin + k];
            if (std::isnan(values[k])) complete = false;
        }
        if (complete) {
            w.countries.push_back(ds.countries()[c]);
            w.series.push_back(values);
        } else {
            w.dropped.push_back(ds.countries()[c]);
        }
    }
    return w;
}

void write_window_csv(const Window& w, std::ostream& out) {
    out << "country,offset,date,variable,value\n";
    for (std::size_t c = 0; c < w.countries.size(); ++c)
        for (int k = 1; k <= Window::kLength; ++k)
            out << csv::escape(w.countries[c]) << ',' << k << ',' << w.date_at(k).to_string() << ',' << w.variable
                << ',' << csv::format_double(w.series[c][k - 1]) << '\n';
}

Window read_window_csv(std::istream& in) {
    csv::Reader reader(in);
    std::vector<std::string> row;
    if (!reader.next(row)) throw InputError("window file: no data rows");
    if (row.size() < 5 || csv::trim(row[0]) != "country" || csv::trim(row[1]) != "offset")
        throw InputError("window file: expected header country,offset,date,variable,value");

    Window w;
    std::optional<Date> anchor;
    std::map<std::string, std::array<double, Window::kLength>> series;
    std::map<std::string, std::set<int>> seen;
    while (reader.next(row)) {
        const std::string where = "window file line " + std::to_string(reader.line());
        if (row.size() < 5) throw InputError(where + ": expected 5 fields");
        const std::string country = csv::trim(row[0]);
        int offset = 0;
        double value = 0;
        Date date;
        try {
            offset = static_cast<int>(csv::parse_double(row[1]));
            date = Date::parse(row[2]);
            value = csv::parse_double(row[4]);
        } catch (const std::invalid_argument& e) {
            throw InputError(where + ": " + e.what());
        }
        if (offset < 1 || offset > Window::kLength) throw InputError(where + ": offset out of 1..60");
        const Date a = date.plus_days(Window::kAnchorOffset - offset);
        if (anchor && *anchor != a) throw InputError(where + ": inconsistent anchor date");
        anchor = a;
        w.variable = csv::trim(row[3]);
        if (!seen[country].insert(offset).second) throw InputError(where + ": duplicate offset");
        series[country][offset - 1] = value;
    }
    if (!anchor) throw InputError("window file: no data rows");
    w.anchor = *anchor;
    for (auto& [country, values] : series) {
        if (seen[country].size() != Window::kLength) {
            w.dropped.push_back(country);
            continue;
        }
        w.countries.push_back(country);
        w.series.push_back(values);
    }
    return w;
}

CenteredTable center_by_date(const PanelDataset& ds, const std::string& variable,
                             const std::vector<std::string>& countries) {
    if (countries.size() < 2) throw std::invalid_argument("center_by_date needs at least two countries");
    const std::size_t v = ds.require_variable(variable);
    std::vector<std::size_t> idx;
    for (const auto& c : countries) {
        auto i = ds.country_index(c);
        if (!i) throw InputError("country '" + c + "' is not in the panel");
        idx.push_back(*i);
    }
    CenteredTable t;
    t.countries = countries;
    for (std::size_t d = 0; d < ds.num_dates(); ++d) {
        t.dates.push_back(ds.date_at(d));
        std::vector<double> row(idx.size(), kNaN);
        double sum = 0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const double x = ds.raw(idx[i], d, v);
            if (!std::isnan(x)) {
                sum += x;
                ++n;
            }
        }
        if (n > 0) {
            const double mean = sum / static_cast<double>(n);
            for (std::size_t i = 0; i < idx.size(); ++i) {
                const double x = ds.raw(idx[i], d, v);
                if (!std::isnan(x)) row[i] = x - mean;
            }
        }
        t.values.push_back(std::move(row));
    }
    return t;
}

void write_centered_csv(const CenteredTable& t, std::ostream& out) {
    out << "date";
    for (const auto& c : t.countries) out << ',' << csv::escape(c);
    out << '\n';
    for (std::size_t d = 0; d < t.dates.size(); ++d) {
        out << t.dates[d].to_string();
        for (double x : t.values[d]) out << ',' << (std::isnan(x) ? std::string("NA") : csv::format_double(x));
        out << '\n';
    }
}

const std::array<const char*, MacroCovariates::kCount>& MacroCovariates::names() {
    static const std::array<const char*, kCount> n = {
        "population",           "population_density",         "aged_65_older",
        "gdp_per_capita",       "cardiovasc_death_rate",      "diabetes_prevalence",
        "hospital_beds_per_thousand", "life_expectancy",      "human_development_index"};
    return n;
}

std::array<double, MacroCovariates::kCount> MacroCovariates::to_array() const {
    return {population,          population_density,         aged_65_older,
            gdp_per_capita,      cardiovasc_death_rate,      diabetes_prevalence,
            hospital_beds_per_thousand, life_expectancy,     human_development_index};
}

MacroCovariates MacroCovariates::from_array(const std::array<double, kCount>& a) {
    MacroCovariates m;
    m.population = a[0];
    m.population_density = a[1];
    m.aged_65_older = a[2];
    m.gdp_per_capita = a[3];
    m.cardiovasc_death_rate = a[4];
    m.diabetes_prevalence = a[5];
    m.hospital_beds_per_thousand = a[6];
    m.life_expectancy = a[7];
    m.human_development_index = a[8];
    return m;
}

void MacroCovariates::validate(const std::string& country) const {
    const auto values = to_array();
    for (std::size_t i = 0; i < kCount; ++i)
        if (!(values[i] > 0))
            throw InputError("covariates for " + country + ": " + names()[i] + " must be strictly positive");
    if (aged_65_older > 100 || diabetes_prevalence > 100)
        throw InputError("covariates for " + country + ": percentage share above 100");
    if (human_development_index > 1)
        throw InputError("covariates for " + country + ": human_development_index must lie in (0, 1]");
}

CovariateTable load_covariates(const std::string& path, Diagnostics* diag) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open covariates file '" + path + "'");
    return read_covariates(in, diag);
}

CovariateTable read_covariates(std::istream& in, Diagnostics* diag) {
    csv::Reader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header)) throw InputError("covariates file: no data rows");
    for (auto& h : header) h = lower(csv::trim(h));
    std::optional<std::size_t> country_col;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == "country" || header[i] == "iso_code") country_col = i;
    if (!country_col) throw InputError("covariates file: missing country column");
    std::array<std::size_t, MacroCovariates::kCount> cols{};
    for (std::size_t k = 0; k < MacroCovariates::kCount; ++k) {
        auto it = std::find(header.begin(), header.end(), MacroCovariates::names()[k]);
        if (it == header.end())
            throw InputError(std::string("covariates file: missing column ") + MacroCovariates::names()[k]);
        cols[k] = static_cast<std::size_t>(it - header.begin());
    }

    CovariateTable out;
    std::vector<std::string> row;
    while (reader.next(row)) {
        const std::string where = "covariates line " + std::to_string(reader.line());
        if (row.size() < header.size()) throw InputError(where + ": too few fields");
        const std::string country = csv::trim(row[*country_col]);
        std::array<double, MacroCovariates::kCount> values{};
        bool complete = true;
        for (std::size_t k = 0; k < MacroCovariates::kCount; ++k) {
            const std::string t = csv::trim(row[cols[k]]);
            if (is_missing_token(t)) {
                complete = false;
                break;
            }
            try {
                values[k] = csv::parse_double(t);
            } catch (const std::invalid_argument& e) {
                throw InputError(where + ": " + e.what());
            }
        }
        if (!complete) {
            warn(diag, "covariates for " + country + " incomplete; country excluded");
            continue;
        }
        auto m = MacroCovariates::from_array(values);
        m.validate(country);
        if (!out.emplace(country, m).second) throw InputError(where + ": duplicate country " + country);
    }
    return out;
}

void write_covariates_csv(const CovariateTable& covs, std::ostream& out) {
    out << "country";
    for (const char* n : MacroCovariates::names()) out << ',' << n;
    out << '\n';
    for (const auto& [country, m] : covs) {
        out << csv::escape(country);
        for (double x : m.to_array()) out << ',' << csv::format_double(x);
        out << '\n';
    }
}

}  // namespace psmdid
