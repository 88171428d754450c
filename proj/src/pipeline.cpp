#include "psmdid/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "psmdid/csv.hpp"

namespace psmdid {

EvaluationConfig EvaluationConfig::from_config(const KeyValueConfig& kv) {
    EvaluationConfig cfg;
    if (auto p = kv.path("panel")) cfg.panel_path = *p;
    if (auto p = kv.path("covariates")) cfg.covariates_path = *p;
    cfg.countries = kv.list("countries");

    for (const auto& item : kv.list("policies")) {
        PolicySpec spec;
        const auto colon = item.find(':');
        spec.code = csv::trim(item.substr(0, colon));
        if (colon != std::string::npos) {
            try {
                spec.threshold = csv::parse_double(item.substr(colon + 1));
            } catch (const std::invalid_argument&) {
                throw InputError("policies: bad threshold in '" + item + "'");
            }
        }
        cfg.policies.push_back(spec);
    }

    const auto anchors = kv.list("anchors");
    if (!(anchors.size() == 1 && anchors[0] == "detect")) {
        for (const auto& a : anchors) {
            try {
                cfg.anchors.push_back({Date::parse(a), OutbreakSource::configured, std::nullopt});
            } catch (const std::invalid_argument& e) {
                throw InputError(std::string("anchors: ") + e.what());
            }
        }
    }

    const long min_group = kv.integer_or("min_group_size", 3);
    if (min_group < 1) throw InputError("min_group_size must be at least 1");
    cfg.min_group_size = static_cast<std::size_t>(min_group);
    cfg.max_gap = static_cast<int>(kv.integer_or("max_gap", 3));
    if (cfg.max_gap < 0) throw InputError("max_gap must be non-negative");
    cfg.outcome = kv.get_or("outcome", "NCSM");
    cfg.logistic.ridge = kv.number_or("ridge", cfg.logistic.ridge);
    if (cfg.logistic.ridge < 0) throw InputError("ridge must be non-negative");
    if (kv.has("caliper") && kv.get_or("caliper", "") != "none") cfg.matching.caliper = kv.number_or("caliper", 0.0);
    const std::string se = kv.get_or("se", "classical");
    if (se == "classical")
        cfg.inference.se_type = StandardErrorType::classical;
    else if (se == "cluster")
        cfg.inference.se_type = StandardErrorType::cluster_country;
    else
        throw InputError("se must be 'classical' or 'cluster'");
    cfg.threads = static_cast<unsigned>(kv.integer_or("threads", 0));

    auto& det = cfg.detection;
    det.detector.arl0 = static_cast<int>(kv.integer_or("detector.arl0", det.detector.arl0));
    det.detector.warmup = static_cast<std::size_t>(kv.integer_or("detector.warmup", 20));
    det.detector.restart = kv.flag_or("detector.restart", true);
    det.series_variable = kv.get_or("detector.series", "R");
    if (auto c = kv.get("detector.country"); c && !c->empty()) det.country = *c;
    det.rising_window = static_cast<std::size_t>(kv.integer_or("detector.rising_window", 14));
    det.promotion.max_anchors = static_cast<std::size_t>(kv.integer_or("promote.max_anchors", 3));
    det.promotion.merge_radius_days = static_cast<int>(kv.integer_or("promote.merge_radius", 45));
    det.promotion.slope_window = static_cast<std::size_t>(kv.integer_or("promote.slope_window", 30));
    try {
        det.detector.validate();
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    return cfg;
}

void EvaluationConfig::validate(const PanelDataset& panel) const {
    if (min_group_size < 1) throw InputError("min_group_size must be at least 1");
    for (const auto& p : policies)
        if (!panel.variable_index(p.code)) throw InputError("policy '" + p.code + "' is not in the panel schema");
    panel.require_variable(outcome);
}

LoadedInputs load_inputs(const EvaluationConfig& cfg) {
    LoadedInputs in;
    PanelDataset raw = load_panel(cfg.panel_path.string(), default_schema(), &in.diagnostics);
    if (!cfg.countries.empty()) raw = raw.select_countries(cfg.countries);
    in.panel = impute_forward(raw, cfg.max_gap);
    in.covariates = load_covariates(cfg.covariates_path.string(), &in.diagnostics);
    return in;
}

std::vector<OutbreakPoint> resolve_anchors(const EvaluationConfig& cfg, const PanelDataset& panel,
                                           Diagnostics* diag) {
    if (!cfg.anchors.empty()) return cfg.anchors;
    const auto& det = cfg.detection;
    std::vector<double> series, outcome;
    if (det.country) {
        const auto c = panel.country_index(*det.country);
        if (!c) throw InputError("detector.country '" + *det.country + "' is not in the panel");
        auto s = panel.series(*c, panel.require_variable(det.series_variable));
        auto o = panel.series(*c, panel.require_variable(cfg.outcome));
        series.assign(s.begin(), s.end());
        outcome.assign(o.begin(), o.end());
    } else {
        series = cross_country_mean(panel, det.series_variable);
        outcome = cross_country_mean(panel, cfg.outcome);
    }
    // detection needs a gap-free stream: trim unobserved ends
    std::size_t lo = 0, hi = series.size();
    while (lo < hi && std::isnan(series[lo])) ++lo;
    while (hi > lo && std::isnan(series[hi - 1])) --hi;
    for (std::size_t i = lo; i < hi; ++i)
        if (std::isnan(series[i]))
            throw InputError("detection series has a gap at " + panel.date_at(i).to_string());
    std::span<const double> stream(series.data() + lo, hi - lo);
    const auto points = detect(stream, det.detector, panel.date_at(lo));
    const auto rising = filter_rising(points, stream, det.rising_window);
    warn(diag, std::to_string(points.size()) + " change points detected, " + std::to_string(rising.size()) +
                   " in the rising stage");
    if (rising.empty()) throw InputError("no rising change points detected; configure anchors explicitly");
    // outcome aligned with the trimmed stream
    std::vector<double> aligned(outcome.begin() + static_cast<std::ptrdiff_t>(lo),
                                outcome.begin() + static_cast<std::ptrdiff_t>(hi));
    return promote_outbreaks(rising, aligned, det.promotion, diag);
}

double resolve_threshold(const PolicySpec& policy, const PanelDataset& panel, Date reference_anchor) {
    if (policy.threshold) return *policy.threshold;
    const std::size_t v = panel.require_variable(policy.code);
    const auto d = panel.date_index(reference_anchor);
    if (!d) throw InputError("anchor " + reference_anchor.to_string() + " is outside the panel");
    std::vector<double> values;
    for (std::size_t c = 0; c < panel.countries().size(); ++c)
        if (auto x = panel.value(c, *d, v)) values.push_back(*x);
    if (values.empty()) throw InputError("policy " + policy.code + " unobserved at " + reference_anchor.to_string());
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    const double median = m % 2 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
    return std::floor(median);
}

GridCell evaluate_cell(const EvaluationConfig& cfg, const PanelDataset& panel, const CovariateTable& covs,
                       const std::string& policy, double threshold, Date anchor) {
    GridCell cell;
    cell.policy = policy;
    cell.anchor = anchor;
    cell.threshold = threshold;
    try {
        const Window window = extract_window(panel, anchor, cfg.outcome);
        TreatmentAssignment assignment;
        try {
            assignment = assign_treatment(panel, covs, policy, anchor, threshold, &window.countries);
        } catch (const DegenerateSplit& e) {
            cell.status = CellStatus::skipped;
            cell.n_control = e.n_control;
            cell.n_treated = e.n_treated;
            cell.reason = e.what();
            return cell;
        }
        cell.n_control = assignment.control.size();
        cell.n_treated = assignment.treated.size();
        if (cell.n_control < cfg.min_group_size || cell.n_treated < cfg.min_group_size) {
            cell.status = CellStatus::skipped;
            cell.reason = "fewer than " + std::to_string(cfg.min_group_size) + " countries in a group (" +
                          std::to_string(cell.n_control) + " control, " + std::to_string(cell.n_treated) +
                          " treated)";
            return cell;
        }

        std::vector<LabeledCovariates> labeled;
        for (const auto& c : assignment.control) labeled.push_back({covs.at(c), 0});
        for (const auto& t : assignment.treated) labeled.push_back({covs.at(t), 1});
        const PropensityModel model = fit_propensity(labeled, cfg.logistic);
        for (const auto& c : assignment.control) cell.scores[c] = predict_propensity(model, covs.at(c));
        for (const auto& t : assignment.treated) cell.scores[t] = predict_propensity(model, covs.at(t));

        const MatchResult match = optimal_pair_match(assignment, cell.scores, cfg.matching);
        cell.n_pairs = match.pairs.size();
        const DidDesign design = build_design(window, match);
        DidFit fit = fit_ols(design, cfg.inference);
        cell.orthogonality = residual_orthogonality(design, fit);
        cell.fit = std::move(fit);
        cell.assignment = std::move(assignment);
        cell.match = match;
        cell.status = CellStatus::fitted;
    } catch (const std::exception& e) {
        cell.status = CellStatus::failed;
        cell.reason = e.what();
        cell.fit.reset();
    }
    return cell;
}

std::vector<GridCell> run_grid(const EvaluationConfig& cfg, const PanelDataset& panel, const CovariateTable& covs,
                               const std::vector<OutbreakPoint>& anchors) {
    cfg.validate(panel);
    if (anchors.empty()) throw InputError("no anchors to evaluate");
    Date reference = anchors.front().anchor_date;
    for (const auto& a : anchors) reference = std::min(reference, a.anchor_date);

    struct Task {
        std::string policy;
        double threshold;
        Date anchor;
    };
    std::vector<Task> tasks;
    std::vector<GridCell> cells;
    for (const auto& p : cfg.policies) {
        double threshold = 0.0;
        std::string threshold_error;
        try {
            threshold = resolve_threshold(p, panel, reference);
        } catch (const std::exception& e) {
            threshold_error = e.what();
        }
        for (const auto& a : anchors) {
            if (!threshold_error.empty()) {
                GridCell failed;
                failed.policy = p.code;
                failed.anchor = a.anchor_date;
                failed.reason = threshold_error;
                cells.push_back(std::move(failed));
                tasks.push_back({"", 0.0, a.anchor_date});
                continue;
            }
            cells.emplace_back();
            tasks.push_back({p.code, threshold, a.anchor_date});
        }
    }

    unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t begin = 0; begin < tasks.size(); begin += workers) {
        const std::size_t end = std::min(tasks.size(), begin + workers);
        std::vector<std::future<GridCell>> running;
        for (std::size_t i = begin; i < end; ++i) {
            if (tasks[i].policy.empty()) continue;
            running.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, [&, i] {
                return evaluate_cell(cfg, panel, covs, tasks[i].policy, tasks[i].threshold, tasks[i].anchor);
            }));
        }
        std::size_t next = 0;
        for (std::size_t i = begin; i < end; ++i)
            if (!tasks[i].policy.empty()) cells[i] = running[next++].get();
    }
    return cells;
}

std::vector<PolicyRank> rank_policies(const std::vector<GridCell>& cells) {
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto& c : cells) {
        if (c.status != CellStatus::fitted || !c.fit || !c.fit->cr) continue;
        auto& a = acc[c.policy];
        a.first += *c.fit->cr;
        a.second += 1;
    }
    std::vector<PolicyRank> out;
    for (const auto& [policy, a] : acc) out.push_back({policy, a.first / static_cast<double>(a.second), a.second});
    std::stable_sort(out.begin(), out.end(), [](const PolicyRank& a, const PolicyRank& b) {
        if (a.mean_cr != b.mean_cr) return a.mean_cr > b.mean_cr;
        return a.policy < b.policy;
    });
    return out;
}

CellText format_cell(const GridCell& cell) {
    if (cell.status == CellStatus::skipped) return {"/", "", ""};
    if (cell.status == CellStatus::failed || !cell.fit) return {"error", "", ""};
    const auto& f = *cell.fit;
    CellText t;
    t.estimate = csv::format_fixed(f.beta[4], 4) + f.stars[4];
    t.se = "(" + csv::format_fixed(f.se[4], 4) + ")";
    t.cr = f.cr ? csv::format_fixed(*f.cr, 2) + "%" : "n/a (non-rising baseline)";
    return t;
}

std::string render_table(const std::vector<GridCell>& cells) {
    std::vector<std::string> policies;
    std::vector<Date> anchors;
    for (const auto& c : cells) {
        if (std::find(policies.begin(), policies.end(), c.policy) == policies.end()) policies.push_back(c.policy);
        if (std::find(anchors.begin(), anchors.end(), c.anchor) == anchors.end()) anchors.push_back(c.anchor);
    }
    auto find = [&](const std::string& p, Date a) -> const GridCell* {
        for (const auto& c : cells)
            if (c.policy == p && c.anchor == a) return &c;
        return nullptr;
    };
    constexpr int kWidth = 27;
    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w) s.append(w - s.size(), ' ');
        return s;
    };
    std::ostringstream out;
    out << pad("Policy", 8);
    for (Date a : anchors) out << pad(a.to_string(), kWidth);
    out << '\n';
    for (const auto& p : policies) {
        std::vector<CellText> texts;
        for (Date a : anchors) {
            const GridCell* c = find(p, a);
            texts.push_back(c ? format_cell(*c) : CellText{"", "", ""});
        }
        out << pad(p, 8);
        for (const auto& t : texts) out << pad(t.estimate, kWidth);
        out << '\n' << pad("", 8);
        for (const auto& t : texts) out << pad(t.se, kWidth);
        out << '\n' << pad("", 8);
        for (const auto& t : texts) out << pad(t.cr, kWidth);
        out << "\n\n";
    }
    return out.str();
}

namespace {

std::string status_text(CellStatus s) {
    switch (s) {
        case CellStatus::fitted: return "fitted";
        case CellStatus::skipped: return "skipped";
        case CellStatus::failed: return "failed";
    }
    return "failed";
}

}  // namespace

void write_grid_csv(const std::vector<GridCell>& cells, std::ostream& out) {
    out << "policy,anchor,threshold,status,n_control,n_treated,n_pairs,beta4,se4,t4,p4,stars,cr,display,reason\n";
    for (const auto& c : cells) {
        const auto text = format_cell(c);
        out << c.policy << ',' << c.anchor.to_string() << ',' << csv::format_double(c.threshold) << ','
            << status_text(c.status) << ',' << c.n_control << ',' << c.n_treated << ',' << c.n_pairs << ',';
        if (c.fit) {
            const auto& f = *c.fit;
            out << csv::format_fixed(f.beta[4], 4) << ',' << csv::format_fixed(f.se[4], 4) << ','
                << csv::format_fixed(f.t_stats[4], 4) << ',' << csv::format_fixed(f.p_values[4], 4) << ','
                << f.stars[4] << ',' << (f.cr ? csv::format_fixed(*f.cr, 2) : "NA");
        } else {
            out << ",,,,,";
        }
        out << ',' << csv::escape(text.estimate) << ',' << csv::escape(c.reason) << '\n';
    }
}

void write_grid_json(const std::vector<GridCell>& cells, const std::vector<PolicyRank>& ranking,
                     const std::vector<OutbreakPoint>& anchors, std::ostream& out) {
    using nlohmann::ordered_json;
    ordered_json root;
    root["anchors"] = ordered_json::array();
    for (const auto& a : anchors)
        root["anchors"].push_back({{"date", a.anchor_date.to_string()},
                                   {"source", a.source == OutbreakSource::detected ? "detected" : "configured"}});
    root["cells"] = ordered_json::array();
    for (const auto& c : cells) {
        ordered_json j;
        j["policy"] = c.policy;
        j["anchor"] = c.anchor.to_string();
        j["threshold"] = c.threshold;
        j["status"] = status_text(c.status);
        j["n_control"] = c.n_control;
        j["n_treated"] = c.n_treated;
        j["n_pairs"] = c.n_pairs;
        if (c.fit) {
            const auto& f = *c.fit;
            j["beta"] = f.beta;
            j["se"] = f.se;
            j["t"] = f.t_stats;
            j["p"] = f.p_values;
            j["stars"] = f.stars[4];
            j["cr"] = f.cr ? ordered_json(*f.cr) : ordered_json(nullptr);
            j["n"] = f.n;
            j["residual_orthogonality"] = c.orthogonality;
        }
        const auto text = format_cell(c);
        j["display"] = {text.estimate, text.se, text.cr};
        if (!c.reason.empty()) j["reason"] = c.reason;
        root["cells"].push_back(std::move(j));
    }
    root["ranking"] = ordered_json::array();
    for (const auto& r : ranking)
        root["ranking"].push_back({{"policy", r.policy}, {"mean_cr", r.mean_cr}, {"cells", r.cells}});
    out << root.dump(2) << '\n';
}

}  // namespace psmdid
