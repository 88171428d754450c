// psmdid command-line interface.
//
//   psmdid ingest       validate a panel, write summary/correlation/steam-plot data
//   psmdid changepoints detect change points in an R stream
//   psmdid match        treatment split, propensity scores, optimal pairs, balance
//   psmdid did          fit the piecewise-linear DID model on matched pairs
//   psmdid evaluate     full policy x anchor grid
//   psmdid simulate     synthetic panels and the naive vs matched bias study
//
// Exit codes: 0 success, 1 fatal input error, 2 grid finished with failed cells.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "psmdid/changepoint.hpp"
#include "psmdid/config.hpp"
#include "psmdid/csv.hpp"
#include "psmdid/did.hpp"
#include "psmdid/panel.hpp"
#include "psmdid/pipeline.hpp"
#include "psmdid/psm.hpp"
#include "psmdid/synth.hpp"

namespace fs = std::filesystem;
using namespace psmdid;

namespace {

struct CommonArgs {
    std::string config;
    std::string out = "out";
};

KeyValueConfig load_config(const CommonArgs& args) {
    if (args.config.empty()) return KeyValueConfig{};
    return KeyValueConfig::load(args.config);
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) throw InputError("cannot write " + (dir / name).string());
    return out;
}

void print_warnings(const Diagnostics& diag) {
    for (const auto& w : diag.warnings) std::cerr << "warning: " << w << '\n';
}

std::string require(const KeyValueConfig& kv, const std::string& key) {
    auto v = kv.get(key);
    if (!v || v->empty()) throw InputError("missing required setting '" + key + "'");
    return *v;
}

int run_ingest(const CommonArgs& args) {
    const auto kv = load_config(args);
    auto cfg = EvaluationConfig::from_config(kv);
    if (cfg.panel_path.empty()) throw InputError("missing required setting 'panel'");
    Diagnostics diag;
    PanelDataset panel = load_panel(cfg.panel_path.string(), default_schema(), &diag);
    if (!cfg.countries.empty()) panel = panel.select_countries(cfg.countries);
    panel = impute_forward(panel, cfg.max_gap);

    const fs::path out(args.out);
    const auto summary = summarize(panel);
    write_summary_csv(summary, std::cout);
    {
        auto f = open_output(out, "summary.csv");
        write_summary_csv(summary, f);
    }
    std::vector<std::string> policies;
    for (const auto& v : panel.variables())
        if (v.kind == VariableKind::policy) policies.push_back(v.name);
    {
        auto f = open_output(out, "correlation.csv");
        write_correlation_csv(correlation_matrix(panel, policies), f);
    }
    {
        // per-date cross-country means of each policy indicator
        auto f = open_output(out, "policy_trends.csv");
        f << "date";
        for (const auto& p : policies) f << ',' << p;
        f << '\n';
        std::vector<std::vector<double>> means;
        for (const auto& p : policies) means.push_back(cross_country_mean(panel, p));
        for (std::size_t d = 0; d < panel.num_dates(); ++d) {
            f << panel.date_at(d).to_string();
            for (const auto& m : means) f << ',' << (std::isnan(m[d]) ? "NA" : csv::format_double(m[d]));
            f << '\n';
        }
    }
    if (!cfg.covariates_path.empty()) {
        const auto covs = load_covariates(cfg.covariates_path.string(), &diag);
        std::vector<std::pair<double, std::string>> by_pop;
        for (const auto& c : panel.countries())
            if (auto it = covs.find(c); it != covs.end()) by_pop.emplace_back(-it->second.population, c);
        std::sort(by_pop.begin(), by_pop.end());
        std::vector<std::string> top;
        for (std::size_t i = 0; i < std::min<std::size_t>(10, by_pop.size()); ++i) top.push_back(by_pop[i].second);
        if (top.size() >= 2) {
            auto f = open_output(out, "steam.csv");
            write_centered_csv(center_by_date(panel, cfg.outcome, top), f);
        }
    }
    {
        auto f = open_output(out, "panel_clean.csv");
        write_panel_long(panel, f);
    }
    print_warnings(diag);
    return 0;
}

std::vector<std::pair<Date, double>> read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open series file '" + path + "'");
    csv::Reader reader(in);
    std::vector<std::string> row;
    if (!reader.next(row)) throw InputError("series file: no data rows");
    std::vector<std::pair<Date, double>> out;
    while (reader.next(row)) {
        if (row.size() < 2) throw InputError("series file line " + std::to_string(reader.line()) + ": expected date,value");
        try {
            out.emplace_back(Date::parse(row[0]), csv::parse_double(row[1]));
        } catch (const std::invalid_argument& e) {
            throw InputError("series file line " + std::to_string(reader.line()) + ": " + e.what());
        }
    }
    for (std::size_t i = 1; i < out.size(); ++i)
        if (days_between(out[i - 1].first, out[i].first) != 1)
            throw InputError("series file: dates must be consecutive days");
    if (out.empty()) throw InputError("series file: no data rows");
    return out;
}

void write_changepoints_csv(const std::vector<ChangePoint>& points, std::ostream& out) {
    out << "index,date,direction,statistic\n";
    for (const auto& p : points)
        out << p.index << ',' << p.date.to_string() << ',' << to_string(p.direction) << ','
            << csv::format_double(p.statistic) << '\n';
}

int run_changepoints(const CommonArgs& args, const std::string& series_path) {
    const auto kv = load_config(args);
    auto cfg = EvaluationConfig::from_config(kv);
    const fs::path out(args.out);
    Diagnostics diag;
    if (!series_path.empty()) {
        const auto series = read_series_csv(series_path);
        std::vector<double> values;
        for (const auto& s : series) values.push_back(s.second);
        const auto points = detect(values, cfg.detection.detector, series.front().first);
        auto f = open_output(out, "changepoints.csv");
        write_changepoints_csv(points, f);
        auto r = open_output(out, "rising.csv");
        write_changepoints_csv(filter_rising(points, values, cfg.detection.rising_window), r);
        write_changepoints_csv(points, std::cout);
        return 0;
    }
    if (cfg.panel_path.empty()) throw InputError("give --series or a config with 'panel'");
    PanelDataset panel = load_panel(cfg.panel_path.string(), default_schema(), &diag);
    if (!cfg.countries.empty()) panel = panel.select_countries(cfg.countries);
    auto series = cross_country_mean(panel, cfg.detection.series_variable);
    if (cfg.detection.country) {
        auto c = panel.country_index(*cfg.detection.country);
        if (!c) throw InputError("detector.country not in panel");
        auto s = panel.series(*c, panel.require_variable(cfg.detection.series_variable));
        series.assign(s.begin(), s.end());
    }
    std::size_t lo = 0;
    while (lo < series.size() && std::isnan(series[lo])) ++lo;
    std::size_t hi = series.size();
    while (hi > lo && std::isnan(series[hi - 1])) --hi;
    std::vector<double> stream(series.begin() + static_cast<std::ptrdiff_t>(lo),
                               series.begin() + static_cast<std::ptrdiff_t>(hi));
    const auto points = detect(stream, cfg.detection.detector, panel.date_at(lo));
    {
        auto f = open_output(out, "changepoints.csv");
        write_changepoints_csv(points, f);
        auto r = open_output(out, "rising.csv");
        write_changepoints_csv(filter_rising(points, stream, cfg.detection.rising_window), r);
    }
    write_changepoints_csv(points, std::cout);
    EvaluationConfig detect_cfg = cfg;
    detect_cfg.anchors.clear();
    const auto anchors = resolve_anchors(detect_cfg, panel, &diag);
    auto f = open_output(out, "outbreaks.csv");
    f << "anchor_date,source,ncsm_slope\n";
    for (const auto& a : anchors)
        f << a.anchor_date.to_string() << ",detected," << (a.ncsm_slope ? csv::format_double(*a.ncsm_slope) : "")
          << '\n';
    print_warnings(diag);
    return 0;
}

void write_match_outputs(const fs::path& out, const TreatmentAssignment& a, const CovariateTable& covs,
                         const std::map<std::string, double>& scores, const MatchResult& m, const Window* window) {
    {
        auto f = open_output(out, "pairs.csv");
        write_pairs_csv(m, f);
    }
    {
        auto f = open_output(out, "scores.csv");
        write_scores_csv(a, scores, f);
    }
    {
        auto f = open_output(out, "balance.csv");
        write_balance_csv(balance_report(a, covs, m), f);
    }
    {
        auto f = open_output(out, "propensity_hist.csv");
        write_histogram_csv(propensity_histogram(a, scores, m), f);
    }
    if (window) {
        auto f = open_output(out, "window.csv");
        write_window_csv(*window, f);
    }
}

int run_match(const CommonArgs& args, std::string policy, std::string anchor_text, std::optional<double> threshold) {
    auto kv = load_config(args);
    auto cfg = EvaluationConfig::from_config(kv);
    if (policy.empty()) policy = require(kv, "match.policy");
    if (anchor_text.empty()) anchor_text = require(kv, "match.anchor");
    if (!threshold && kv.has("match.threshold")) threshold = kv.number_or("match.threshold", 0);
    const Date anchor = Date::parse(anchor_text);

    auto inputs = load_inputs(cfg);
    const double thr = resolve_threshold({policy, threshold}, inputs.panel, anchor);
    const Window window = extract_window(inputs.panel, anchor, cfg.outcome);
    for (const auto& d : window.dropped) inputs.diagnostics.warn(d + " dropped: incomplete " + cfg.outcome + " window");
    const auto assignment = assign_treatment(inputs.panel, inputs.covariates, policy, anchor, thr, &window.countries);

    std::vector<LabeledCovariates> labeled;
    for (const auto& c : assignment.control) labeled.push_back({inputs.covariates.at(c), 0});
    for (const auto& t : assignment.treated) labeled.push_back({inputs.covariates.at(t), 1});
    const auto model = fit_propensity(labeled, cfg.logistic, &inputs.diagnostics);
    std::map<std::string, double> scores;
    for (const auto& c : assignment.control) scores[c] = predict_propensity(model, inputs.covariates.at(c));
    for (const auto& t : assignment.treated) scores[t] = predict_propensity(model, inputs.covariates.at(t));
    const auto match = optimal_pair_match(assignment, scores, cfg.matching, &inputs.diagnostics);

    write_match_outputs(args.out, assignment, inputs.covariates, scores, match, &window);
    std::cout << policy << " at " << anchor.to_string() << " (threshold " << csv::format_double(thr) << "): "
              << assignment.control.size() << " control, " << assignment.treated.size() << " treated, "
              << match.pairs.size() << " pairs, total distance " << csv::format_double(match.total_distance)
              << '\n';
    print_warnings(inputs.diagnostics);
    return 0;
}

int run_did(const CommonArgs& args, std::string pairs_path, std::string window_path) {
    auto kv = load_config(args);
    auto cfg = EvaluationConfig::from_config(kv);
    if (pairs_path.empty()) pairs_path = require(kv, "did.pairs");
    if (window_path.empty()) window_path = require(kv, "did.window");
    std::ifstream pin(pairs_path);
    if (!pin) throw InputError("cannot open pairs file '" + pairs_path + "'");
    std::ifstream win(window_path);
    if (!win) throw InputError("cannot open window file '" + window_path + "'");
    const MatchResult pairs = read_pairs_csv(pin);
    const Window window = read_window_csv(win);
    const DidDesign design = build_design(window, pairs);
    const DidFit fit = fit_ols(design, cfg.inference);
    const fs::path out(args.out);
    {
        auto f = open_output(out, "fit.json");
        write_fit_json(fit, f);
    }
    {
        auto f = open_output(out, "fitted_lines.csv");
        write_fitted_lines_csv(fitted_lines(fit), f);
    }
    write_fit_json(fit, std::cout);
    return 0;
}

int run_evaluate(const CommonArgs& args) {
    const auto kv = load_config(args);
    const auto cfg = EvaluationConfig::from_config(kv);
    if (cfg.panel_path.empty() || cfg.covariates_path.empty())
        throw InputError("evaluate needs 'panel' and 'covariates' settings");
    if (cfg.policies.empty()) throw InputError("evaluate needs a 'policies' setting");
    auto inputs = load_inputs(cfg);
    const auto anchors = resolve_anchors(cfg, inputs.panel, &inputs.diagnostics);
    const auto cells = run_grid(cfg, inputs.panel, inputs.covariates, anchors);
    const auto ranking = rank_policies(cells);

    const fs::path out(args.out);
    {
        auto f = open_output(out, "report.json");
        write_grid_json(cells, ranking, anchors, f);
    }
    {
        auto f = open_output(out, "report.csv");
        write_grid_csv(cells, f);
    }
    const std::string table = render_table(cells);
    {
        auto f = open_output(out, "report.txt");
        f << table;
    }
    {
        auto f = open_output(out, "ranking.csv");
        f << "rank,policy,mean_cr,cells\n";
        for (std::size_t i = 0; i < ranking.size(); ++i)
            f << (i + 1) << ',' << ranking[i].policy << ',' << csv::format_fixed(ranking[i].mean_cr, 2) << ','
              << ranking[i].cells << '\n';
    }
    bool any_failed = false;
    for (const auto& c : cells) {
        if (c.status == CellStatus::failed) {
            any_failed = true;
            std::cerr << "cell " << c.policy << " " << c.anchor.to_string() << " failed: " << c.reason << '\n';
        }
        if (c.status != CellStatus::fitted) continue;
        const fs::path dir = out / "cells" / (c.policy + "_" + c.anchor.to_string());
        write_match_outputs(dir, *c.assignment, inputs.covariates, c.scores, *c.match, nullptr);
        auto f = open_output(dir, "fitted_lines.csv");
        write_fitted_lines_csv(fitted_lines(*c.fit), f);
    }
    std::cout << table;
    print_warnings(inputs.diagnostics);
    return any_failed ? 2 : 0;
}

int run_simulate(const CommonArgs& args) {
    const auto kv = load_config(args);
    SynthSpec spec;
    spec.n_control = static_cast<std::size_t>(kv.integer_or("synth.n_control", static_cast<long>(spec.n_control)));
    spec.n_treated = static_cast<std::size_t>(kv.integer_or("synth.n_treated", static_cast<long>(spec.n_treated)));
    if (auto beta = kv.list("synth.beta"); !beta.empty()) {
        if (beta.size() != kDidParams) throw InputError("synth.beta needs five values");
        for (std::size_t i = 0; i < kDidParams; ++i) spec.true_beta[i] = csv::parse_double(beta[i]);
    }
    spec.noise_sd = kv.number_or("synth.noise_sd", spec.noise_sd);
    spec.confounding_strength = kv.number_or("synth.confounding_strength", spec.confounding_strength);
    spec.outcome_confounding = kv.number_or("synth.outcome_confounding", spec.outcome_confounding);
    spec.seed = static_cast<std::uint64_t>(kv.integer_or("synth.seed", static_cast<long>(spec.seed)));
    const auto replications = static_cast<std::size_t>(kv.integer_or("synth.replications", 200));
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }

    const fs::path out(args.out);
    const SynthData data = generate(spec);
    {
        auto f = open_output(out, "panel.csv");
        write_panel_long(data.panel, f);
    }
    {
        auto f = open_output(out, "covariates.csv");
        write_covariates_csv(data.covariates, f);
    }
    {
        auto f = open_output(out, "assignment.csv");
        write_assignment_csv(data.truth, f);
    }
    const BiasStudy study = bias_study(spec, replications);
    {
        auto f = open_output(out, "bias_study.csv");
        write_bias_study_csv(study, f);
    }
    write_bias_study_csv(study, std::cout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PSM-DID policy evaluation toolkit"};
    app.require_subcommand(1);

    CommonArgs common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "key = value configuration file");
        sub->add_option("--out", common.out, "output directory")->capture_default_str();
    };

    auto* ingest = app.add_subcommand("ingest", "validate a panel and write snapshot statistics");
    add_common(ingest);

    std::string series_path;
    auto* changepoints = app.add_subcommand("changepoints", "sequential change-point detection");
    add_common(changepoints);
    changepoints->add_option("--series", series_path, "CSV with date,value columns");

    std::string policy, anchor;
    std::optional<double> threshold;
    auto* match = app.add_subcommand("match", "propensity score matching at one anchor");
    add_common(match);
    match->add_option("--policy", policy, "policy code, e.g. C3");
    match->add_option("--anchor", anchor, "anchor date YYYY-MM-DD");
    match->add_option("--threshold", threshold, "treated when the policy value exceeds this");

    std::string pairs_path, window_path;
    auto* did = app.add_subcommand("did", "fit the DID model on matched pairs");
    add_common(did);
    did->add_option("--pairs", pairs_path, "pairs CSV from 'match'");
    did->add_option("--window", window_path, "window CSV from 'match'");

    auto* evaluate = app.add_subcommand("evaluate", "full policy x anchor grid");
    add_common(evaluate);

    auto* simulate = app.add_subcommand("simulate", "synthetic data and bias study");
    add_common(simulate);

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return run_ingest(common);
        if (changepoints->parsed()) return run_changepoints(common, series_path);
        if (match->parsed()) return run_match(common, policy, anchor, threshold);
        if (did->parsed()) return run_did(common, pairs_path, window_path);
        if (evaluate->parsed()) return run_evaluate(common);
        if (simulate->parsed()) return run_simulate(common);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
