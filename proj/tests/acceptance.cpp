// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 1 2 9      run the listed criteria only
//
// Exit status is 0 only when every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "psmdid/changepoint.hpp"
#include "psmdid/config.hpp"
#include "psmdid/csv.hpp"
#include "psmdid/did.hpp"
#include "psmdid/pipeline.hpp"
#include "psmdid/psm.hpp"
#include "psmdid/synth.hpp"

namespace fs = std::filesystem;
using namespace psmdid;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
    std::vector<std::string> notes;  // printed indented under the verdict line
};

std::string fmt(double v, int decimals = 4) { return csv::format_fixed(v, decimals); }

// ---------------------------------------------------------------- 1

Verdict matching_optimality() {
    std::mt19937_64 rng(20240101);
    std::size_t agree = 0, swapped = 0;
    const std::size_t instances = 100;
    std::vector<std::string> notes;
    for (std::size_t i = 0; i < instances; ++i) {
        const std::size_t nc = 1 + rng() % 6, nt = 1 + rng() % 9;
        const auto inst = oracle::random_matching_instance(rng, nc, nt);
        TreatmentAssignment a;
        a.control = inst.control;
        a.treated = inst.treated;
        const auto r = optimal_pair_match(a, inst.scores);
        const auto ref = oracle::enumerate_matching(inst);
        swapped += r.roles_swapped;
        if (r.total_distance == ref.total)
            ++agree;
        else
            notes.push_back("instance " + std::to_string(i) + ": " + csv::format_double(r.total_distance) +
                            " vs enumeration " + csv::format_double(ref.total));
    }
    return {agree == instances,
            std::to_string(agree) + "/" + std::to_string(instances) +
                " totals equal the exhaustive minimum (" + std::to_string(swapped) + " with more controls)",
            notes};
}

// ---------------------------------------------------------------- 2

Verdict logistic_oracle() {
    std::mt19937_64 rng(20240202);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u(0, 1);
    const int instances = 50;
    int agree = 0, separated = 0;
    double worst_diff = 0.0, worst_grad = 0.0;
    std::vector<std::string> notes;
    for (int inst = 0; inst < instances; ++inst) {
        std::vector<LabeledCovariates> data;
        std::size_t ones = 0;
        do {
            data.clear();
            ones = 0;
            for (int i = 0; i < 30; ++i) {
                MacroCovariates m;
                m.population = 1e7 * std::exp(n01(rng));
                m.population_density = 100 * std::exp(0.8 * n01(rng));
                m.aged_65_older = 18 + 3 * n01(rng);
                m.gdp_per_capita = 35000 * std::exp(0.4 * n01(rng));
                m.cardiovasc_death_rate = 250 * std::exp(0.4 * n01(rng));
                m.diabetes_prevalence = 6 + 1.5 * std::fabs(n01(rng));
                m.hospital_beds_per_thousand = 5 * std::exp(0.35 * n01(rng));
                m.life_expectancy = 80 + 2.5 * n01(rng);
                m.human_development_index = 0.85 + 0.04 * std::tanh(n01(rng));
                const double eta = 0.5 * std::log(m.population / 1e7) - 0.3 * (m.aged_65_older - 18) / 3;
                const int label = u(rng) < 1 / (1 + std::exp(-eta)) ? 1 : 0;
                ones += static_cast<std::size_t>(label);
                data.push_back({m, label});
            }
        } while (ones < 3 || ones > 27);

        const auto model = fit_propensity(data);
        Eigen::MatrixXd x(30, 9);
        Eigen::VectorXd y(30);
        for (int i = 0; i < 30; ++i) {
            const auto a = data[i].covariates.to_array();
            for (int j = 0; j < 9; ++j) x(i, j) = a[j];
            y[i] = data[i].label;
        }
        const Eigen::VectorXd ref = oracle::irls_logistic(oracle::standardize(x), y, 1e-6);
        double diff = std::fabs(model.intercept - ref[0]);
        for (int j = 0; j < 9; ++j) diff = std::max(diff, std::fabs(model.coefficients[j] - ref[j + 1]));
        worst_diff = std::max(worst_diff, diff);
        worst_grad = std::max(worst_grad, model.gradient_max_norm);
        // separated samples are reported as not converged by design; the
        // penalized optimum must still be reached
        const bool ok = (model.converged || model.separation) && model.gradient_max_norm < 1e-8 && diff < 1e-6;
        separated += model.separation;
        agree += ok;
        if (!ok)
            notes.push_back("instance " + std::to_string(inst) + ": converged=" + (model.converged ? "yes" : "no") +
                            " separation=" + (model.separation ? "yes" : "no") + " max diff " +
                            csv::format_double(diff) + " gradient " + csv::format_double(model.gradient_max_norm));
    }
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "%d/%d within 1e-6 of IRLS at a stationary point (max diff %.2e, max gradient %.2e, %d flagged "
                  "as separated)",
                  agree, instances, worst_diff, worst_grad, separated);
    return {agree == instances, buf, notes};
}

// ---------------------------------------------------------------- 3

Verdict rank_statistic() {
    std::mt19937_64 rng(20240303);
    std::normal_distribution<double> n01;
    const int instances = 200;
    int good = 0;
    std::size_t splits = 0;
    for (int inst = 0; inst < instances; ++inst) {
        const std::size_t n = 4 + rng() % 47;  // 4..50
        std::vector<double> x(n);
        const bool ties = inst % 2 == 0;
        for (auto& v : x) v = ties ? static_cast<double>(rng() % 7) : n01(rng);
        std::vector<double> ex(n), aff(n);
        for (std::size_t i = 0; i < n; ++i) {
            ex[i] = std::exp(x[i]);
            aff[i] = 2.5 * x[i] + 4.0;
        }
        bool ok = true;
        for (std::size_t k = 1; k < n; ++k) {
            ++splits;
            const auto s = mann_whitney_split(x, k);
            ok = ok && s.u == oracle::pair_count_u(x, k);
            ok = ok && mann_whitney_split(ex, k).standardized == s.standardized;
            ok = ok && mann_whitney_split(aff, k).standardized == s.standardized;
            ok = ok && mann_whitney_split(ex, k).u == s.u;
        }
        // the streaming detector keeps the same U for every split
        MannWhitneyCpm cpm;
        for (double v : x) cpm.push(v);
        const auto scan = cpm.push(x.front());
        std::vector<double> extended = x;
        extended.push_back(x.front());
        double best = 0.0;
        for (std::size_t k = 1; k < extended.size(); ++k)
            best = std::max(best, std::fabs(mann_whitney_split(extended, k).standardized));
        ok = ok && std::fabs(scan.max_abs - best) <= 1e-12 * std::max(1.0, best);
        good += ok;
    }
    return {good == instances,
            std::to_string(good) + "/" + std::to_string(instances) + " series (" + std::to_string(splits) +
                " splits) match pair counting and are invariant under exp and affine maps",
            {}};
}

// ---------------------------------------------------------------- 4, 5

struct Replicate {
    DidFit naive;
    DidFit matched;
};

Replicate run_replicate(const SynthSpec& spec) {
    const SynthData data = generate(spec);
    const Window window = extract_window(data.panel, data.anchor, kSynthOutcome);
    Replicate r{fit_ols(build_design(window, data.truth.control, data.truth.treated)), {}};
    std::vector<LabeledCovariates> labeled;
    for (const auto& c : data.truth.control) labeled.push_back({data.covariates.at(c), 0});
    for (const auto& t : data.truth.treated) labeled.push_back({data.covariates.at(t), 1});
    const auto model = fit_propensity(labeled);
    std::map<std::string, double> scores;
    for (const auto& [code, cov] : data.covariates) scores[code] = predict_propensity(model, cov);
    const auto match = optimal_pair_match(data.truth, scores);
    if (match.pairs.size() != spec.n_control) throw std::logic_error("unexpected pair count");
    r.matched = fit_ols(build_design(window, match));
    return r;
}

Verdict synthetic_recovery() {
    SynthSpec spec;  // beta = (50, 1, 5, 3, -2): b1 + b3 = 4, true ratio 50%
    spec.outcome_confounding = 0.0;  // outcomes follow the five-coefficient model exactly
    const int reps = 200;
    int covered = 0;
    double cr_sum = 0.0;
    int cr_n = 0;
    for (int r = 0; r < reps; ++r) {
        spec.seed = replication_seed(4004, static_cast<std::uint64_t>(r));
        const auto fit = run_replicate(spec).matched;
        covered += std::fabs(fit.beta[4] - spec.true_beta[4]) <= 3.0 * fit.se[4];
        if (fit.cr) {
            cr_sum += *fit.cr;
            ++cr_n;
        }
    }
    const double share = static_cast<double>(covered) / reps;
    const double mean_cr = cr_n ? cr_sum / cr_n : std::nan("");
    return {share >= 0.95 && mean_cr >= 48.0 && mean_cr <= 52.0,
            "b4 within 3 se in " + fmt(100 * share, 1) + "% of " + std::to_string(reps) +
                " seeds (10 pairs each); mean CR " + fmt(mean_cr, 3) + "%",
            {}};
}

Verdict bias_reduction() {
    SynthSpec spec;  // default confounded design
    spec.seed = 5005;
    const auto study = bias_study(spec, 200);
    const bool pass = std::fabs(study.matched.bias) < std::fabs(study.naive.bias);
    return {pass,
            "|bias| PSM-DID " + fmt(std::fabs(study.matched.bias)) + " vs naive " +
                fmt(std::fabs(study.naive.bias)) + " over 200 replications",
            {"naive: mean " + fmt(study.naive.mean_estimate) + ", sd " + fmt(study.naive.sd) + ", 2se coverage " +
                 fmt(study.naive.coverage, 3),
             "PSM-DID: mean " + fmt(study.matched.mean_estimate) + ", sd " + fmt(study.matched.sd) +
                 ", 2se coverage " + fmt(study.matched.coverage, 3)}};
}

// ---------------------------------------------------------------- 6

struct InvariantTally {
    int fits = 0;
    int failures = 0;
    std::vector<std::string> notes;
    void check(bool ok, const std::string& what) {
        if (!ok) {
            ++failures;
            if (notes.size() < 10) notes.push_back(what);
        }
    }
};

void check_invariants(const DidDesign& d, const std::string& label, InvariantTally& tally) {
    const auto base = fit_ols(d);
    ++tally.fits;
    tally.check(residual_orthogonality(d, base) < 1e-7, label + ": residual orthogonality");

    auto transformed = [&](double k, double c) {
        DidDesign out = d;
        for (auto& o : out.observations) o.y = k * o.y + c;
        return fit_ols(out);
    };
    const double c = 123.25;
    const auto shifted = transformed(1.0, c);
    tally.check(std::fabs(shifted.beta[0] - base.beta[0] - c) < 1e-9 * std::max(1.0, std::fabs(base.beta[0] + c)),
                label + ": shift intercept");
    for (int j = 1; j < 5; ++j) {
        tally.check(std::fabs(shifted.beta[j] - base.beta[j]) < 1e-9, label + ": shift beta");
        tally.check(std::fabs(shifted.se[j] - base.se[j]) < 1e-9, label + ": shift se");
        tally.check(std::fabs(shifted.p_values[j] - base.p_values[j]) < 1e-9, label + ": shift p");
    }
    const double k = 7.5;
    const auto scaled = transformed(k, 0.0);
    for (int j = 0; j < 5; ++j) {
        tally.check(std::fabs(scaled.beta[j] - k * base.beta[j]) < 1e-9 * std::max(1.0, std::fabs(k * base.beta[j])),
                    label + ": scale beta");
        tally.check(std::fabs(scaled.se[j] - k * base.se[j]) < 1e-9 * std::max(1.0, k * base.se[j]),
                    label + ": scale se");
        tally.check(std::fabs(scaled.t_stats[j] - base.t_stats[j]) < 1e-9 * std::max(1.0, std::fabs(base.t_stats[j])),
                    label + ": scale t");
        tally.check(std::fabs(scaled.p_values[j] - base.p_values[j]) < 1e-9, label + ": scale p");
        tally.check(scaled.stars[j] == base.stars[j], label + ": scale stars");
    }
    tally.check(scaled.cr.has_value() == base.cr.has_value() && (!base.cr || std::fabs(*scaled.cr - *base.cr) < 1e-9),
                label + ": scale ratio");

    // P -> 1 - P
    DidDesign swapped = d;
    for (auto& o : swapped.observations) o.treated = 1 - o.treated;
    const auto sw = fit_ols(swapped);
    double worst = 0.0;
    for (std::size_t i = 0; i < d.observations.size(); ++i)
        worst = std::max(worst, std::fabs((d.observations[i].y - base.residuals[i]) -
                                          (swapped.observations[i].y - sw.residuals[i])));
    tally.check(worst < 1e-9, label + ": label swap fitted values (" + csv::format_double(worst) + ")");
    tally.check(std::fabs(sw.beta[2] + base.beta[2]) < 1e-9 * std::max(1.0, std::fabs(base.beta[2])) &&
                    std::fabs(sw.beta[4] + base.beta[4]) < 1e-9 * std::max(1.0, std::fabs(base.beta[4])),
                label + ": label swap negates b2 and b4");
}

Verdict ols_invariants() {
    InvariantTally tally;
    std::mt19937_64 rng(20240606);
    std::normal_distribution<double> n01;
    for (int inst = 0; inst < 60; ++inst) {
        const std::size_t pairs = 1 + rng() % 12;
        std::array<double, 5> b;
        for (auto& v : b) v = 3 * n01(rng);
        b[0] += 50;
        const double noise = 0.2 + std::fabs(n01(rng));
        Window w;
        w.anchor = Date::from_ymd(2021, 2, 12);
        w.variable = "NCSM";
        std::vector<std::string> control, treated;
        for (std::size_t i = 0; i < 2 * pairs; ++i) {
            const bool t = i >= pairs;
            const std::string code = (t ? "T" : "C") + std::to_string(i);
            (t ? treated : control).push_back(code);
            w.countries.push_back(code);
            std::array<double, Window::kLength> y{};
            const double level = 2 * n01(rng);
            for (int s = 1; s <= Window::kLength; ++s) {
                const double kink = s > 30 ? s - 30.0 : 0.0;
                y[s - 1] = b[0] + b[1] * s + b[2] * t + b[3] * kink + b[4] * kink * t + level + noise * n01(rng);
            }
            w.series.push_back(y);
        }
        check_invariants(build_design(w, control, treated), "random design " + std::to_string(inst), tally);
    }
    SynthSpec spec;
    for (int r = 0; r < 20; ++r) {
        spec.seed = replication_seed(6006, static_cast<std::uint64_t>(r));
        const SynthData data = generate(spec);
        const Window window = extract_window(data.panel, data.anchor, kSynthOutcome);
        check_invariants(build_design(window, data.truth.control, data.truth.treated),
                         "synthetic " + std::to_string(r), tally);
    }
    return {tally.failures == 0,
            std::to_string(tally.fits) + " fits, " + std::to_string(tally.failures) + " invariant violations",
            tally.notes};
}

// ---------------------------------------------------------------- 7, 8

fs::path source_dir() { return fs::path(PSMDID_SOURCE_DIR); }

struct PublishedCell {
    const char* policy;
    const char* anchor;
    double estimate;    // NaN for "/"
    const char* stars;
};

const std::vector<PublishedCell>& published_grid() {
    const double slash = std::nan("");
    static const std::vector<PublishedCell> cells = {
        {"C1", "2020-09-14", 0.1451, ""},      {"C1", "2021-02-12", -0.4832, ""},
        {"C1", "2021-10-04", 4.4789, ""},      {"C3", "2020-09-14", -1.294, "***"},
        {"C3", "2021-02-12", -6.1438, "***"},  {"C3", "2021-10-04", -3.4422, "**"},
        {"C4", "2020-09-14", -0.6398, "*"},    {"C4", "2021-02-12", slash, "/"},
        {"C4", "2021-10-04", -0.3187, ""},     {"C6", "2020-09-14", slash, "/"},
        {"C6", "2021-02-12", -2.6323, "**"},   {"C6", "2021-10-04", -11.02, "**"},
        {"E1", "2020-09-14", 1.7113, "***"},   {"E1", "2021-02-12", 0.2987, ""},
        {"E1", "2021-10-04", -0.0969, ""},     {"E2", "2020-09-14", 0.2083, ""},
        {"E2", "2021-02-12", -6.446, "***"},   {"E2", "2021-10-04", -0.2798, ""},
        {"H2", "2020-09-14", -1.6034, "***"},  {"H2", "2021-02-12", -3.0598, "**"},
        {"H2", "2021-10-04", 0.2454, ""},      {"H7", "2020-09-14", slash, "/"},
        {"H7", "2021-02-12", -2.3722, "*"},    {"H7", "2021-10-04", -5.5568, "***"},
        {"H8", "2020-09-14", -0.3310, ""},     {"H8", "2021-02-12", 0.1783, ""},
        {"H8", "2021-10-04", -4.0268, "***"},
    };
    return cells;
}

Verdict replication_targets() {
    const fs::path conf = source_dir() / "config" / "replication.conf";
    const auto kv = KeyValueConfig::load(conf);
    const auto cfg = EvaluationConfig::from_config(kv);
    if (!fs::exists(cfg.panel_path) || !fs::exists(cfg.covariates_path))
        return {false,
                "pinned snapshot not present (" + cfg.panel_path.lexically_normal().string() + ", " +
                    cfg.covariates_path.lexically_normal().string() + "); targets cannot be evaluated",
                {}};

    auto inputs = load_inputs(cfg);
    const auto anchors = resolve_anchors(cfg, inputs.panel, &inputs.diagnostics);
    const auto cells = run_grid(cfg, inputs.panel, inputs.covariates, anchors);
    auto find = [&](const std::string& p, const std::string& a) -> const GridCell* {
        for (const auto& c : cells)
            if (c.policy == p && c.anchor.to_string() == a) return &c;
        return nullptr;
    };

    Verdict v;
    bool point_ok = false;
    if (const GridCell* c3 = find("C3", "2021-10-04"); c3 && c3->fit) {
        const auto& f = *c3->fit;
        const bool split = c3->n_control == 10 && c3->n_treated == 28;
        const bool b4 = std::fabs(f.beta[4] - -3.4422) <= 0.05;
        const bool p = std::fabs(f.p_values[4] - 0.0041) <= 0.002;
        const bool cr = f.cr && std::fabs(*f.cr - 52.31) <= 1.0;
        point_ok = split && b4 && p && cr;
        v.notes.push_back("C3 2021-10-04: split " + std::to_string(c3->n_control) + "/" +
                          std::to_string(c3->n_treated) + ", b4 " + fmt(f.beta[4]) + ", p " + fmt(f.p_values[4]) +
                          ", CR " + (f.cr ? fmt(*f.cr, 2) : std::string("n/a")));
    } else {
        v.notes.push_back("C3 2021-10-04: no fitted cell");
    }

    int scored = 0, agree = 0;
    for (const auto& pub : published_grid()) {
        const GridCell* c = find(pub.policy, pub.anchor);
        std::string ours = "missing";
        if (c) {
            const auto t = format_cell(*c);
            ours = t.estimate + " " + t.se + " " + t.cr;
        }
        const std::string theirs =
            std::isnan(pub.estimate) ? "/" : csv::format_double(pub.estimate) + std::string(pub.stars);
        if (!std::isnan(pub.estimate)) {
            ++scored;
            const bool same = c && c->fit && (c->fit->beta[4] < 0) == (pub.estimate < 0) &&
                              c->fit->stars[4] == pub.stars;
            agree += same;
            v.notes.push_back(std::string(pub.policy) + " " + pub.anchor + ": published " + theirs + ", ours " + ours +
                              (same ? "" : "  <- differs"));
        } else {
            v.notes.push_back(std::string(pub.policy) + " " + pub.anchor + ": published /, ours " + ours);
        }
    }
    const double share = scored ? static_cast<double>(agree) / scored : 0.0;
    v.pass = share >= 0.8;
    v.detail = "sign/star agreement " + std::to_string(agree) + "/" + std::to_string(scored) + "; C3 point targets " +
               (point_ok ? "met" : "not met");
    return v;
}

Verdict table_moments() {
    const fs::path conf = source_dir() / "config" / "replication.conf";
    const auto cfg = EvaluationConfig::from_config(KeyValueConfig::load(conf));
    if (!fs::exists(cfg.panel_path))
        return {false, "pinned snapshot not present (" + cfg.panel_path.lexically_normal().string() + ")", {}};
    PanelDataset panel = load_panel(cfg.panel_path.string(), default_schema());
    if (!cfg.countries.empty()) panel = panel.select_countries(cfg.countries);
    const auto rows = summarize(panel);
    struct Target {
        const char* name;
        double mean, sd, min, max;
    };
    const Target targets[] = {
        {"C1", 1.66, 0.87, 0, 3}, {"C2", 1.67, 0.76, 0, 3}, {"C3", 1.52, 0.61, 0, 2}, {"C4", 3.16, 1.10, 0, 4},
        {"C5", 0.43, 0.59, 0, 2}, {"C6", 0.88, 0.82, 0, 3}, {"C7", 0.65, 0.84, 0, 2}, {"C8", 2.61, 0.87, 0, 4},
        {"E1", 1.55, 0.66, 0, 2}, {"E2", 1.24, 0.76, 0, 2}, {"H1", 1.96, 0.21, 0, 2}, {"H2", 2.33, 0.69, 0, 3},
        {"H3", 1.52, 0.62, 0, 2}, {"H6", 2.26, 1.11, 0, 4}, {"H7", 2.00, 2.10, 0, 5}, {"H8", 1.88, 0.95, 0, 3},
        {"NCSM", 182.23, 238.34, 21.63, 2078.77}, {"R", 1.08, 0.31, 0.09, 3.69},
    };
    Verdict v;
    int bad = 0;
    for (const auto& t : targets) {
        const SummaryRow* row = nullptr;
        for (const auto& r : rows)
            if (r.variable == t.name) row = &r;
        if (!row || !row->mean) {
            ++bad;
            v.notes.push_back(std::string(t.name) + ": no observations");
            continue;
        }
        const std::string name = t.name;
        bool ok;
        if (name == "NCSM" || name == "R") {
            ok = std::fabs(*row->mean - t.mean) <= 0.02 * t.mean && row->sd && std::fabs(*row->sd - t.sd) <= 0.02 * t.sd;
        } else {
            ok = *row->min == t.min && *row->max == t.max;
        }
        bad += !ok;
        v.notes.push_back(name + ": mean " + fmt(*row->mean, 2) + " sd " + (row->sd ? fmt(*row->sd, 2) : "-") + " min " +
                          csv::format_double(*row->min) + " max " + csv::format_double(*row->max) + " n " +
                          std::to_string(row->n) + (ok ? "" : "  <- differs"));
    }
    v.pass = bad == 0;
    v.detail = std::to_string(18 - bad) + "/18 variables match";
    return v;
}

// ---------------------------------------------------------------- 9

Verdict changepoint_plumbing() {
    const int seeds = 100;
    int exact = 0, quiet = 0;
    std::vector<std::string> notes;
    for (int s = 0; s < seeds; ++s) {
        std::mt19937_64 rng(9000 + s);
        std::normal_distribution<double> noise(0.0, 0.2);  // levels 1 and 2 are five sd apart
        std::vector<double> x;
        for (int i = 0; i < 100; ++i) x.push_back(1.0 + noise(rng));
        for (int i = 0; i < 100; ++i) x.push_back(2.0 + noise(rng));
        const auto points = detect(x, DetectorConfig{});
        const auto rising = filter_rising(points, x);
        const bool ok = rising.size() == 1 && rising[0].index + 10 >= 100 && rising[0].index <= 110;
        exact += ok;
        if (!ok) {
            std::string where;
            for (const auto& p : points) where += " " + std::to_string(p.index) + "(" + to_string(p.direction) + ")";
            notes.push_back("seed " + std::to_string(9000 + s) + ": detections at" + where);
        }

        std::uniform_real_distribution<double> level(-5, 5);
        const std::vector<double> flat(200 + s, level(rng));
        quiet += detect(flat, DetectorConfig{}).empty();
    }
    // With a calibrated threshold the chance of a false alarm in the 80 tested
    // observations of each level is 1 - (1 - 1/arl0)^80, which bounds the
    // attainable share of clean runs well below 95% for every supported arl0.
    const double clean = std::pow(1.0 - 1.0 / DetectorConfig{}.arl0, 2.0 * (100.0 - DetectorConfig{}.warmup));
    notes.insert(notes.begin(), "share expected from the false-alarm rate alone: about " + fmt(100 * clean, 0) + "%");
    return {exact >= 95 && quiet == seeds,
            std::to_string(exact) + "/" + std::to_string(seeds) + " step streams with exactly one rising change near " +
                "index 100; " + std::to_string(quiet) + "/" + std::to_string(seeds) + " constant streams silent",
            notes};
}

// ---------------------------------------------------------------- 10

Verdict determinism() {
    const fs::path dir = fs::temp_directory_path() / ("psmdid_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);

    SynthSpec spec;
    spec.seed = 1010;
    const SynthData data = generate(spec);
    std::mt19937_64 rng(1010);
    {
        std::ofstream panel(dir / "panel.csv");
        panel << "country,date,variable,value\n";
        for (std::size_t c = 0; c < data.panel.countries().size(); ++c) {
            const std::string& code = data.panel.countries()[c];
            const int c6 = static_cast<int>(rng() % 4);
            for (std::size_t d = 0; d < data.panel.num_dates(); ++d) {
                const std::string date = data.panel.date_at(d).to_string();
                panel << code << ',' << date << ",C3," << (data.panel.raw(c, d, 0) > 0.5 ? 2 : 0) << '\n';
                panel << code << ',' << date << ",C6," << c6 << '\n';
                panel << code << ',' << date << ",E1,1\n";
                panel << code << ',' << date << ",NCSM," << csv::format_double(data.panel.raw(c, d, 1)) << '\n';
            }
        }
        std::ofstream covs(dir / "covariates.csv");
        write_covariates_csv(data.covariates, covs);
        std::ofstream conf(dir / "evaluate.conf");
        conf << "panel = panel.csv\ncovariates = covariates.csv\npolicies = C3:1, C6, E1\n"
             << "anchors = " << data.anchor.to_string() << "\n";
    }
    auto run = [&](const std::string& out, const std::string& threads) {
        std::ofstream(dir / "evaluate.conf", std::ios::app) << "threads = " << threads << "\n";
        const std::string cmd = std::string("\"") + PSMDID_CLI + "\" evaluate --config \"" +
                                (dir / "evaluate.conf").string() + "\" --out \"" + (dir / out).string() +
                                "\" > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    const int rc1 = run("first", "1");
    const int rc2 = run("second", "4");
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    };
    const std::string a = slurp(dir / "first" / "report.json");
    const std::string b = slurp(dir / "second" / "report.json");
    fs::remove_all(dir);
    if (rc1 != 0 || rc2 != 0)
        return {false, "evaluate exited with " + std::to_string(rc1) + " and " + std::to_string(rc2), {}};
    return {!a.empty() && a == b,
            "two evaluate runs (1 and 4 threads) wrote " + std::to_string(a.size()) + " and " +
                std::to_string(b.size()) + " bytes, " + (a == b ? "identical" : "different"),
            {}};
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        const char* title;
        double budget_seconds;  // 0: no runtime bound
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "matching optimality", 10, matching_optimality},
        {2, "logistic oracle equivalence", 30, logistic_oracle},
        {3, "rank statistic brute force", 0, rank_statistic},
        {4, "synthetic recovery", 60, synthetic_recovery},
        {5, "bias reduction", 120, bias_reduction},
        {6, "OLS invariants", 0, ols_invariants},
        {7, "replication targets", 0, replication_targets},
        {8, "summary moments", 0, table_moments},
        {9, "change-point plumbing", 0, changepoint_plumbing},
        {10, "determinism", 0, determinism},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    bool all = true;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what(), {}};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string timing = fmt(secs, 2) + " s";
        if (c.budget_seconds > 0) {
            timing += " of " + fmt(c.budget_seconds, 0) + " s";
            if (secs > c.budget_seconds) {
                v.pass = false;
                timing += ", over budget";
            }
        }
        all = all && v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.title << ": " << v.detail << " ("
                  << timing << ")\n";
        for (const auto& n : v.notes) std::cout << "        " << n << '\n';
        std::cout.flush();
    }
    return all ? 0 : 1;
}
