#include "psmdid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "psmdid/csv.hpp"

namespace psmdid {

namespace {

// mt19937_64 is fully specified by the standard; the distributions are not,
// so uniform and normal draws are derived here to keep datasets identical
// across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    double gumbel() { return -std::log(-std::log(uniform())); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::string country_code(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "S%03zu", i + 1);
    return buf;
}

double clamp_draw(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

}  // namespace

void SynthSpec::validate() const {
    if (n_control < 1) throw std::invalid_argument("synth: n_control must be at least 1");
    if (n_treated < n_control) throw std::invalid_argument("synth: n_treated must be at least n_control");
    if (!(noise_sd >= 0)) throw std::invalid_argument("synth: noise_sd must be non-negative");
}

std::uint64_t replication_seed(std::uint64_t base, std::uint64_t replication) {
    // splitmix64 finalizer
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (replication + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<VariableDescriptor> synth_schema() {
    const double inf = std::numeric_limits<double>::infinity();
    return {{kSynthPolicy, "Synthetic treatment indicator", 0, 1, VariableKind::policy},
            {kSynthOutcome, "Synthetic outcome", -inf, inf, VariableKind::outcome}};
}

SynthData generate(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const std::size_t n = spec.n_control + spec.n_treated;

    SynthData data;
    data.anchor = Date::from_ymd(2021, 10, 4);
    std::vector<std::string> codes;
    for (std::size_t i = 0; i < n; ++i) codes.push_back(country_code(i));

    // covariates on realistic scales; population carries the confounder
    std::vector<double> latent(n);
    for (std::size_t i = 0; i < n; ++i) {
        latent[i] = rng.normal();
        MacroCovariates m;
        m.population = 1.0e7 * std::exp(latent[i]);
        m.population_density = 100.0 * std::exp(0.8 * rng.normal());
        m.aged_65_older = clamp_draw(18.0 + 3.0 * rng.normal(), 5.0, 30.0);
        m.gdp_per_capita = 35000.0 * std::exp(0.4 * rng.normal());
        m.cardiovasc_death_rate = 250.0 * std::exp(0.4 * rng.normal());
        m.diabetes_prevalence = clamp_draw(6.0 + 1.5 * rng.normal(), 2.0, 15.0);
        m.hospital_beds_per_thousand = 5.0 * std::exp(0.35 * rng.normal());
        m.life_expectancy = clamp_draw(80.0 + 2.5 * rng.normal(), 70.0, 85.0);
        m.human_development_index = clamp_draw(0.88 + 0.05 * rng.normal(), 0.70, 0.97);
        data.covariates.emplace(codes[i], m);
    }
    const double mean = std::accumulate(latent.begin(), latent.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double z : latent) ss += (z - mean) * (z - mean);
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 1.0;
    data.confounder.resize(n);
    for (std::size_t i = 0; i < n; ++i) data.confounder[i] = sd > 0 ? (latent[i] - mean) / sd : 0.0;

    // Gumbel-top-k: a size-n_treated draw without replacement with odds exp(strength * z)
    std::vector<int> treated(n, 0);
    bool split_ok = false;
    for (int attempt = 0; attempt < 100 && !split_ok; ++attempt) {
        std::vector<std::pair<double, std::size_t>> keys;
        for (std::size_t i = 0; i < n; ++i)
            keys.emplace_back(spec.confounding_strength * data.confounder[i] + rng.gumbel(), i);
        std::sort(keys.begin(), keys.end(), std::greater<>());
        std::fill(treated.begin(), treated.end(), 0);
        for (std::size_t r = 0; r < spec.n_treated; ++r) treated[keys[r].second] = 1;
        const auto n_t = static_cast<std::size_t>(std::count(treated.begin(), treated.end(), 1));
        split_ok = n_t > 0 && n_t < n;
    }
    if (!split_ok) throw std::runtime_error("synth: could not draw a non-degenerate treatment split");

    data.panel = PanelDataset(codes, data.anchor.plus_days(1 - Window::kAnchorOffset), Window::kLength,
                              synth_schema());
    const auto& b = spec.true_beta;
    for (std::size_t i = 0; i < n; ++i) {
        for (int t = 1; t <= Window::kLength; ++t) {
            const double kink = t > kDidBreak ? static_cast<double>(t - kDidBreak) : 0.0;
            const double p = treated[i];
            double y = b[0] + b[1] * t + b[2] * p + b[3] * kink + b[4] * kink * p +
                       spec.outcome_confounding * data.confounder[i] * kink;
            if (spec.noise_sd > 0) y += spec.noise_sd * rng.normal();
            data.panel.set(i, static_cast<std::size_t>(t - 1), 0, p);
            data.panel.set(i, static_cast<std::size_t>(t - 1), 1, y);
        }
        (treated[i] ? data.truth.treated : data.truth.control).push_back(codes[i]);
    }
    data.truth.policy = kSynthPolicy;
    data.truth.anchor_date = data.anchor;
    data.truth.threshold = 0.5;
    return data;
}

namespace {

struct Estimate {
    double b4;
    double se;
    std::optional<double> cr;
};

EstimatorSummary summarize_estimates(const std::string& name, const std::vector<Estimate>& est, double truth) {
    EstimatorSummary s;
    s.estimator = name;
    s.replications = est.size();
    if (est.empty()) return s;
    double sum = 0.0, cr_sum = 0.0;
    std::size_t covered = 0, cr_n = 0;
    for (const auto& e : est) {
        sum += e.b4;
        if (std::fabs(e.b4 - truth) <= 2.0 * e.se) ++covered;
        if (e.cr) {
            cr_sum += *e.cr;
            ++cr_n;
        }
    }
    const double m = sum / static_cast<double>(est.size());
    double ss = 0.0;
    for (const auto& e : est) ss += (e.b4 - m) * (e.b4 - m);
    s.mean_estimate = m;
    s.bias = m - truth;
    s.sd = est.size() > 1 ? std::sqrt(ss / static_cast<double>(est.size() - 1)) : 0.0;
    s.coverage = static_cast<double>(covered) / static_cast<double>(est.size());
    s.mean_cr = cr_n ? cr_sum / static_cast<double>(cr_n) : std::numeric_limits<double>::quiet_NaN();
    return s;
}

}  // namespace

BiasStudy bias_study(const SynthSpec& spec, std::size_t replications) {
    if (replications < 50) throw std::invalid_argument("bias_study: at least 50 replications required");
    std::vector<Estimate> naive, matched;
    for (std::size_t r = 0; r < replications; ++r) {
        SynthSpec rep = spec;
        rep.seed = replication_seed(spec.seed, r);
        const SynthData data = generate(rep);
        const Window window = extract_window(data.panel, data.anchor, kSynthOutcome);

        const DidFit naive_fit = fit_ols(build_design(window, data.truth.control, data.truth.treated));
        naive.push_back({naive_fit.beta[4], naive_fit.se[4], naive_fit.cr});

        std::vector<LabeledCovariates> labeled;
        for (const auto& c : data.truth.control) labeled.push_back({data.covariates.at(c), 0});
        for (const auto& t : data.truth.treated) labeled.push_back({data.covariates.at(t), 1});
        const PropensityModel model = fit_propensity(labeled);
        std::map<std::string, double> scores;
        for (const auto& [code, cov] : data.covariates) scores[code] = predict_propensity(model, cov);
        const MatchResult match = optimal_pair_match(data.truth, scores);
        const DidFit matched_fit = fit_ols(build_design(window, match));
        matched.push_back({matched_fit.beta[4], matched_fit.se[4], matched_fit.cr});
    }
    BiasStudy study;
    study.naive = summarize_estimates("naive-DID", naive, spec.true_beta[4]);
    study.matched = summarize_estimates("PSM-DID", matched, spec.true_beta[4]);
    return study;
}

void write_bias_study_csv(const BiasStudy& study, std::ostream& out) {
    out << "estimator,replications,mean_estimate,bias,sd,coverage_2se,mean_cr\n";
    for (const auto* s : {&study.naive, &study.matched})
        out << s->estimator << ',' << s->replications << ',' << csv::format_double(s->mean_estimate) << ','
            << csv::format_double(s->bias) << ',' << csv::format_double(s->sd) << ','
            << csv::format_double(s->coverage) << ',' << csv::format_double(s->mean_cr) << '\n';
}

void write_assignment_csv(const TreatmentAssignment& a, std::ostream& out) {
    out << "country,group\n";
    for (const auto& c : a.control) out << csv::escape(c) << ",control\n";
    for (const auto& t : a.treated) out << csv::escape(t) << ",treated\n";
}

}  // namespace psmdid
