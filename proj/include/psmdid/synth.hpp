#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "psmdid/did.hpp"
#include "psmdid/panel.hpp"
#include "psmdid/psm.hpp"

namespace psmdid {

struct SynthSpec {
    std::size_t n_control = 10;
    std::size_t n_treated = 28;
    std::array<double, kDidParams> true_beta = {50.0, 1.0, 5.0, 3.0, -2.0};
    double noise_sd = 1.0;
    // log-odds tilt of treatment per unit of the standardized first covariate
    double confounding_strength = 2.0;
    // added to each country's post-break slope per unit of the same covariate
    double outcome_confounding = 1.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SynthData {
    PanelDataset panel;  // 60 days, variables TREAT (0/1) and NCSM
    CovariateTable covariates;
    TreatmentAssignment truth;
    Date anchor;
    std::vector<double> confounder;  // standardized first covariate, in country order
};

inline constexpr const char* kSynthPolicy = "TREAT";
inline constexpr const char* kSynthOutcome = "NCSM";

std::vector<VariableDescriptor> synth_schema();

// Draws covariates, a treated set of exactly n_treated countries (sampling
// without replacement with odds exp(strength * confounder)), and outcomes
// from the piecewise-linear DID model plus Gaussian noise.
SynthData generate(const SynthSpec& spec);

struct EstimatorSummary {
    std::string estimator;
    std::size_t replications = 0;
    double mean_estimate = 0.0;
    double bias = 0.0;
    double sd = 0.0;
    double coverage = 0.0;  // share of replications with |b4_hat - b4| <= 2 se
    double mean_cr = 0.0;   // over replications where the ratio is defined
};

struct BiasStudy {
    EstimatorSummary naive;
    EstimatorSummary matched;
};

// Runs the unmatched DID and the PSM-DID pipeline on each replication.
BiasStudy bias_study(const SynthSpec& spec, std::size_t replications);

void write_bias_study_csv(const BiasStudy& study, std::ostream& out);
void write_assignment_csv(const TreatmentAssignment& a, std::ostream& out);

// Per-replication seed derived from a base seed.
std::uint64_t replication_seed(std::uint64_t base, std::uint64_t replication);

}  // namespace psmdid
