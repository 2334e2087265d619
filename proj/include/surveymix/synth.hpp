#ifndef SURVEYMIX_SYNTH_HPP
#define SURVEYMIX_SYNTH_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "surveymix/mixture.hpp"

namespace smx {

// Declarative synthetic electorate: the verification oracle and demo-data
// source. Sampling is reproducible given (model, n, seed).
struct GeneratorSpec {
    MixtureModel model;
    long long n = 0;
    std::uint64_t seed = 0;
    // Round each coordinate to the nearest integer and clamp to [1, 7],
    // mirroring the 7-point survey instrument.
    bool discretize = false;
    // Per-cluster (Democrat, Independent, Republican) probabilities; empty =
    // everyone Independent.
    std::vector<std::array<double, 3>> party_profile;
    int year = 2000;
    std::vector<std::string> issue_labels; // defaults to issue_1..issue_D

    void validate() const;
};

struct SynthSample {
    AnalysisMatrix matrix;
    std::vector<int> component; // true generating component per row
};

// Draw order per row: component (categorical by weight), then D normal
// deviates, then the party group (categorical) when a profile is present.
// Sampled groups are recorded with party codes 2/4/6.
SynthSample sample(const GeneratorSpec& spec);

struct ComponentMoments {
    std::size_t count = 0;
    std::vector<double> mean;
    std::vector<double> variance; // population (1/n) variance
};

// Per-component sample moments given the generator's true labels.
std::vector<ComponentMoments> empirical_moments(const AnalysisMatrix& data,
                                                const std::vector<int>& labels, int k);

GeneratorSpec generator_from_json(const std::string& json_text);
std::string generator_to_json(const GeneratorSpec& spec);

// A generator file holds either a single spec or {"years":[spec, ...]} for
// time-series runs. Year entries without an explicit seed get
// derive_seed(base_seed, kSample, year).
std::vector<GeneratorSpec> expand_generator_specs(const std::string& json_text);

// Schema config that reads the CSV emitted by matrix_to_csv for this spec.
std::string generator_schema_json(const GeneratorSpec& spec);

} // namespace smx

#endif
