#include "surveymix/synth.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "surveymix/rng.hpp"

namespace smx {

using nlohmann::json;

namespace {

// Sampled groups are recorded with a representative 7-point code so the
// matrix round-trips through the CSV loader and plots pick a sensible shade.
int party_code_for(PartyGroup group) {
    switch (group) {
    case PartyGroup::Democrat: return 2;
    case PartyGroup::Independent: return 4;
    case PartyGroup::Republican: return 6;
    }
    return 4;
}

} // namespace

void GeneratorSpec::validate() const {
    model.validate();
    if (n < 1) raise(Status::InvalidArgument, "generator needs n >= 1");
    if (!party_profile.empty()) {
        if (party_profile.size() != static_cast<std::size_t>(model.k))
            raise(Status::InvalidArgument, "party_profile must have one triple per cluster");
        for (const auto& triple : party_profile) {
            double sum = 0.0;
            for (double p : triple) {
                if (p < 0.0) raise(Status::InvalidArgument, "negative party probability");
                sum += p;
            }
            if (std::fabs(sum - 1.0) > 1e-9)
                raise(Status::InvalidArgument, "party triple must sum to 1");
        }
    }
    if (!issue_labels.empty() && issue_labels.size() != static_cast<std::size_t>(model.dim))
        raise(Status::InvalidArgument, "issue_labels must have one entry per dimension");
}

SynthSample sample(const GeneratorSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, stream::kSample));

    SynthSample out;
    auto& m = out.matrix;
    m.n = static_cast<std::size_t>(spec.n);
    m.dim = static_cast<std::size_t>(spec.model.dim);
    m.positions.reserve(m.n * m.dim);
    out.component.reserve(m.n);
    if (spec.issue_labels.empty()) {
        for (std::size_t d = 0; d < m.dim; ++d)
            m.issue_labels.push_back("issue_" + std::to_string(d + 1));
    } else {
        m.issue_labels = spec.issue_labels;
    }

    for (long long r = 0; r < spec.n; ++r) {
        auto comp = static_cast<int>(rng.categorical(spec.model.weights));
        out.component.push_back(comp);
        auto mean = spec.model.mean(comp);
        auto var = spec.model.variance(comp);
        for (std::size_t d = 0; d < m.dim; ++d) {
            double value = mean[d] + rng.normal() * std::sqrt(var[d]);
            if (spec.discretize) {
                value = std::round(value);
                value = std::clamp(value, static_cast<double>(kScaleMin),
                                   static_cast<double>(kScaleMax));
            }
            m.positions.push_back(value);
        }
        PartyGroup group = PartyGroup::Independent;
        if (!spec.party_profile.empty()) {
            const auto& triple = spec.party_profile[static_cast<std::size_t>(comp)];
            group = static_cast<PartyGroup>(rng.categorical(triple));
        }
        m.party_group.push_back(group);
        m.party_strength.push_back(party_code_for(group));
        m.year.push_back(spec.year);
    }
    return out;
}

std::vector<ComponentMoments> empirical_moments(const AnalysisMatrix& data,
                                                const std::vector<int>& labels, int k) {
    if (labels.size() != data.n)
        raise(Status::InvalidArgument, "labels do not align with data rows");
    std::vector<ComponentMoments> moments(static_cast<std::size_t>(k));
    for (auto& m : moments) {
        m.mean.assign(data.dim, 0.0);
        m.variance.assign(data.dim, 0.0);
    }
    for (std::size_t r = 0; r < data.n; ++r) {
        auto& m = moments[static_cast<std::size_t>(labels[r])];
        ++m.count;
        auto x = data.row(r);
        for (std::size_t d = 0; d < data.dim; ++d) m.mean[d] += x[d];
    }
    for (int i = 0; i < k; ++i) {
        auto& m = moments[static_cast<std::size_t>(i)];
        if (m.count == 0)
            raise(Status::EmptyResult, "component " + std::to_string(i) + " has no rows");
        for (auto& v : m.mean) v /= static_cast<double>(m.count);
    }
    for (std::size_t r = 0; r < data.n; ++r) {
        auto& m = moments[static_cast<std::size_t>(labels[r])];
        auto x = data.row(r);
        for (std::size_t d = 0; d < data.dim; ++d) {
            double diff = x[d] - m.mean[d];
            m.variance[d] += diff * diff;
        }
    }
    for (auto& m : moments)
        for (auto& v : m.variance) v /= static_cast<double>(m.count);
    return moments;
}

namespace {

GeneratorSpec generator_from_json_obj(const json& j) {
    GeneratorSpec spec;
    try {
        spec.model = model_from_json(j.at("model").dump());
        spec.n = j.at("n").get<long long>();
        spec.seed = j.value("seed", static_cast<std::uint64_t>(0));
        spec.discretize = j.value("discretize", false);
        if (j.contains("party_profile") && !j.at("party_profile").is_null()) {
            for (const auto& row : j.at("party_profile")) {
                auto values = row.get<std::vector<double>>();
                if (values.size() != 3)
                    raise(Status::ParseError, "party_profile rows need 3 entries");
                spec.party_profile.push_back({values[0], values[1], values[2]});
            }
        }
        spec.year = j.value("year", spec.year);
        if (j.contains("labels"))
            spec.issue_labels = j.at("labels").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        raise(Status::ParseError, std::string("generator spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

} // namespace

GeneratorSpec generator_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        raise(Status::ParseError, std::string("generator spec: ") + e.what());
    }
    return generator_from_json_obj(j);
}

std::string generator_to_json(const GeneratorSpec& spec) {
    json j;
    j["model"] = json::parse(model_to_json(spec.model));
    j["n"] = spec.n;
    j["seed"] = spec.seed;
    j["discretize"] = spec.discretize;
    if (!spec.party_profile.empty()) {
        json profile = json::array();
        for (const auto& triple : spec.party_profile)
            profile.push_back({triple[0], triple[1], triple[2]});
        j["party_profile"] = profile;
    }
    j["year"] = spec.year;
    if (!spec.issue_labels.empty()) j["labels"] = spec.issue_labels;
    return j.dump(2) + "\n";
}

std::vector<GeneratorSpec> expand_generator_specs(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        raise(Status::ParseError, std::string("generator spec: ") + e.what());
    }
    std::vector<GeneratorSpec> specs;
    if (j.is_object() && j.contains("years")) {
        std::uint64_t base_seed = j.value("seed", static_cast<std::uint64_t>(0));
        for (const auto& yj : j.at("years")) {
            auto spec = generator_from_json_obj(yj);
            if (!yj.contains("seed"))
                spec.seed = derive_seed(base_seed, stream::kSample,
                                        static_cast<std::uint64_t>(spec.year));
            specs.push_back(std::move(spec));
        }
        if (specs.empty()) raise(Status::ParseError, "generator \"years\" list is empty");
    } else {
        specs.push_back(generator_from_json_obj(j));
    }
    return specs;
}

std::string generator_schema_json(const GeneratorSpec& spec) {
    json j;
    j["issues"] = json::array();
    std::vector<std::string> labels = spec.issue_labels;
    if (labels.empty())
        for (int d = 0; d < spec.model.dim; ++d)
            labels.push_back("issue_" + std::to_string(d + 1));
    for (const auto& label : labels) {
        j["issues"].push_back({{"column", label},
                               {"label", label},
                               {"na_code", 0},
                               {"dk_code", 9},
                               {"valid_min", kScaleMin},
                               {"valid_max", kScaleMax}});
    }
    j["party_column"] = "party";
    j["year_column"] = "year";
    return j.dump(2) + "\n";
}

} // namespace smx
