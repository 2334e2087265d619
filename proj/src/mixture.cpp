#include "surveymix/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

namespace smx {

using nlohmann::json;

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kWeightSumSlack = 1e-12;
} // namespace

void MixtureModel::validate() const {
    if (k < 1 || dim < 1) raise(Status::InvalidArgument, "model needs k >= 1 and D >= 1");
    auto kk = static_cast<std::size_t>(k);
    auto dd = static_cast<std::size_t>(dim);
    if (weights.size() != kk || means.size() != kk * dd || variances.size() != kk * dd)
        raise(Status::InvalidArgument, "model field sizes disagree with k and D");
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) raise(Status::InvalidArgument, "negative mixture weight");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > kWeightSumSlack)
        raise(Status::InvalidArgument, "mixture weights do not sum to 1");
    for (double v : variances)
        if (!(v > 0.0)) raise(Status::InvalidArgument, "non-positive variance");
}

double log_component_density(std::span<const double> x, std::span<const double> mean,
                             std::span<const double> var_diag) {
    if (x.size() != mean.size() || x.size() != var_diag.size())
        raise(Status::InvalidArgument, "dimension mismatch in component density");
    double log_det = 0.0;
    double quad = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        double v = var_diag[d];
        if (!(v > 0.0)) raise(Status::InvalidArgument, "non-positive variance");
        double diff = x[d] - mean[d];
        log_det += std::log(v);
        quad += diff * diff / v;
    }
    return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + log_det + quad);
}

double component_density(std::span<const double> x, std::span<const double> mean,
                         std::span<const double> var_diag) {
    return std::exp(log_component_density(x, mean, var_diag));
}

double log_mixture_density(std::span<const double> x, const MixtureModel& model) {
    if (static_cast<int>(x.size()) != model.dim)
        raise(Status::InvalidArgument, "point dimension disagrees with model");
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(static_cast<std::size_t>(model.k));
    for (int i = 0; i < model.k; ++i) {
        double t = model.weights[static_cast<std::size_t>(i)] > 0.0
                       ? std::log(model.weights[static_cast<std::size_t>(i)]) +
                             log_component_density(x, model.mean(i), model.variance(i))
                       : -std::numeric_limits<double>::infinity();
        terms[static_cast<std::size_t>(i)] = t;
        max_term = std::max(max_term, t);
    }
    if (!std::isfinite(max_term)) return max_term;
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - max_term);
    return max_term + std::log(sum);
}

double mixture_density(std::span<const double> x, const MixtureModel& model) {
    return std::exp(log_mixture_density(x, model));
}

double log_likelihood(const AnalysisMatrix& data, const MixtureModel& model) {
    if (data.n == 0) raise(Status::InvalidArgument, "empty data");
    if (static_cast<int>(data.dim) != model.dim)
        raise(Status::InvalidArgument, "data dimension disagrees with model");
    double total = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        double lp = log_mixture_density(data.row(i), model);
        if (!std::isfinite(lp))
            raise(Status::NumericError,
                  "mixture density vanished at row " + std::to_string(i));
        total += lp;
    }
    return total;
}

int num_params(int k, int dim) {
    if (k < 1 || dim < 1) raise(Status::InvalidArgument, "num_params needs k, D >= 1");
    return k * (2 * dim + 1) - 1;
}

CriterionValue criteria(double log_likelihood, int k, int dim, long long n) {
    if (n < 1) raise(Status::InvalidArgument, "criteria needs n >= 1");
    CriterionValue c;
    c.log_likelihood = log_likelihood;
    c.num_params = num_params(k, dim);
    c.n = n;
    c.aic = 2.0 * c.num_params - 2.0 * log_likelihood;
    c.bic = c.num_params * std::log(static_cast<double>(n)) - 2.0 * log_likelihood;
    return c;
}

MixtureModel sort_components(const MixtureModel& model) {
    std::vector<int> order(static_cast<std::size_t>(model.k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        auto ma = model.mean(a);
        auto mb = model.mean(b);
        return std::lexicographical_compare(ma.begin(), ma.end(), mb.begin(), mb.end());
    });
    MixtureModel out;
    out.k = model.k;
    out.dim = model.dim;
    for (int i : order) {
        out.weights.push_back(model.weights[static_cast<std::size_t>(i)]);
        auto m = model.mean(i);
        auto v = model.variance(i);
        out.means.insert(out.means.end(), m.begin(), m.end());
        out.variances.insert(out.variances.end(), v.begin(), v.end());
    }
    return out;
}

std::string model_to_json(const MixtureModel& model) {
    json j;
    j["k"] = model.k;
    j["D"] = model.dim;
    j["weights"] = model.weights;
    json means = json::array();
    json variances = json::array();
    for (int i = 0; i < model.k; ++i) {
        auto m = model.mean(i);
        auto v = model.variance(i);
        means.push_back(std::vector<double>(m.begin(), m.end()));
        variances.push_back(std::vector<double>(v.begin(), v.end()));
    }
    j["means"] = means;
    j["variances"] = variances;
    return j.dump(2) + "\n";
}

MixtureModel model_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        raise(Status::ParseError, std::string("model JSON: ") + e.what());
    }
    MixtureModel model;
    try {
        model.k = j.at("k").get<int>();
        model.dim = j.at("D").get<int>();
        model.weights = j.at("weights").get<std::vector<double>>();
        for (const auto& row : j.at("means")) {
            auto values = row.get<std::vector<double>>();
            model.means.insert(model.means.end(), values.begin(), values.end());
        }
        for (const auto& row : j.at("variances")) {
            auto values = row.get<std::vector<double>>();
            model.variances.insert(model.variances.end(), values.begin(), values.end());
        }
    } catch (const json::exception& e) {
        raise(Status::ParseError, std::string("model JSON: ") + e.what());
    }
    model.validate();
    return model;
}

} // namespace smx
