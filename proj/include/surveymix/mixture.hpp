#ifndef SURVEYMIX_MIXTURE_HPP
#define SURVEYMIX_MIXTURE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "surveymix/dataset.hpp"

namespace smx {

// Gaussian mixture with diagonal covariances: k weights, k mean vectors and
// k per-dimension variance vectors.
struct MixtureModel {
    int k = 0;
    int dim = 0;
    std::vector<double> weights;   // k, nonnegative, sums to 1
    std::vector<double> means;     // k x dim, row-major
    std::vector<double> variances; // k x dim, all positive

    std::span<const double> mean(int i) const {
        return {means.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
    }
    std::span<const double> variance(int i) const {
        return {variances.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
    }
    void validate() const;
};

// Density of a single diagonal-covariance Gaussian:
//   (2*pi)^(-D/2) * (prod_d var_d)^(-1/2) * exp(-1/2 * sum_d (x_d-mu_d)^2 / var_d)
double log_component_density(std::span<const double> x, std::span<const double> mean,
                             std::span<const double> var_diag);
double component_density(std::span<const double> x, std::span<const double> mean,
                         std::span<const double> var_diag);

// sum_i w_i * N_i(x); evaluated in the log domain via log-sum-exp.
double log_mixture_density(std::span<const double> x, const MixtureModel& model);
double mixture_density(std::span<const double> x, const MixtureModel& model);

// Sum over rows of log mixture density. Throws NumericError (with the row
// index) if any row's density is not finite.
double log_likelihood(const AnalysisMatrix& data, const MixtureModel& model);

// Free parameters: (k-1) weights + k*D means + k*D variances.
int num_params(int k, int dim);

struct CriterionValue {
    double log_likelihood = 0.0;
    double aic = 0.0; // 2p - 2 lnL
    double bic = 0.0; // p ln(n) - 2 lnL
    int num_params = 0;
    long long n = 0;
};

CriterionValue criteria(double log_likelihood, int k, int dim, long long n);

// Components reordered by mean, lexicographically ascending. Densities and
// likelihoods are invariant under this permutation; fitted models are stored
// in this canonical order so cluster indices are stable across runs.
MixtureModel sort_components(const MixtureModel& model);

// Interchange format: {"k":..,"D":..,"weights":[..],"means":[[..]..],"variances":[[..]..]}
std::string model_to_json(const MixtureModel& model);
MixtureModel model_from_json(const std::string& json_text);

} // namespace smx

#endif
