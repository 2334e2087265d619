#ifndef SURVEYMIX_EM_HPP
#define SURVEYMIX_EM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "surveymix/mixture.hpp"

namespace smx {

struct FitConfig {
    int k = 2;
    // Lower clamp on fitted variances, in squared scale units. 0 selects the
    // unconstrained mode, which still clamps at 1e-6 so densities stay finite
    // when a component collapses onto a single grid point.
    double variance_floor = 0.0;
    int max_iterations = 500;
    double tolerance = 1e-8; // relative log-likelihood change
    int restarts = 10;
    std::uint64_t seed = 0;

    double effective_floor() const {
        return variance_floor > 1e-6 ? variance_floor : 1e-6;
    }
    void validate() const;
};

FitConfig fit_config_from_json(const std::string& json_text);
std::string fit_config_to_json(const FitConfig& cfg);

// Posterior component membership, one row per observation.
struct Responsibilities {
    std::size_t n = 0;
    int k = 0;
    std::vector<double> values; // n x k, row-major; rows sum to 1

    double at(std::size_t row, int comp) const {
        return values[row * static_cast<std::size_t>(k) + static_cast<std::size_t>(comp)];
    }
};

// k-means++-style seeding: first mean is a uniform row draw, each subsequent
// mean is drawn with probability proportional to the squared distance from
// the nearest already-chosen mean. Variances start at the per-dimension
// sample variance (floored), weights at 1/k. Fully determined by
// (cfg.seed, restart).
MixtureModel init_model(const AnalysisMatrix& data, const FitConfig& cfg, int restart);

// E-step; returns the log-likelihood of `model` on `data`.
double e_step(const AnalysisMatrix& data, const MixtureModel& model, Responsibilities& resp);

// M-step with variance flooring. Throws FitFailure naming the component if
// any component's total responsibility falls below 1e-10.
MixtureModel m_step(const AnalysisMatrix& data, const Responsibilities& resp,
                    const FitConfig& cfg, int* floor_clamps = nullptr);

struct EmRunStats {
    int iterations = 0; // number of M-steps applied
    bool converged = false;
    int reseeds = 0;        // empty-cluster rescues
    int floor_clamps = 0;   // variance entries clamped across all M-steps
    int trace_decreases = 0;
    std::vector<double> trace; // log-likelihood after each E-step
    double final_lnl() const { return trace.empty() ? 0.0 : trace.back(); }
};

// One EM run from an explicit starting model; `model` is updated in place.
// Empty components are re-seeded from the lowest-density row up to 3 times;
// the run aborts (FitFailure) on the fourth event.
EmRunStats em_run(const AnalysisMatrix& data, const FitConfig& cfg, MixtureModel& model);

struct FitResult {
    MixtureModel model; // components in canonical (sorted) order
    CriterionValue criterion;
    int iterations = 0;
    bool converged = false;
    int restart_index = 0;
    std::vector<double> lnl_trace; // winning restart
    int floor_clamps = 0;
    int reseeds = 0;
    int trace_decreases = 0;
    std::vector<EmRunStats> restart_stats; // every restart, index-aligned
    std::vector<std::string> restart_errors;
};

// Runs cfg.restarts independent EM runs and returns the one with the highest
// final log-likelihood (ties broken by lowest restart index).
FitResult fit(const AnalysisMatrix& data, const FitConfig& cfg);

// Run metadata: config echo, criterion, iteration count, winning trace.
std::string fit_meta_to_json(const FitResult& result, const FitConfig& cfg);

} // namespace smx

#endif
