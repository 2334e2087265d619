#include "surveymix/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "surveymix/rng.hpp"

namespace smx {

using nlohmann::json;

namespace {
constexpr double kEmptyClusterThreshold = 1e-10;
constexpr int kMaxReseeds = 3;
constexpr double kLog2Pi = 1.8378770664093454836;

// Per-dimension population variance of the data, clamped to the floor.
std::vector<double> global_variance(const AnalysisMatrix& data, double floor) {
    std::vector<double> mean(data.dim, 0.0);
    for (std::size_t i = 0; i < data.n; ++i) {
        auto row = data.row(i);
        for (std::size_t d = 0; d < data.dim; ++d) mean[d] += row[d];
    }
    for (auto& m : mean) m /= static_cast<double>(data.n);
    std::vector<double> var(data.dim, 0.0);
    for (std::size_t i = 0; i < data.n; ++i) {
        auto row = data.row(i);
        for (std::size_t d = 0; d < data.dim; ++d) {
            double diff = row[d] - mean[d];
            var[d] += diff * diff;
        }
    }
    for (auto& v : var) v = std::max(v / static_cast<double>(data.n), floor);
    return var;
}

// E-step returning, additionally, each row's log mixture density.
double e_step_full(const AnalysisMatrix& data, const MixtureModel& model,
                   Responsibilities& resp, std::vector<double>& row_log_density) {
    const std::size_t n = data.n;
    const int k = model.k;
    const std::size_t dim = data.dim;
    resp.n = n;
    resp.k = k;
    resp.values.assign(n * static_cast<std::size_t>(k), 0.0);
    row_log_density.assign(n, 0.0);

    // Per-component constants.
    std::vector<double> log_w(static_cast<std::size_t>(k));
    std::vector<double> log_norm(static_cast<std::size_t>(k));
    std::vector<double> half_inv_var(static_cast<std::size_t>(k) * dim);
    for (int i = 0; i < k; ++i) {
        double w = model.weights[static_cast<std::size_t>(i)];
        log_w[static_cast<std::size_t>(i)] =
            w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity();
        double log_det = 0.0;
        auto var = model.variance(i);
        for (std::size_t d = 0; d < dim; ++d) {
            log_det += std::log(var[d]);
            half_inv_var[static_cast<std::size_t>(i) * dim + d] = 0.5 / var[d];
        }
        log_norm[static_cast<std::size_t>(i)] =
            -0.5 * (static_cast<double>(dim) * kLog2Pi + log_det);
    }

    double total = 0.0;
    std::vector<double> terms(static_cast<std::size_t>(k));
    for (std::size_t r = 0; r < n; ++r) {
        auto x = data.row(r);
        double max_term = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < k; ++i) {
            auto mean = model.mean(i);
            double quad = 0.0;
            const double* hv = &half_inv_var[static_cast<std::size_t>(i) * dim];
            for (std::size_t d = 0; d < dim; ++d) {
                double diff = x[d] - mean[d];
                quad += diff * diff * hv[d];
            }
            double t = log_w[static_cast<std::size_t>(i)] +
                       log_norm[static_cast<std::size_t>(i)] - quad;
            terms[static_cast<std::size_t>(i)] = t;
            max_term = std::max(max_term, t);
        }
        if (!std::isfinite(max_term))
            raise(Status::NumericError,
                  "degenerate posterior at row " + std::to_string(r));
        double sum = 0.0;
        for (int i = 0; i < k; ++i)
            sum += std::exp(terms[static_cast<std::size_t>(i)] - max_term);
        double lse = max_term + std::log(sum);
        row_log_density[r] = lse;
        total += lse;
        double* out = &resp.values[r * static_cast<std::size_t>(k)];
        for (int i = 0; i < k; ++i)
            out[i] = std::exp(terms[static_cast<std::size_t>(i)] - lse);
    }
    return total;
}

} // namespace

void FitConfig::validate() const {
    if (k < 1) raise(Status::InvalidArgument, "k must be >= 1");
    if (restarts < 1) raise(Status::InvalidArgument, "restarts must be >= 1");
    if (!(tolerance > 0.0)) raise(Status::InvalidArgument, "tolerance must be > 0");
    if (max_iterations < 1) raise(Status::InvalidArgument, "max_iterations must be >= 1");
    if (variance_floor < 0.0) raise(Status::InvalidArgument, "variance_floor must be >= 0");
}

FitConfig fit_config_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        raise(Status::ParseError, std::string("fit config: ") + e.what());
    }
    FitConfig cfg;
    try {
        cfg.k = j.value("k", cfg.k);
        cfg.variance_floor = j.value("variance_floor", cfg.variance_floor);
        cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
        cfg.tolerance = j.value("tolerance", cfg.tolerance);
        cfg.restarts = j.value("restarts", cfg.restarts);
        cfg.seed = j.value("seed", cfg.seed);
    } catch (const json::exception& e) {
        raise(Status::ParseError, std::string("fit config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string fit_config_to_json(const FitConfig& cfg) {
    json j;
    j["k"] = cfg.k;
    j["variance_floor"] = cfg.variance_floor;
    j["max_iterations"] = cfg.max_iterations;
    j["tolerance"] = cfg.tolerance;
    j["restarts"] = cfg.restarts;
    j["seed"] = cfg.seed;
    return j.dump();
}

MixtureModel init_model(const AnalysisMatrix& data, const FitConfig& cfg, int restart) {
    cfg.validate();
    const auto k = static_cast<std::size_t>(cfg.k);
    if (data.n < k)
        raise(Status::InvalidArgument, "k = " + std::to_string(cfg.k) +
                                           " infeasible with n = " + std::to_string(data.n));

    Rng rng(derive_seed(cfg.seed, stream::kInit, static_cast<std::uint64_t>(restart)));

    std::vector<std::size_t> chosen;
    chosen.reserve(k);
    chosen.push_back(rng.index(data.n));

    std::vector<double> min_dist2(data.n, std::numeric_limits<double>::infinity());
    auto account = [&](std::size_t center) {
        auto c = data.row(center);
        for (std::size_t i = 0; i < data.n; ++i) {
            auto x = data.row(i);
            double d2 = 0.0;
            for (std::size_t d = 0; d < data.dim; ++d) {
                double diff = x[d] - c[d];
                d2 += diff * diff;
            }
            min_dist2[i] = std::min(min_dist2[i], d2);
        }
    };
    account(chosen.back());

    while (chosen.size() < k) {
        double total = 0.0;
        for (double d2 : min_dist2) total += d2;
        std::size_t next;
        if (total > 0.0) {
            double u = rng.uniform() * total;
            double acc = 0.0;
            next = data.n - 1;
            for (std::size_t i = 0; i < data.n; ++i) {
                acc += min_dist2[i];
                if (u < acc) {
                    next = i;
                    break;
                }
            }
        } else {
            // All rows coincide with a chosen center; fall back to uniform.
            next = rng.index(data.n);
        }
        chosen.push_back(next);
        account(next);
    }

    MixtureModel model;
    model.k = cfg.k;
    model.dim = static_cast<int>(data.dim);
    model.weights.assign(k, 1.0 / static_cast<double>(cfg.k));
    auto base_var = global_variance(data, cfg.effective_floor());
    for (auto idx : chosen) {
        auto row = data.row(idx);
        model.means.insert(model.means.end(), row.begin(), row.end());
        model.variances.insert(model.variances.end(), base_var.begin(), base_var.end());
    }
    return model;
}

double e_step(const AnalysisMatrix& data, const MixtureModel& model, Responsibilities& resp) {
    model.validate();
    if (static_cast<int>(data.dim) != model.dim)
        raise(Status::InvalidArgument, "data dimension disagrees with model");
    std::vector<double> row_log_density;
    return e_step_full(data, model, resp, row_log_density);
}

MixtureModel m_step(const AnalysisMatrix& data, const Responsibilities& resp,
                    const FitConfig& cfg, int* floor_clamps) {
    const std::size_t n = data.n;
    const int k = resp.k;
    const std::size_t dim = data.dim;
    if (resp.n != n) raise(Status::InvalidArgument, "responsibilities do not match data");

    std::vector<double> totals(static_cast<std::size_t>(k), 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (int i = 0; i < k; ++i) totals[static_cast<std::size_t>(i)] += resp.at(r, i);
    for (int i = 0; i < k; ++i)
        if (totals[static_cast<std::size_t>(i)] < kEmptyClusterThreshold)
            raise(Status::FitFailure, "component " + std::to_string(i) + " is empty");

    MixtureModel model;
    model.k = k;
    model.dim = static_cast<int>(dim);
    model.weights.resize(static_cast<std::size_t>(k));
    model.means.assign(static_cast<std::size_t>(k) * dim, 0.0);
    model.variances.assign(static_cast<std::size_t>(k) * dim, 0.0);

    for (int i = 0; i < k; ++i)
        model.weights[static_cast<std::size_t>(i)] =
            totals[static_cast<std::size_t>(i)] / static_cast<double>(n);

    for (std::size_t r = 0; r < n; ++r) {
        auto x = data.row(r);
        for (int i = 0; i < k; ++i) {
            double w = resp.at(r, i);
            double* mean = &model.means[static_cast<std::size_t>(i) * dim];
            for (std::size_t d = 0; d < dim; ++d) mean[d] += w * x[d];
        }
    }
    for (int i = 0; i < k; ++i) {
        double* mean = &model.means[static_cast<std::size_t>(i) * dim];
        for (std::size_t d = 0; d < dim; ++d) mean[d] /= totals[static_cast<std::size_t>(i)];
    }

    // Second pass keeps the variance update numerically safe near collapsed
    // components (squared deviations, not moment differences).
    for (std::size_t r = 0; r < n; ++r) {
        auto x = data.row(r);
        for (int i = 0; i < k; ++i) {
            double w = resp.at(r, i);
            const double* mean = &model.means[static_cast<std::size_t>(i) * dim];
            double* var = &model.variances[static_cast<std::size_t>(i) * dim];
            for (std::size_t d = 0; d < dim; ++d) {
                double diff = x[d] - mean[d];
                var[d] += w * diff * diff;
            }
        }
    }
    const double floor = cfg.effective_floor();
    int clamps = 0;
    for (int i = 0; i < k; ++i) {
        double* var = &model.variances[static_cast<std::size_t>(i) * dim];
        for (std::size_t d = 0; d < dim; ++d) {
            var[d] /= totals[static_cast<std::size_t>(i)];
            if (var[d] < floor) {
                var[d] = floor;
                ++clamps;
            }
        }
    }
    if (floor_clamps) *floor_clamps += clamps;
    return model;
}

EmRunStats em_run(const AnalysisMatrix& data, const FitConfig& cfg, MixtureModel& model) {
    cfg.validate();
    model.validate();
    EmRunStats stats;
    Responsibilities resp;
    std::vector<double> row_log_density;
    auto reseed_var = global_variance(data, cfg.effective_floor());

    double prev = std::numeric_limits<double>::quiet_NaN();
    while (true) {
        double lnl = e_step_full(data, model, resp, row_log_density);

        // Rescue starved components before they break the M-step.
        std::vector<int> empty;
        for (int i = 0; i < model.k; ++i) {
            double total = 0.0;
            for (std::size_t r = 0; r < data.n; ++r) total += resp.at(r, i);
            if (total < kEmptyClusterThreshold) empty.push_back(i);
        }
        if (!empty.empty()) {
            if (stats.reseeds >= kMaxReseeds)
                raise(Status::FitFailure,
                      "restart aborted: component starved after " +
                          std::to_string(kMaxReseeds) + " re-seeds");
            ++stats.reseeds;
            auto worst = static_cast<std::size_t>(
                std::min_element(row_log_density.begin(), row_log_density.end()) -
                row_log_density.begin());
            for (int i : empty) {
                auto row = data.row(worst);
                std::copy(row.begin(), row.end(),
                          model.means.begin() + static_cast<std::size_t>(i) * data.dim);
                std::copy(reseed_var.begin(), reseed_var.end(),
                          model.variances.begin() + static_cast<std::size_t>(i) * data.dim);
                model.weights[static_cast<std::size_t>(i)] = 1.0 / model.k;
            }
            double wsum = 0.0;
            for (double w : model.weights) wsum += w;
            for (auto& w : model.weights) w /= wsum;
            prev = std::numeric_limits<double>::quiet_NaN();
            continue;
        }

        stats.trace.push_back(lnl);
        if (!std::isnan(prev)) {
            if (lnl < prev - 1e-9 * (1.0 + std::fabs(prev))) ++stats.trace_decreases;
            if (std::fabs(lnl - prev) <= cfg.tolerance * (1.0 + std::fabs(lnl))) {
                stats.converged = true;
                break;
            }
        }
        if (stats.iterations >= cfg.max_iterations) break;
        prev = lnl;
        model = m_step(data, resp, cfg, &stats.floor_clamps);
        ++stats.iterations;
    }
    return stats;
}

FitResult fit(const AnalysisMatrix& data, const FitConfig& cfg) {
    cfg.validate();
    if (data.n < static_cast<std::size_t>(cfg.k))
        raise(Status::InvalidArgument, "k = " + std::to_string(cfg.k) +
                                           " infeasible with n = " + std::to_string(data.n));

    FitResult result;
    result.restart_stats.resize(static_cast<std::size_t>(cfg.restarts));
    result.restart_errors.resize(static_cast<std::size_t>(cfg.restarts));
    bool have_best = false;
    MixtureModel best_model;
    EmRunStats best_stats;
    int best_restart = 0;

    for (int restart = 0; restart < cfg.restarts; ++restart) {
        MixtureModel model = init_model(data, cfg, restart);
        try {
            auto stats = em_run(data, cfg, model);
            result.restart_stats[static_cast<std::size_t>(restart)] = stats;
            if (!have_best || stats.final_lnl() > best_stats.final_lnl()) {
                have_best = true;
                best_model = model;
                best_stats = stats;
                best_restart = restart;
            }
        } catch (const Error& e) {
            if (e.status() != Status::FitFailure) throw;
            result.restart_errors[static_cast<std::size_t>(restart)] = e.what();
        }
    }
    if (!have_best) {
        std::string detail;
        for (const auto& err : result.restart_errors)
            if (!err.empty()) detail = err;
        raise(Status::FitFailure,
              "all " + std::to_string(cfg.restarts) + " restarts failed (" + detail + ")");
    }

    result.model = sort_components(best_model);
    result.criterion = criteria(best_stats.final_lnl(), cfg.k, static_cast<int>(data.dim),
                                static_cast<long long>(data.n));
    result.iterations = best_stats.iterations;
    result.converged = best_stats.converged;
    result.restart_index = best_restart;
    result.lnl_trace = best_stats.trace;
    result.floor_clamps = best_stats.floor_clamps;
    result.reseeds = best_stats.reseeds;
    result.trace_decreases = best_stats.trace_decreases;
    return result;
}

std::string fit_meta_to_json(const FitResult& result, const FitConfig& cfg) {
    json j;
    j["config"] = json::parse(fit_config_to_json(cfg));
    j["log_likelihood"] = result.criterion.log_likelihood;
    j["aic"] = result.criterion.aic;
    j["bic"] = result.criterion.bic;
    j["num_params"] = result.criterion.num_params;
    j["n"] = result.criterion.n;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    j["restart_index"] = result.restart_index;
    j["reseeds"] = result.reseeds;
    j["floor_clamps"] = result.floor_clamps;
    j["lnl_trace"] = result.lnl_trace;
    json failures = json::array();
    for (std::size_t i = 0; i < result.restart_errors.size(); ++i)
        if (!result.restart_errors[i].empty())
            failures.push_back({{"restart", i}, {"error", result.restart_errors[i]}});
    j["failed_restarts"] = failures;
    return j.dump(2) + "\n";
}

} // namespace smx
