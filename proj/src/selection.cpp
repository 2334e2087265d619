#include "surveymix/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "surveymix/rng.hpp"

namespace smx {

using nlohmann::json;

namespace {

AnalysisMatrix select_rows(const AnalysisMatrix& data, const std::vector<std::size_t>& rows) {
    AnalysisMatrix out;
    out.dim = data.dim;
    out.issue_labels = data.issue_labels;
    out.n = rows.size();
    out.positions.reserve(rows.size() * data.dim);
    for (auto r : rows) {
        auto row = data.row(r);
        out.positions.insert(out.positions.end(), row.begin(), row.end());
        out.party_group.push_back(data.party_group[r]);
        out.party_strength.push_back(data.party_strength[r]);
        out.year.push_back(data.year[r]);
    }
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace

SweepReport sweep_k(const AnalysisMatrix& data, int k_min, int k_max, const FitConfig& cfg) {
    if (k_min < 1 || k_min > k_max)
        raise(Status::InvalidArgument, "sweep needs 1 <= k_min <= k_max");
    SweepReport report;
    report.n = static_cast<long long>(data.n);
    report.dim = static_cast<int>(data.dim);
    report.base_seed = cfg.seed;

    for (int k = k_min; k <= k_max; ++k) {
        SweepEntry entry;
        entry.k = k;
        FitConfig run_cfg = cfg;
        run_cfg.k = k;
        run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(k);
        try {
            FitResult fitted = fit(data, run_cfg);
            entry.ok = true;
            entry.log_likelihood = fitted.criterion.log_likelihood;
            entry.aic = fitted.criterion.aic;
            entry.bic = fitted.criterion.bic;
            entry.num_params = fitted.criterion.num_params;
            entry.iterations = fitted.iterations;
            entry.converged = fitted.converged;
            entry.restart_index = fitted.restart_index;
        } catch (const Error& e) {
            entry.error = e.what();
        }
        report.entries.push_back(std::move(entry));
    }
    report.selected_k = select_local_min(report, &report.selection_rule);
    return report;
}

int select_local_min(const SweepReport& report, std::string* rule) {
    std::vector<const SweepEntry*> ok;
    for (const auto& entry : report.entries)
        if (entry.ok) ok.push_back(&entry);
    if (ok.empty()) raise(Status::EmptyResult, "no successful fits in the sweep");

    auto set_rule = [&](const std::string& r) {
        if (rule) *rule = r;
    };

    const std::size_t last = ok.size() - 1;
    for (std::size_t i = 0; i < ok.size(); ++i) {
        bool below_left = i == 0 || ok[i]->aic < ok[i - 1]->aic;
        bool below_right = i == last || ok[i]->aic < ok[i + 1]->aic;
        if (!(below_left && below_right)) continue;
        if (i == last && i > 0) break; // a right-endpoint-only minimum is no minimum
        set_rule(i == 0 && last > 0 ? "local-min (left endpoint)" : "local-min");
        return ok[i]->k;
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < ok.size(); ++i)
        if (ok[i]->aic < ok[best]->aic) best = i;
    set_rule("global-min (no interior local min)");
    return ok[best]->k;
}

std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed) {
    if (folds < 2) raise(Status::InvalidArgument, "folds must be >= 2");
    if (n < static_cast<std::size_t>(folds))
        raise(Status::InvalidArgument, "fewer rows than folds");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, stream::kShuffle));
    rng.shuffle(order);

    std::vector<int> fold_of(n, 0);
    std::size_t base = n / static_cast<std::size_t>(folds);
    std::size_t extra = n % static_cast<std::size_t>(folds);
    std::size_t pos = 0;
    for (int f = 0; f < folds; ++f) {
        std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) fold_of[order[pos++]] = f;
    }
    return fold_of;
}

XvalReport cross_validate(const AnalysisMatrix& data, const std::vector<int>& ks, int folds,
                          const FitConfig& cfg) {
    if (ks.empty()) raise(Status::InvalidArgument, "no cluster counts requested");
    for (std::size_t i = 1; i < ks.size(); ++i)
        if (ks[i] <= ks[i - 1])
            raise(Status::InvalidArgument, "cluster counts must be strictly increasing");
    int k_max = ks.back();
    if (data.n < static_cast<std::size_t>(folds) * static_cast<std::size_t>(k_max))
        raise(Status::InvalidArgument, "need n >= folds * k_max");

    XvalReport report;
    report.folds = folds;
    report.n = static_cast<long long>(data.n);
    report.dim = static_cast<int>(data.dim);
    report.base_seed = cfg.seed;
    report.ks = ks;

    auto fold_of = fold_assignment(data.n, folds, cfg.seed);
    for (int fold = 0; fold < folds; ++fold) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < data.n; ++i)
            (fold_of[i] == fold ? test_rows : train_rows).push_back(i);
        auto train = select_rows(data, train_rows);
        auto test = select_rows(data, test_rows);

        for (int k : ks) {
            XvalCell cell;
            cell.k = k;
            cell.fold = fold;
            FitConfig run_cfg = cfg;
            run_cfg.k = k;
            run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(k);
            try {
                FitResult fitted = fit(train, run_cfg);
                cell.ok = true;
                cell.train_lnl = fitted.criterion.log_likelihood;
                cell.test_lnl = log_likelihood(test, fitted.model);
                cell.test_aic =
                    2.0 * num_params(k, static_cast<int>(data.dim)) - 2.0 * cell.test_lnl;
            } catch (const Error& e) {
                cell.error = e.what();
            }
            report.cells.push_back(std::move(cell));
        }
    }

    for (int k : ks) {
        XvalAggregate agg;
        agg.k = k;
        for (const auto& cell : report.cells) {
            if (cell.k != k || !cell.ok) continue;
            ++agg.folds_ok;
            agg.sum_test_lnl += cell.test_lnl;
            agg.mean_test_aic += cell.test_aic;
        }
        if (agg.folds_ok > 0) {
            agg.mean_test_lnl = agg.sum_test_lnl / agg.folds_ok;
            agg.mean_test_aic /= agg.folds_ok;
        }
        report.aggregates.push_back(agg);
    }
    return report;
}

std::string sweep_to_json(const SweepReport& report) {
    json j;
    j["kind"] = "sweep";
    j["n"] = report.n;
    j["D"] = report.dim;
    j["seed"] = report.base_seed;
    j["selected_k"] = report.selected_k;
    j["selection_rule"] = report.selection_rule;
    json entries = json::array();
    for (const auto& e : report.entries) {
        json ej;
        ej["k"] = e.k;
        ej["ok"] = e.ok;
        if (e.ok) {
            ej["log_likelihood"] = e.log_likelihood;
            ej["aic"] = e.aic;
            ej["bic"] = e.bic;
            ej["num_params"] = e.num_params;
            ej["iterations"] = e.iterations;
            ej["converged"] = e.converged;
            ej["restart_index"] = e.restart_index;
        } else {
            ej["error"] = e.error;
        }
        entries.push_back(ej);
    }
    j["entries"] = entries;
    return j.dump(2) + "\n";
}

std::string sweep_to_csv(const SweepReport& report) {
    std::string out = "k,status,log_likelihood,aic,bic,num_params,iterations,converged\n";
    for (const auto& e : report.entries) {
        out += std::to_string(e.k);
        if (e.ok) {
            out += ",ok," + format_double(e.log_likelihood) + "," + format_double(e.aic) +
                   "," + format_double(e.bic) + "," + std::to_string(e.num_params) + "," +
                   std::to_string(e.iterations) + "," + (e.converged ? "true" : "false");
        } else {
            out += ",failed,,,,,,";
        }
        out += "\n";
    }
    return out;
}

std::string xval_to_json(const XvalReport& report) {
    json j;
    j["kind"] = "xval";
    j["folds"] = report.folds;
    j["n"] = report.n;
    j["D"] = report.dim;
    j["seed"] = report.base_seed;
    j["ks"] = report.ks;
    json cells = json::array();
    for (const auto& c : report.cells) {
        json cj;
        cj["k"] = c.k;
        cj["fold"] = c.fold;
        cj["ok"] = c.ok;
        if (c.ok) {
            cj["train_lnl"] = c.train_lnl;
            cj["test_lnl"] = c.test_lnl;
            cj["test_aic"] = c.test_aic;
        } else {
            cj["error"] = c.error;
        }
        cells.push_back(cj);
    }
    j["cells"] = cells;
    json aggs = json::array();
    for (const auto& a : report.aggregates)
        aggs.push_back({{"k", a.k},
                        {"folds_ok", a.folds_ok},
                        {"mean_test_lnl", a.mean_test_lnl},
                        {"sum_test_lnl", a.sum_test_lnl},
                        {"mean_test_aic", a.mean_test_aic}});
    j["aggregates"] = aggs;
    return j.dump(2) + "\n";
}

std::string xval_to_csv(const XvalReport& report) {
    std::string out = "k,fold,status,train_lnl,test_lnl,test_aic\n";
    for (const auto& c : report.cells) {
        out += std::to_string(c.k) + "," + std::to_string(c.fold);
        if (c.ok) {
            out += ",ok," + format_double(c.train_lnl) + "," + format_double(c.test_lnl) +
                   "," + format_double(c.test_aic);
        } else {
            out += ",failed,,,";
        }
        out += "\n";
    }
    return out;
}

} // namespace smx
