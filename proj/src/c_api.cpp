#include "surveymix/c_api.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>

#include <json.hpp>

#include "surveymix/analysis.hpp"
#include "surveymix/dataset.hpp"
#include "surveymix/em.hpp"
#include "surveymix/mixture.hpp"
#include "surveymix/report.hpp"
#include "surveymix/selection.hpp"
#include "surveymix/synth.hpp"

// Handle definitions. Each wraps the core object plus whatever diagnostics
// the pipeline attaches to it.
struct smx_dataset {
    smx::SurveyDataset ds;
};

struct smx_matrix {
    smx::AnalysisMatrix m;
    smx::BuildReport report;
    bool has_report = false;
};

struct smx_model {
    smx::MixtureModel model;
};

struct smx_fit_result {
    smx::FitResult result;
    smx::FitConfig config;
};

struct smx_analysis {
    smx::AnalysisBundle bundle;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

int status_of(const smx::Error& e) {
    switch (e.status()) {
    case smx::Status::Ok: return SMX_OK;
    case smx::Status::IoError: return SMX_E_IO;
    case smx::Status::ParseError: return SMX_E_PARSE;
    case smx::Status::InvalidArgument: return SMX_E_INVALID;
    case smx::Status::NumericError: return SMX_E_NUMERIC;
    case smx::Status::EmptyResult: return SMX_E_EMPTY;
    case smx::Status::Unsupported: return SMX_E_UNSUPPORTED;
    case smx::Status::FitFailure: return SMX_E_FIT;
    }
    return SMX_E_INTERNAL;
}

template <class Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return SMX_OK;
    } catch (const smx::Error& e) {
        set_error(e.what());
        return status_of(e);
    } catch (const std::bad_alloc&) {
        set_error("out of memory");
        return SMX_E_INTERNAL;
    } catch (const std::exception& e) {
        set_error(e.what());
        return SMX_E_INTERNAL;
    }
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(bool ok, const char* what) {
    if (!ok) smx::raise(smx::Status::InvalidArgument, what);
}

smx::FitConfig parse_config(const char* config_json) {
    if (!config_json || !*config_json) return smx::FitConfig{};
    return smx::fit_config_from_json(config_json);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        std::string item = text.substr(start, comma - start);
        std::size_t b = item.find_first_not_of(" \t");
        if (b != std::string::npos) {
            std::size_t e = item.find_last_not_of(" \t") + 1;
            out.push_back(item.substr(b, e - b));
        }
        start = comma + 1;
    }
    return out;
}

smx::AnalysisOptions parse_analysis_options(const char* options_json) {
    smx::AnalysisOptions options;
    if (!options_json || !*options_json) return options;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(options_json);
    } catch (const nlohmann::json::exception& e) {
        smx::raise(smx::Status::ParseError, std::string("analysis options: ") + e.what());
    }
    if (j.contains("center") && !j.at("center").is_null())
        options.center = j.at("center").get<std::vector<double>>();
    if (j.contains("mapping") && !j.at("mapping").is_null()) {
        smx::PartyClusterMapping mapping;
        mapping.democrat_cluster = j.at("mapping").at("democrat").get<int>();
        mapping.republican_cluster = j.at("mapping").at("republican").get<int>();
        options.mapping = mapping;
    }
    return options;
}

} // namespace

extern "C" {

const char* smx_version(void) { return SMX_VERSION_STRING; }

const char* smx_status_name(int status) {
    switch (status) {
    case SMX_OK: return "ok";
    case SMX_E_IO: return "io_error";
    case SMX_E_PARSE: return "parse_error";
    case SMX_E_INVALID: return "invalid_argument";
    case SMX_E_NUMERIC: return "numeric_error";
    case SMX_E_EMPTY: return "empty_result";
    case SMX_E_UNSUPPORTED: return "unsupported";
    case SMX_E_FIT: return "fit_failure";
    case SMX_E_INTERNAL: return "internal_error";
    }
    return "unknown";
}

const char* smx_last_error(void) { return g_last_error.c_str(); }

void smx_string_free(char* s) { delete[] s; }

/* ---- survey data ------------------------------------------------------ */

int smx_dataset_load_csv(const char* csv_path, const char* schema_json, smx_dataset** out) {
    return guarded([&] {
        require(csv_path && schema_json && out, "null argument");
        auto schema = smx::parse_schema_config(schema_json);
        auto handle = std::make_unique<smx_dataset>();
        handle->ds = smx::load_survey(csv_path, schema);
        *out = handle.release();
    });
}

int smx_dataset_impute(const smx_dataset* in, smx_dataset** out) {
    return guarded([&] {
        require(in && out, "null argument");
        auto handle = std::make_unique<smx_dataset>();
        handle->ds = smx::impute_neutral(in->ds);
        *out = handle.release();
    });
}

long smx_dataset_rows(const smx_dataset* ds) {
    return ds ? static_cast<long>(ds->ds.rows.size()) : -1;
}

int smx_dataset_report_json(const smx_dataset* ds, char** out) {
    return guarded([&] {
        require(ds && out, "null argument");
        *out = copy_string(smx::load_report_to_json(ds->ds.report));
    });
}

void smx_dataset_free(smx_dataset* ds) { delete ds; }

/* ---- analysis matrix --------------------------------------------------- */

int smx_matrix_build(const smx_dataset* ds, const char* issues, int year_min, int year_max,
                     smx_matrix** out) {
    return guarded([&] {
        require(ds && out, "null argument");
        std::vector<std::string> names;
        if (issues && *issues) {
            names = split_list(issues);
        } else {
            for (const auto& issue : ds->ds.schema.issues) names.push_back(issue.label);
        }
        auto handle = std::make_unique<smx_matrix>();
        handle->m = smx::build_matrix(ds->ds, names, smx::YearRange{year_min, year_max},
                                      &handle->report);
        handle->has_report = true;
        *out = handle.release();
    });
}

int smx_matrix_from_generator(const char* generator_json, smx_matrix** out) {
    return guarded([&] {
        require(generator_json && out, "null argument");
        auto spec = smx::generator_from_json(generator_json);
        auto handle = std::make_unique<smx_matrix>();
        handle->m = smx::sample(spec).matrix;
        *out = handle.release();
    });
}

long smx_matrix_rows(const smx_matrix* m) { return m ? static_cast<long>(m->m.n) : -1; }

int smx_matrix_dims(const smx_matrix* m) { return m ? static_cast<int>(m->m.dim) : -1; }

int smx_matrix_report_json(const smx_matrix* m, char** out) {
    return guarded([&] {
        require(m && out, "null argument");
        require(m->has_report, "matrix has no build report");
        *out = copy_string(smx::build_report_to_json(m->report));
    });
}

int smx_matrix_years_json(const smx_matrix* m, char** out) {
    return guarded([&] {
        require(m && out, "null argument");
        nlohmann::json j = smx::matrix_years(m->m);
        *out = copy_string(j.dump());
    });
}

int smx_matrix_filter_years(const smx_matrix* m, int year_min, int year_max, smx_matrix** out) {
    return guarded([&] {
        require(m && out, "null argument");
        auto handle = std::make_unique<smx_matrix>();
        handle->m = smx::filter_years(m->m, smx::YearRange{year_min, year_max});
        *out = handle.release();
    });
}

int smx_matrix_to_csv(const smx_matrix* m, char** out) {
    return guarded([&] {
        require(m && out, "null argument");
        *out = copy_string(smx::matrix_to_csv(m->m));
    });
}

void smx_matrix_free(smx_matrix* m) { delete m; }

/* ---- mixture models ---------------------------------------------------- */

int smx_model_from_json(const char* json, smx_model** out) {
    return guarded([&] {
        require(json && out, "null argument");
        auto handle = std::make_unique<smx_model>();
        handle->model = smx::model_from_json(json);
        *out = handle.release();
    });
}

int smx_model_to_json(const smx_model* model, char** out) {
    return guarded([&] {
        require(model && out, "null argument");
        *out = copy_string(smx::model_to_json(model->model));
    });
}

int smx_model_k(const smx_model* model) { return model ? model->model.k : -1; }

int smx_model_dims(const smx_model* model) { return model ? model->model.dim : -1; }

void smx_model_free(smx_model* model) { delete model; }

/* ---- fitting ----------------------------------------------------------- */

int smx_fit(const smx_matrix* m, const char* config_json, smx_fit_result** out) {
    return guarded([&] {
        require(m && out, "null argument");
        auto handle = std::make_unique<smx_fit_result>();
        handle->config = parse_config(config_json);
        handle->result = smx::fit(m->m, handle->config);
        *out = handle.release();
    });
}

int smx_fit_model(const smx_fit_result* fit, smx_model** out) {
    return guarded([&] {
        require(fit && out, "null argument");
        auto handle = std::make_unique<smx_model>();
        handle->model = fit->result.model;
        *out = handle.release();
    });
}

int smx_fit_meta_json(const smx_fit_result* fit, char** out) {
    return guarded([&] {
        require(fit && out, "null argument");
        *out = copy_string(smx::fit_meta_to_json(fit->result, fit->config));
    });
}

void smx_fit_result_free(smx_fit_result* fit) { delete fit; }

/* ---- model selection --------------------------------------------------- */

int smx_sweep(const smx_matrix* m, int k_min, int k_max, const char* config_json,
              char** report_json) {
    return guarded([&] {
        require(m && report_json, "null argument");
        auto report = smx::sweep_k(m->m, k_min, k_max, parse_config(config_json));
        *report_json = copy_string(smx::sweep_to_json(report));
    });
}

int smx_cross_validate(const smx_matrix* m, const char* ks, int folds, const char* config_json,
                       char** report_json) {
    return guarded([&] {
        require(m && ks && report_json, "null argument");
        std::vector<int> k_list;
        for (const auto& item : split_list(ks)) k_list.push_back(std::stoi(item));
        auto report = smx::cross_validate(m->m, k_list, folds, parse_config(config_json));
        *report_json = copy_string(smx::xval_to_json(report));
    });
}

/* ---- analytics --------------------------------------------------------- */

int smx_analyze(const smx_matrix* m, const smx_model* model, const char* options_json,
                smx_analysis** out) {
    return guarded([&] {
        require(m && model && out, "null argument");
        auto handle = std::make_unique<smx_analysis>();
        handle->bundle = smx::analyze(m->m, model->model, parse_analysis_options(options_json));
        *out = handle.release();
    });
}

int smx_analysis_json(const smx_analysis* a, char** out) {
    return guarded([&] {
        require(a && out, "null argument");
        *out = copy_string(smx::analysis_to_json(a->bundle));
    });
}

int smx_analysis_table(const smx_analysis* a, const char* table, const char* format,
                       char** out) {
    return guarded([&] {
        require(a && table && format && out, "null argument");
        std::string name = table;
        std::string fmt = format;
        require(fmt == "csv" || fmt == "markdown", "format must be csv or markdown");
        std::string result;
        if (name == "composition") {
            result = fmt == "markdown" ? smx::composition_to_markdown(a->bundle)
                                       : smx::composition_to_csv(a->bundle);
        } else if (name == "precision_recall") {
            result = fmt == "markdown" ? smx::precision_recall_to_markdown(a->bundle)
                                       : smx::precision_recall_to_csv(a->bundle);
        } else if (name == "party_means") {
            require(fmt == "csv", "party_means is only available as csv");
            result = smx::party_means_to_csv(a->bundle);
        } else {
            smx::raise(smx::Status::InvalidArgument, "unknown table '" + name + "'");
        }
        *out = copy_string(result);
    });
}

void smx_analysis_free(smx_analysis* a) { delete a; }

int smx_distance_series(const char* per_year_json, char** report_json) {
    return guarded([&] {
        require(per_year_json && report_json, "null argument");
        auto series = smx::distance_report_from_json(per_year_json);
        *report_json = copy_string(smx::distance_to_json(series));
    });
}

int smx_report_csv(const char* report_json, char** out) {
    return guarded([&] {
        require(report_json && out, "null argument");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(report_json);
        } catch (const nlohmann::json::exception& e) {
            smx::raise(smx::Status::ParseError, std::string("report JSON: ") + e.what());
        }
        std::string kind = j.value("kind", std::string());
        if (kind == "distance_series") {
            *out = copy_string(smx::distance_to_csv(smx::distance_from_json(report_json)));
            return;
        }
        if (kind == "sweep" || kind == "xval") {
            // Rebuild the CSV directly from the JSON fields.
            std::string csv;
            if (kind == "sweep") {
                csv = "k,status,log_likelihood,aic,bic,num_params,iterations,converged\n";
                for (const auto& e : j.at("entries")) {
                    csv += std::to_string(e.at("k").get<int>());
                    if (e.value("ok", false)) {
                        char buf[160];
                        std::snprintf(buf, sizeof(buf), ",ok,%.10g,%.10g,%.10g,%d,%d,%s",
                                      e.at("log_likelihood").get<double>(),
                                      e.at("aic").get<double>(), e.at("bic").get<double>(),
                                      e.at("num_params").get<int>(),
                                      e.at("iterations").get<int>(),
                                      e.at("converged").get<bool>() ? "true" : "false");
                        csv += buf;
                    } else {
                        csv += ",failed,,,,,,";
                    }
                    csv += "\n";
                }
            } else {
                csv = "k,fold,status,train_lnl,test_lnl,test_aic\n";
                for (const auto& c : j.at("cells")) {
                    csv += std::to_string(c.at("k").get<int>()) + "," +
                           std::to_string(c.at("fold").get<int>());
                    if (c.value("ok", false)) {
                        char buf[120];
                        std::snprintf(buf, sizeof(buf), ",ok,%.10g,%.10g,%.10g",
                                      c.at("train_lnl").get<double>(),
                                      c.at("test_lnl").get<double>(),
                                      c.at("test_aic").get<double>());
                        csv += buf;
                    } else {
                        csv += ",failed,,,";
                    }
                    csv += "\n";
                }
            }
            *out = copy_string(csv);
            return;
        }
        smx::raise(smx::Status::InvalidArgument, "report kind '" + kind + "' has no CSV form");
    });
}

/* ---- rendering --------------------------------------------------------- */

int smx_render_scatter(const smx_matrix* m, const smx_model* model, const char* plot_json,
                       char** svg_out) {
    return guarded([&] {
        require(m && model && svg_out, "null argument");
        auto spec = smx::plot_spec_from_json(plot_json ? plot_json : "");
        *svg_out = copy_string(smx::render_scatter(m->m, model->model, spec));
    });
}

int smx_render_density(const smx_model* model, const char* plot_json, char** svg_out) {
    return guarded([&] {
        require(model && svg_out, "null argument");
        auto spec = smx::plot_spec_from_json(plot_json ? plot_json : "");
        *svg_out = copy_string(smx::render_density(model->model, spec));
    });
}

int smx_render_curves(const char* report_json, const char* which, const char* plot_json,
                      char** svg_out) {
    return guarded([&] {
        require(report_json && svg_out, "null argument");
        auto spec = smx::plot_spec_from_json(plot_json ? plot_json : "");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(report_json);
        } catch (const nlohmann::json::exception& e) {
            smx::raise(smx::Status::ParseError, std::string("report JSON: ") + e.what());
        }
        std::string kind = j.value("kind", std::string());
        smx::LineChart chart;
        if (kind == "sweep") {
            smx::SweepReport report;
            for (const auto& e : j.at("entries")) {
                smx::SweepEntry entry;
                entry.k = e.at("k").get<int>();
                entry.ok = e.value("ok", false);
                if (entry.ok) {
                    entry.log_likelihood = e.at("log_likelihood").get<double>();
                    entry.aic = e.at("aic").get<double>();
                    entry.bic = e.at("bic").get<double>();
                }
                report.entries.push_back(entry);
            }
            chart = smx::chart_from_sweep(report);
        } else if (kind == "xval") {
            smx::XvalReport report;
            for (const auto& a : j.at("aggregates")) {
                smx::XvalAggregate agg;
                agg.k = a.at("k").get<int>();
                agg.folds_ok = a.at("folds_ok").get<int>();
                agg.mean_test_lnl = a.at("mean_test_lnl").get<double>();
                agg.sum_test_lnl = a.at("sum_test_lnl").get<double>();
                agg.mean_test_aic = a.at("mean_test_aic").get<double>();
                report.aggregates.push_back(agg);
            }
            chart = smx::chart_from_xval(report);
        } else if (kind == "distance_series") {
            auto series = smx::distance_from_json(report_json);
            auto [separation, center] = smx::charts_from_distance(series);
            std::string sel = which ? which : "separation";
            if (sel == "center") chart = center;
            else if (sel == "separation") chart = separation;
            else smx::raise(smx::Status::InvalidArgument,
                            "which must be \"separation\" or \"center\"");
        } else {
            smx::raise(smx::Status::InvalidArgument,
                       "report kind '" + kind + "' has no curve form");
        }
        *svg_out = copy_string(smx::render_curves(chart, spec));
    });
}

/* ---- synthetic data ---------------------------------------------------- */

int smx_generator_expand(const char* generator_json, char** specs_json) {
    return guarded([&] {
        require(generator_json && specs_json, "null argument");
        auto specs = smx::expand_generator_specs(generator_json);
        nlohmann::json out = nlohmann::json::array();
        for (const auto& spec : specs)
            out.push_back(nlohmann::json::parse(smx::generator_to_json(spec)));
        *specs_json = copy_string(out.dump(2) + "\n");
    });
}

int smx_generator_schema(const char* generator_json, char** schema_json) {
    return guarded([&] {
        require(generator_json && schema_json, "null argument");
        auto spec = smx::generator_from_json(generator_json);
        *schema_json = copy_string(smx::generator_schema_json(spec));
    });
}

} // extern "C"
