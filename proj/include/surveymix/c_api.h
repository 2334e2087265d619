/* surveymix C API: mixture-model clustering for 7-point opinion survey data.
 *
 * Conventions:
 *   - Every fallible call returns a status code (SMX_OK on success) and
 *     writes its result through out-parameters.
 *   - On failure, smx_last_error() returns a message describing the most
 *     recent error on the calling thread.
 *   - Objects are opaque handles; release them with the matching *_free.
 *   - Strings returned through char** out-parameters are heap-allocated;
 *     release them with smx_string_free.
 *   - Structured inputs and outputs (configs, reports) are JSON documents;
 *     the schemas are documented in the README.
 */

#ifndef SURVEYMIX_C_API_H
#define SURVEYMIX_C_API_H

#ifdef _WIN32
#define SMX_API __declspec(dllexport)
#else
#define SMX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define SMX_VERSION_STRING "1.0.0"

enum {
    SMX_OK = 0,
    SMX_E_IO = 1,
    SMX_E_PARSE = 2,
    SMX_E_INVALID = 3,
    SMX_E_NUMERIC = 4,
    SMX_E_EMPTY = 5,
    SMX_E_UNSUPPORTED = 6,
    SMX_E_FIT = 7,
    SMX_E_INTERNAL = 8
};

typedef struct smx_dataset smx_dataset;
typedef struct smx_matrix smx_matrix;
typedef struct smx_model smx_model;
typedef struct smx_fit_result smx_fit_result;
typedef struct smx_analysis smx_analysis;

SMX_API const char* smx_version(void);
SMX_API const char* smx_status_name(int status);
/* Message for the most recent failure on this thread; valid until the next
 * failing smx_* call on the same thread. */
SMX_API const char* smx_last_error(void);
SMX_API void smx_string_free(char* s);

/* ---- survey data ------------------------------------------------------ */

/* Loads an RFC-4180 CSV using a schema config JSON (issue columns with their
 * NA/DK codes, the party and year columns, the party grouping). */
SMX_API int smx_dataset_load_csv(const char* csv_path, const char* schema_json,
                                 smx_dataset** out);
/* NA/DK answers -> 4; out-of-range answers become missing. */
SMX_API int smx_dataset_impute(const smx_dataset* in, smx_dataset** out);
SMX_API long smx_dataset_rows(const smx_dataset* ds);
SMX_API int smx_dataset_report_json(const smx_dataset* ds, char** out);
SMX_API void smx_dataset_free(smx_dataset* ds);

/* ---- analysis matrix --------------------------------------------------- */

/* issues: comma-separated issue labels (NULL or "" = all schema issues).
 * year_min == year_max == 0 selects all years. */
SMX_API int smx_matrix_build(const smx_dataset* ds, const char* issues, int year_min,
                             int year_max, smx_matrix** out);
/* Samples a synthetic electorate from a generator spec JSON. */
SMX_API int smx_matrix_from_generator(const char* generator_json, smx_matrix** out);
SMX_API long smx_matrix_rows(const smx_matrix* m);
SMX_API int smx_matrix_dims(const smx_matrix* m);
/* Row-filter diagnostics from the build (JSON). */
SMX_API int smx_matrix_report_json(const smx_matrix* m, char** out);
/* Distinct years present, ascending (JSON array). */
SMX_API int smx_matrix_years_json(const smx_matrix* m, char** out);
SMX_API int smx_matrix_filter_years(const smx_matrix* m, int year_min, int year_max,
                                    smx_matrix** out);
/* CSV in the same schema smx_dataset_load_csv reads. */
SMX_API int smx_matrix_to_csv(const smx_matrix* m, char** out);
SMX_API void smx_matrix_free(smx_matrix* m);

/* ---- mixture models ---------------------------------------------------- */

SMX_API int smx_model_from_json(const char* json, smx_model** out);
SMX_API int smx_model_to_json(const smx_model* model, char** out);
SMX_API int smx_model_k(const smx_model* model);
SMX_API int smx_model_dims(const smx_model* model);
SMX_API void smx_model_free(smx_model* model);

/* ---- fitting ----------------------------------------------------------- */

/* config JSON: {"k":2,"variance_floor":0,"max_iterations":500,
 * "tolerance":1e-8,"restarts":10,"seed":0}; absent fields use defaults. */
SMX_API int smx_fit(const smx_matrix* m, const char* config_json, smx_fit_result** out);
SMX_API int smx_fit_model(const smx_fit_result* fit, smx_model** out);
/* Run metadata: criterion values, iterations, restart provenance, trace. */
SMX_API int smx_fit_meta_json(const smx_fit_result* fit, char** out);
SMX_API void smx_fit_result_free(smx_fit_result* fit);

/* ---- model selection --------------------------------------------------- */

SMX_API int smx_sweep(const smx_matrix* m, int k_min, int k_max, const char* config_json,
                      char** report_json);
/* ks: comma-separated cluster counts, e.g. "1,2,3,4". */
SMX_API int smx_cross_validate(const smx_matrix* m, const char* ks, int folds,
                               const char* config_json, char** report_json);

/* ---- analytics --------------------------------------------------------- */

/* options JSON (may be NULL): {"center":[..], "mapping":{"democrat":0,
 * "republican":1}}. */
SMX_API int smx_analyze(const smx_matrix* m, const smx_model* model,
                        const char* options_json, smx_analysis** out);
SMX_API int smx_analysis_json(const smx_analysis* a, char** out);
/* table: "composition" | "precision_recall" | "party_means";
 * format: "csv" | "markdown". */
SMX_API int smx_analysis_table(const smx_analysis* a, const char* table,
                               const char* format, char** out);
SMX_API void smx_analysis_free(smx_analysis* a);

/* Per-year two-cluster distance metrics; see README for the input schema. */
SMX_API int smx_distance_series(const char* per_year_json, char** report_json);

/* CSV rendering of a sweep / cross-validation / distance-series report JSON
 * (dispatches on its "kind" field). */
SMX_API int smx_report_csv(const char* report_json, char** out);

/* ---- rendering --------------------------------------------------------- */

/* plot JSON (may be NULL): {"jitter":0.25,"width":720,"height":540,"seed":0}. */
SMX_API int smx_render_scatter(const smx_matrix* m, const smx_model* model,
                               const char* plot_json, char** svg_out);
SMX_API int smx_render_density(const smx_model* model, const char* plot_json,
                               char** svg_out);
/* Curve chart for a sweep / xval / distance-series report JSON. For distance
 * series, `which` selects "separation" or "center"; pass NULL otherwise. */
SMX_API int smx_render_curves(const char* report_json, const char* which,
                              const char* plot_json, char** svg_out);

/* ---- synthetic data ---------------------------------------------------- */

/* Expands a generator file (single spec or {"years":[...]}) into a JSON
 * array of single-year specs with seeds resolved. */
SMX_API int smx_generator_expand(const char* generator_json, char** specs_json);
/* Schema config JSON matching the CSV emitted for this generator spec. */
SMX_API int smx_generator_schema(const char* generator_json, char** schema_json);

#ifdef __cplusplus
}
#endif

#endif /* SURVEYMIX_C_API_H */
