#ifndef SURVEYMIX_DATASET_HPP
#define SURVEYMIX_DATASET_HPP

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "surveymix/error.hpp"

namespace smx {

// Answers equal to the schema's NA/DK codes are replaced by the scale
// midpoint: those respondents are treated as neutral on the issue.
inline constexpr int kNeutralAnswer = 4;
inline constexpr int kScaleMin = 1;
inline constexpr int kScaleMax = 7;
inline constexpr int kMinYear = 1948;

enum class PartyGroup { Democrat = 0, Independent = 1, Republican = 2 };
inline constexpr std::array<PartyGroup, 3> kPartyGroups = {
    PartyGroup::Democrat, PartyGroup::Independent, PartyGroup::Republican};

const char* party_group_name(PartyGroup g);

// Assignment of the 7-point party-identification codes to the three groups.
// Default: 1-3 Democrat, 4 Independent, 5-7 Republican. Leaners are folded
// into their party; override via the schema config's "party_grouping".
struct PartyGrouping {
    std::array<PartyGroup, 7> group_of_code; // index = code - 1

    static PartyGrouping standard();
    void validate() const; // must cover codes 1..7
};

PartyGroup map_party(int code, const PartyGrouping& grouping = PartyGrouping::standard());

struct IssueSchema {
    std::string column;  // CSV header name
    std::string label;   // display label, defaults to column
    int na_code = 0;
    int dk_code = 9;
    int valid_min = kScaleMin;
    int valid_max = kScaleMax;

    void validate() const;
    bool in_range(int code) const { return code >= valid_min && code <= valid_max; }
};

struct SchemaConfig {
    std::vector<IssueSchema> issues;
    std::string party_column;
    std::string year_column;
    PartyGrouping grouping = PartyGrouping::standard();

    void validate() const;
    // Index into issues by label (preferred) or column name.
    std::optional<std::size_t> find_issue(const std::string& name) const;
};

SchemaConfig parse_schema_config(const std::string& json_text);
SchemaConfig load_schema_config(const std::string& path);
std::string schema_config_to_json(const SchemaConfig& schema);

struct SurveyRecord {
    int year = 0;
    std::optional<int> party_code;           // raw 7-point code when parseable
    std::vector<std::optional<int>> answers; // aligned with SchemaConfig::issues
};

struct LoadReport {
    std::size_t rows_read = 0;
    std::size_t rows_kept = 0;
    std::size_t rows_dropped_bad_year = 0; // unparseable, missing, or pre-1948 year
    std::size_t cells_unparsed = 0;        // non-integer cells in integer columns
    std::map<std::string, std::size_t> cells_unparsed_by_column;
    // Filled by impute_neutral:
    std::size_t imputed_na = 0;
    std::size_t imputed_dk = 0;
    std::size_t invalidated_out_of_range = 0; // out-of-range answers marked missing
};

struct SurveyDataset {
    SchemaConfig schema;
    std::vector<SurveyRecord> rows;
    LoadReport report;
};

// Reads an RFC-4180 CSV (UTF-8, header row). Cells are parsed as integers;
// an unparseable cell leaves the field missing and bumps a diagnostic
// counter. Rows without a usable year are dropped.
SurveyDataset load_survey(const std::string& csv_path, const SchemaConfig& schema);
SurveyDataset load_survey_text(const std::string& csv_text, const SchemaConfig& schema);

// NA/DK codes -> 4; in-range answers unchanged; anything else becomes
// missing. Applying it twice is a no-op.
SurveyDataset impute_neutral(const SurveyDataset& ds);

std::string load_report_to_json(const LoadReport& report);

struct BuildReport {
    std::size_t rows_in = 0;
    std::size_t rows_kept = 0;
    std::size_t dropped_year_out_of_range = 0;
    std::size_t dropped_missing_party = 0;
    std::size_t dropped_missing_issue = 0;
};

std::string build_report_to_json(const BuildReport& report);

// Complete-case matrix of issue positions on the 1..7 scale.
struct AnalysisMatrix {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> positions; // n x dim, row-major, entries in [1, 7]
    std::vector<PartyGroup> party_group;
    std::vector<int> party_strength; // raw 1..7 party-ID code
    std::vector<int> year;
    std::vector<std::string> issue_labels;

    std::span<const double> row(std::size_t i) const {
        return {positions.data() + i * dim, dim};
    }
    void validate() const;
};

struct YearRange {
    int min = 0;
    int max = 0; // min == max == 0 selects all years

    bool all() const { return min == 0 && max == 0; }
    bool contains(int y) const { return all() || (y >= min && y <= max); }
    static YearRange single(int y) { return {y, y}; }
};

// Keeps exactly the rows that have every selected issue present with a value
// in [1, 7], a valid party code, and a year inside the range. Row order is
// preserved. Throws EmptyResult when nothing survives.
AnalysisMatrix build_matrix(const SurveyDataset& ds, const std::vector<std::string>& issues,
                            YearRange years = {}, BuildReport* report = nullptr);

std::vector<int> matrix_years(const AnalysisMatrix& m); // distinct, sorted
AnalysisMatrix filter_years(const AnalysisMatrix& m, YearRange years);

// Emits the same CSV schema load_survey reads: year, party, one column per
// issue. Integral positions are written as integers, so a discretized matrix
// round-trips through load_survey/build_matrix unchanged.
std::string matrix_to_csv(const AnalysisMatrix& m);

} // namespace smx

#endif
