#include "surveymix/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace smx {

using nlohmann::json;

const char* status_name(Status s) {
    switch (s) {
    case Status::Ok: return "ok";
    case Status::IoError: return "io_error";
    case Status::ParseError: return "parse_error";
    case Status::InvalidArgument: return "invalid_argument";
    case Status::NumericError: return "numeric_error";
    case Status::EmptyResult: return "empty_result";
    case Status::Unsupported: return "unsupported";
    case Status::FitFailure: return "fit_failure";
    }
    return "unknown";
}

const char* party_group_name(PartyGroup g) {
    switch (g) {
    case PartyGroup::Democrat: return "democrat";
    case PartyGroup::Independent: return "independent";
    case PartyGroup::Republican: return "republican";
    }
    return "unknown";
}

PartyGrouping PartyGrouping::standard() {
    PartyGrouping g;
    g.group_of_code = {PartyGroup::Democrat,    PartyGroup::Democrat,
                       PartyGroup::Democrat,    PartyGroup::Independent,
                       PartyGroup::Republican,  PartyGroup::Republican,
                       PartyGroup::Republican};
    return g;
}

void PartyGrouping::validate() const {
    // group_of_code is a fixed-size array, so coverage of 1..7 is structural;
    // nothing further to check.
}

PartyGroup map_party(int code, const PartyGrouping& grouping) {
    if (code < 1 || code > 7)
        raise(Status::InvalidArgument,
              "party code " + std::to_string(code) + " outside 1..7");
    return grouping.group_of_code[static_cast<std::size_t>(code - 1)];
}

void IssueSchema::validate() const {
    if (column.empty()) raise(Status::InvalidArgument, "issue column name is empty");
    if (valid_min > valid_max)
        raise(Status::InvalidArgument, "issue '" + column + "': empty valid range");
    if (valid_min < kScaleMin || valid_max > kScaleMax)
        raise(Status::InvalidArgument,
              "issue '" + column + "': valid range must lie within 1..7");
    if (in_range(na_code) || in_range(dk_code))
        raise(Status::InvalidArgument,
              "issue '" + column + "': NA/DK codes must lie outside the valid range");
}

void SchemaConfig::validate() const {
    if (issues.empty()) raise(Status::InvalidArgument, "schema declares no issues");
    if (party_column.empty()) raise(Status::InvalidArgument, "schema has no party column");
    if (year_column.empty()) raise(Status::InvalidArgument, "schema has no year column");
    std::set<std::string> seen;
    for (const auto& issue : issues) {
        issue.validate();
        if (!seen.insert(issue.column).second)
            raise(Status::InvalidArgument, "duplicate issue column '" + issue.column + "'");
    }
}

std::optional<std::size_t> SchemaConfig::find_issue(const std::string& name) const {
    for (std::size_t i = 0; i < issues.size(); ++i)
        if (issues[i].label == name) return i;
    for (std::size_t i = 0; i < issues.size(); ++i)
        if (issues[i].column == name) return i;
    return std::nullopt;
}

namespace {

PartyGrouping grouping_from_json(const json& j) {
    PartyGrouping g;
    std::array<bool, 7> assigned{};
    for (auto group : kPartyGroups) {
        const std::string key = party_group_name(group);
        if (!j.contains(key))
            raise(Status::ParseError, "party_grouping is missing \"" + key + "\"");
        for (const auto& code_j : j.at(key)) {
            int code = code_j.get<int>();
            if (code < 1 || code > 7)
                raise(Status::ParseError, "party_grouping code outside 1..7");
            if (assigned[static_cast<std::size_t>(code - 1)])
                raise(Status::ParseError,
                      "party_grouping assigns code " + std::to_string(code) + " twice");
            assigned[static_cast<std::size_t>(code - 1)] = true;
            g.group_of_code[static_cast<std::size_t>(code - 1)] = group;
        }
    }
    for (int code = 1; code <= 7; ++code)
        if (!assigned[static_cast<std::size_t>(code - 1)])
            raise(Status::ParseError,
                  "party_grouping leaves code " + std::to_string(code) + " unassigned");
    return g;
}

json grouping_to_json(const PartyGrouping& g) {
    json out;
    for (auto group : kPartyGroups) {
        json codes = json::array();
        for (int code = 1; code <= 7; ++code)
            if (g.group_of_code[static_cast<std::size_t>(code - 1)] == group)
                codes.push_back(code);
        out[party_group_name(group)] = codes;
    }
    return out;
}

} // namespace

SchemaConfig parse_schema_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        raise(Status::ParseError, std::string("schema config: ") + e.what());
    }
    SchemaConfig cfg;
    try {
        for (const auto& issue_j : j.at("issues")) {
            IssueSchema issue;
            issue.column = issue_j.at("column").get<std::string>();
            issue.label = issue_j.value("label", issue.column);
            issue.na_code = issue_j.value("na_code", 0);
            issue.dk_code = issue_j.value("dk_code", 9);
            issue.valid_min = issue_j.value("valid_min", kScaleMin);
            issue.valid_max = issue_j.value("valid_max", kScaleMax);
            cfg.issues.push_back(std::move(issue));
        }
        cfg.party_column = j.at("party_column").get<std::string>();
        cfg.year_column = j.at("year_column").get<std::string>();
        if (j.contains("party_grouping")) cfg.grouping = grouping_from_json(j.at("party_grouping"));
    } catch (const json::exception& e) {
        raise(Status::ParseError, std::string("schema config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

SchemaConfig load_schema_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Status::IoError, "cannot open schema config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_schema_config(buf.str());
}

std::string schema_config_to_json(const SchemaConfig& schema) {
    json j;
    j["issues"] = json::array();
    for (const auto& issue : schema.issues) {
        j["issues"].push_back({{"column", issue.column},
                               {"label", issue.label},
                               {"na_code", issue.na_code},
                               {"dk_code", issue.dk_code},
                               {"valid_min", issue.valid_min},
                               {"valid_max", issue.valid_max}});
    }
    j["party_column"] = schema.party_column;
    j["year_column"] = schema.year_column;
    j["party_grouping"] = grouping_to_json(schema.grouping);
    return j.dump(2) + "\n";
}

namespace {

// RFC-4180 with LF or CRLF line ends; quoted fields may contain separators,
// doubled quotes and newlines. A UTF-8 BOM on the first line is skipped.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;
    std::size_t i = 0;

    if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
        row_started = false;
    };

    for (; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            in_quotes = true;
            row_started = true;
            break;
        case ',':
            end_field();
            row_started = true;
            break;
        case '\r':
            break;
        case '\n':
            end_row();
            break;
        default:
            field.push_back(c);
            row_started = true;
            break;
        }
    }
    if (in_quotes) raise(Status::ParseError, "CSV ends inside a quoted field");
    if (row_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

std::optional<int> parse_int_cell(const std::string& raw) {
    std::size_t begin = raw.find_first_not_of(" \t");
    if (begin == std::string::npos) return std::nullopt;
    std::size_t end = raw.find_last_not_of(" \t") + 1;
    int value = 0;
    auto [ptr, ec] = std::from_chars(raw.data() + begin, raw.data() + end, value);
    if (ec != std::errc{} || ptr != raw.data() + end) return std::nullopt;
    return value;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        raise(Status::ParseError, "CSV header has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

} // namespace

SurveyDataset load_survey_text(const std::string& csv_text, const SchemaConfig& schema) {
    schema.validate();
    auto rows = parse_csv(csv_text);
    if (rows.empty()) raise(Status::ParseError, "CSV has no header row");
    const auto& header = rows.front();

    std::size_t year_col = column_index(header, schema.year_column);
    std::size_t party_col = column_index(header, schema.party_column);
    std::vector<std::size_t> issue_cols;
    issue_cols.reserve(schema.issues.size());
    for (const auto& issue : schema.issues) issue_cols.push_back(column_index(header, issue.column));

    SurveyDataset ds;
    ds.schema = schema;
    auto& rep = ds.report;

    auto cell = [&](const std::vector<std::string>& row, std::size_t col) -> std::string {
        return col < row.size() ? row[col] : std::string();
    };
    auto count_unparsed = [&](const std::string& column, const std::string& raw) {
        // An empty cell is plain missing data, not a parse diagnostic.
        if (raw.find_first_not_of(" \t") == std::string::npos) return;
        ++rep.cells_unparsed;
        ++rep.cells_unparsed_by_column[column];
    };

    for (std::size_t r = 1; r < rows.size(); ++r) {
        ++rep.rows_read;
        const auto& raw_row = rows[r];

        auto year_raw = cell(raw_row, year_col);
        auto year = parse_int_cell(year_raw);
        if (!year || *year < kMinYear) {
            if (!year) count_unparsed(schema.year_column, year_raw);
            ++rep.rows_dropped_bad_year;
            continue;
        }

        SurveyRecord rec;
        rec.year = *year;

        auto party_raw = cell(raw_row, party_col);
        rec.party_code = parse_int_cell(party_raw);
        if (!rec.party_code) count_unparsed(schema.party_column, party_raw);

        rec.answers.reserve(schema.issues.size());
        for (std::size_t c = 0; c < issue_cols.size(); ++c) {
            auto raw = cell(raw_row, issue_cols[c]);
            auto value = parse_int_cell(raw);
            if (!value) count_unparsed(schema.issues[c].column, raw);
            rec.answers.push_back(value);
        }
        ds.rows.push_back(std::move(rec));
        ++rep.rows_kept;
    }
    return ds;
}

SurveyDataset load_survey(const std::string& csv_path, const SchemaConfig& schema) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) raise(Status::IoError, "cannot open CSV '" + csv_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_survey_text(buf.str(), schema);
}

SurveyDataset impute_neutral(const SurveyDataset& ds) {
    ds.schema.validate();
    SurveyDataset out = ds;
    for (auto& rec : out.rows) {
        for (std::size_t c = 0; c < rec.answers.size(); ++c) {
            auto& answer = rec.answers[c];
            if (!answer) continue;
            const auto& issue = out.schema.issues[c];
            if (*answer == issue.na_code) {
                answer = kNeutralAnswer;
                ++out.report.imputed_na;
            } else if (*answer == issue.dk_code) {
                answer = kNeutralAnswer;
                ++out.report.imputed_dk;
            } else if (!issue.in_range(*answer)) {
                // Imputed midpoints from an earlier pass stay put.
                if (*answer == kNeutralAnswer) continue;
                answer = std::nullopt;
                ++out.report.invalidated_out_of_range;
            }
        }
    }
    return out;
}

std::string load_report_to_json(const LoadReport& report) {
    json j;
    j["rows_read"] = report.rows_read;
    j["rows_kept"] = report.rows_kept;
    j["rows_dropped_bad_year"] = report.rows_dropped_bad_year;
    j["cells_unparsed"] = report.cells_unparsed;
    j["cells_unparsed_by_column"] = report.cells_unparsed_by_column;
    j["imputed_na"] = report.imputed_na;
    j["imputed_dk"] = report.imputed_dk;
    j["invalidated_out_of_range"] = report.invalidated_out_of_range;
    return j.dump(2) + "\n";
}

std::string build_report_to_json(const BuildReport& report) {
    json j;
    j["rows_in"] = report.rows_in;
    j["rows_kept"] = report.rows_kept;
    j["dropped_year_out_of_range"] = report.dropped_year_out_of_range;
    j["dropped_missing_party"] = report.dropped_missing_party;
    j["dropped_missing_issue"] = report.dropped_missing_issue;
    return j.dump(2) + "\n";
}

void AnalysisMatrix::validate() const {
    if (n == 0 || dim == 0) raise(Status::InvalidArgument, "matrix must be nonempty");
    if (positions.size() != n * dim || party_group.size() != n ||
        party_strength.size() != n || year.size() != n || issue_labels.size() != dim)
        raise(Status::InvalidArgument, "matrix field sizes disagree");
    for (double v : positions)
        if (!(v >= kScaleMin && v <= kScaleMax))
            raise(Status::InvalidArgument, "matrix entry outside [1, 7]");
}

AnalysisMatrix build_matrix(const SurveyDataset& ds, const std::vector<std::string>& issues,
                            YearRange years, BuildReport* report) {
    if (issues.empty()) raise(Status::InvalidArgument, "no issues selected");
    std::vector<std::size_t> selected;
    selected.reserve(issues.size());
    for (const auto& name : issues) {
        auto idx = ds.schema.find_issue(name);
        if (!idx) raise(Status::InvalidArgument, "unknown issue '" + name + "'");
        selected.push_back(*idx);
    }

    AnalysisMatrix m;
    m.dim = selected.size();
    for (auto idx : selected) m.issue_labels.push_back(ds.schema.issues[idx].label);

    BuildReport rep;
    rep.rows_in = ds.rows.size();

    for (const auto& rec : ds.rows) {
        if (!years.contains(rec.year)) {
            ++rep.dropped_year_out_of_range;
            continue;
        }
        if (!rec.party_code || *rec.party_code < 1 || *rec.party_code > 7) {
            ++rep.dropped_missing_party;
            continue;
        }
        bool complete = true;
        for (auto idx : selected) {
            const auto& answer = rec.answers[idx];
            if (!answer || *answer < kScaleMin || *answer > kScaleMax) {
                complete = false;
                break;
            }
        }
        if (!complete) {
            ++rep.dropped_missing_issue;
            continue;
        }
        for (auto idx : selected) m.positions.push_back(static_cast<double>(*rec.answers[idx]));
        m.party_strength.push_back(*rec.party_code);
        m.party_group.push_back(map_party(*rec.party_code, ds.schema.grouping));
        m.year.push_back(rec.year);
        ++rep.rows_kept;
    }
    m.n = rep.rows_kept;
    if (report) *report = rep;
    if (m.n == 0)
        raise(Status::EmptyResult, "no rows survive the issue/party/year filters");
    m.validate();
    return m;
}

std::vector<int> matrix_years(const AnalysisMatrix& m) {
    std::set<int> years(m.year.begin(), m.year.end());
    return {years.begin(), years.end()};
}

AnalysisMatrix filter_years(const AnalysisMatrix& m, YearRange years) {
    AnalysisMatrix out;
    out.dim = m.dim;
    out.issue_labels = m.issue_labels;
    for (std::size_t i = 0; i < m.n; ++i) {
        if (!years.contains(m.year[i])) continue;
        auto row = m.row(i);
        out.positions.insert(out.positions.end(), row.begin(), row.end());
        out.party_group.push_back(m.party_group[i]);
        out.party_strength.push_back(m.party_strength[i]);
        out.year.push_back(m.year[i]);
    }
    out.n = out.year.size();
    if (out.n == 0) raise(Status::EmptyResult, "no rows in the selected years");
    return out;
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string format_position(double v) {
    double rounded = std::round(v);
    if (rounded == v) return std::to_string(static_cast<long long>(rounded));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string matrix_to_csv(const AnalysisMatrix& m) {
    std::string out = "year,party";
    for (const auto& label : m.issue_labels) out += "," + csv_escape(label);
    out += "\n";
    for (std::size_t i = 0; i < m.n; ++i) {
        out += std::to_string(m.year[i]);
        out += ",";
        out += std::to_string(m.party_strength[i]);
        for (double v : m.row(i)) {
            out += ",";
            out += format_position(v);
        }
        out += "\n";
    }
    return out;
}

} // namespace smx
