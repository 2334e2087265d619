#ifndef SURVEYMIX_ANALYSIS_HPP
#define SURVEYMIX_ANALYSIS_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "surveymix/mixture.hpp"

namespace smx {

// Maximum-responsibility component per row; ties go to the lowest index.
std::vector<int> hard_assign(const AnalysisMatrix& data, const MixtureModel& model);

// Unweighted mean position of the rows self-identified with `group`.
std::vector<double> party_mean(const AnalysisMatrix& data, PartyGroup group);

struct ClusterComposition {
    int index = 0;
    std::vector<double> center;
    std::vector<double> variance;
    std::size_t count = 0;
    double share = 0.0;
    std::array<std::size_t, 3> party_count{}; // Democrat, Independent, Republican
    std::array<double, 3> party_pct{};        // within-cluster percentages
};

struct CompositionTable {
    std::size_t n = 0;
    std::vector<ClusterComposition> clusters;
    std::array<std::size_t, 3> party_totals{};
};

CompositionTable composition(const AnalysisMatrix& data, const std::vector<int>& labels,
                             const MixtureModel& model);

struct PartyClusterMapping {
    int democrat_cluster = -1;
    int republican_cluster = -1;
};

// Assigns each party to the cluster whose center is nearest the party's mean
// position; nullopt when both parties land on the same cluster or a party is
// absent from the data.
std::optional<PartyClusterMapping> default_party_mapping(const AnalysisMatrix& data,
                                                         const MixtureModel& model);

struct PrRow {
    PartyGroup party;
    int cluster = 0;
    std::size_t true_positive = 0;
    std::size_t cluster_total = 0; // includes Independents classified there
    std::size_t party_total = 0;
    std::optional<double> precision; // nullopt when the mapped cluster is empty
    double recall = 0.0;
};

struct PrMetrics {
    PartyClusterMapping mapping;
    std::vector<PrRow> rows; // Democrat row then Republican row
    std::vector<std::array<std::size_t, 3>> confusion; // [cluster][party group]
    std::size_t n = 0;
};

// Precision: share of the mapped cluster that belongs to the party.
// Recall: share of the party classified into the mapped cluster.
// Independents appear in cluster totals but have no rows of their own.
PrMetrics precision_recall(const std::vector<int>& labels,
                           const std::vector<PartyGroup>& parties,
                           const PartyClusterMapping& mapping, int k);

struct PcaProjection {
    std::vector<double> axes;      // 2 x D, row-major, orthonormal rows
    std::vector<double> projected; // n x 2
    std::array<double, 2> explained_variance{};
    std::vector<double> column_means; // centering applied before projection
};

// Projects rows onto the top-2 eigenvectors of the sample covariance. Sign
// convention: the largest-magnitude entry of each axis is made positive.
PcaProjection pca_project(const AnalysisMatrix& data);

struct DistanceYear {
    int year = 0;
    double cluster_separation = 0.0;
    double party_separation = 0.0;
    std::array<double, 2> cluster_center_dist{};
    double democrat_center_dist = 0.0;
    double republican_center_dist = 0.0;
};

struct DistanceSeries {
    std::vector<double> center;
    std::vector<DistanceYear> rows;
};

struct YearSnapshot {
    int year = 0;
    MixtureModel model; // k must be 2
    std::vector<double> democrat_mean;
    std::vector<double> republican_mean;
};

// Euclidean distances per year: between the two cluster means, between the
// two party means, and from each of the four means to `center` (empty =
// scale midpoint (4,...,4)).
DistanceSeries distance_report(const std::vector<YearSnapshot>& years,
                               std::vector<double> center = {});

struct AnalysisOptions {
    std::vector<double> center; // empty = scale midpoint
    std::optional<PartyClusterMapping> mapping; // override the default pairing
    std::optional<PartyGrouping> grouping;      // echoed in reports
};

// Everything the fit pipeline reports for one (matrix, model) pair.
struct AnalysisBundle {
    MixtureModel model;
    std::vector<int> labels;
    CompositionTable table;
    std::array<std::optional<std::vector<double>>, 3> group_means; // by PartyGroup
    std::optional<PrMetrics> pr;
    std::string pr_note; // why pr is absent, when it is
    std::optional<PcaProjection> pca; // present when dim > 2
    std::vector<double> center;
    std::vector<double> center_distances; // per cluster
    std::vector<std::string> issue_labels;
    PartyGrouping grouping_used;
    std::size_t n = 0;
};

AnalysisBundle analyze(const AnalysisMatrix& data, const MixtureModel& model,
                       const AnalysisOptions& options = {});

std::string analysis_to_json(const AnalysisBundle& bundle);
std::string composition_to_csv(const AnalysisBundle& bundle);
std::string composition_to_markdown(const AnalysisBundle& bundle);
std::string precision_recall_to_csv(const AnalysisBundle& bundle);
std::string precision_recall_to_markdown(const AnalysisBundle& bundle);
std::string party_means_to_csv(const AnalysisBundle& bundle);

std::string distance_to_json(const DistanceSeries& series);
std::string distance_to_csv(const DistanceSeries& series); // year,metric,value
DistanceSeries distance_from_json(const std::string& json_text);

// Input: {"center":[..]?, "years":[{"year":..,"model":{..},"democrat_mean":[..],
// "republican_mean":[..]}..]}. Used by the C API and the CLI.
DistanceSeries distance_report_from_json(const std::string& per_year_json);

} // namespace smx

#endif
