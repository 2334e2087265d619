#include "surveymix/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <json.hpp>

namespace smx {

using nlohmann::json;

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        d2 += diff * diff;
    }
    return d2;
}

double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string format_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string vector_text(std::span<const double> v) {
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_short(v[i]);
    }
    return out + ")";
}

} // namespace

std::vector<int> hard_assign(const AnalysisMatrix& data, const MixtureModel& model) {
    model.validate();
    if (static_cast<int>(data.dim) != model.dim)
        raise(Status::InvalidArgument, "data dimension disagrees with model");
    std::vector<int> labels(data.n, 0);
    for (std::size_t r = 0; r < data.n; ++r) {
        auto x = data.row(r);
        double best = -std::numeric_limits<double>::infinity();
        int best_i = 0;
        for (int i = 0; i < model.k; ++i) {
            double w = model.weights[static_cast<std::size_t>(i)];
            if (w <= 0.0) continue;
            double t = std::log(w) + log_component_density(x, model.mean(i), model.variance(i));
            if (t > best) {
                best = t;
                best_i = i;
            }
        }
        labels[r] = best_i;
    }
    return labels;
}

std::vector<double> party_mean(const AnalysisMatrix& data, PartyGroup group) {
    std::vector<double> mean(data.dim, 0.0);
    std::size_t count = 0;
    for (std::size_t r = 0; r < data.n; ++r) {
        if (data.party_group[r] != group) continue;
        auto x = data.row(r);
        for (std::size_t d = 0; d < data.dim; ++d) mean[d] += x[d];
        ++count;
    }
    if (count == 0)
        raise(Status::EmptyResult,
              std::string("no rows in group ") + party_group_name(group));
    for (auto& m : mean) m /= static_cast<double>(count);
    return mean;
}

CompositionTable composition(const AnalysisMatrix& data, const std::vector<int>& labels,
                             const MixtureModel& model) {
    if (labels.size() != data.n)
        raise(Status::InvalidArgument, "labels do not align with data rows");
    CompositionTable table;
    table.n = data.n;
    table.clusters.resize(static_cast<std::size_t>(model.k));
    for (int i = 0; i < model.k; ++i) {
        auto& cluster = table.clusters[static_cast<std::size_t>(i)];
        cluster.index = i;
        auto mean = model.mean(i);
        auto var = model.variance(i);
        cluster.center.assign(mean.begin(), mean.end());
        cluster.variance.assign(var.begin(), var.end());
    }
    for (std::size_t r = 0; r < data.n; ++r) {
        int label = labels[r];
        if (label < 0 || label >= model.k)
            raise(Status::InvalidArgument, "label outside 0..k-1");
        auto& cluster = table.clusters[static_cast<std::size_t>(label)];
        ++cluster.count;
        ++cluster.party_count[static_cast<std::size_t>(data.party_group[r])];
        ++table.party_totals[static_cast<std::size_t>(data.party_group[r])];
    }
    for (auto& cluster : table.clusters) {
        cluster.share = static_cast<double>(cluster.count) / static_cast<double>(data.n);
        for (std::size_t g = 0; g < 3; ++g)
            cluster.party_pct[g] = cluster.count == 0
                                       ? 0.0
                                       : 100.0 * static_cast<double>(cluster.party_count[g]) /
                                             static_cast<double>(cluster.count);
    }
    return table;
}

std::optional<PartyClusterMapping> default_party_mapping(const AnalysisMatrix& data,
                                                         const MixtureModel& model) {
    auto nearest = [&](PartyGroup group) -> std::optional<int> {
        std::vector<double> mean;
        try {
            mean = party_mean(data, group);
        } catch (const Error&) {
            return std::nullopt;
        }
        int best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (int i = 0; i < model.k; ++i) {
            double d2 = squared_distance(mean, model.mean(i));
            if (d2 < best_d2) {
                best_d2 = d2;
                best = i;
            }
        }
        return best;
    };
    auto dem = nearest(PartyGroup::Democrat);
    auto rep = nearest(PartyGroup::Republican);
    if (!dem || !rep || *dem == *rep) return std::nullopt;
    return PartyClusterMapping{*dem, *rep};
}

PrMetrics precision_recall(const std::vector<int>& labels,
                           const std::vector<PartyGroup>& parties,
                           const PartyClusterMapping& mapping, int k) {
    if (labels.size() != parties.size())
        raise(Status::InvalidArgument, "labels and parties disagree in length");
    if (mapping.democrat_cluster < 0 || mapping.democrat_cluster >= k ||
        mapping.republican_cluster < 0 || mapping.republican_cluster >= k)
        raise(Status::InvalidArgument, "mapping names a cluster outside 0..k-1");
    if (mapping.democrat_cluster == mapping.republican_cluster)
        raise(Status::InvalidArgument, "mapping must assign the parties distinct clusters");

    PrMetrics metrics;
    metrics.mapping = mapping;
    metrics.n = labels.size();
    metrics.confusion.assign(static_cast<std::size_t>(k), {0, 0, 0});
    for (std::size_t r = 0; r < labels.size(); ++r) {
        if (labels[r] < 0 || labels[r] >= k)
            raise(Status::InvalidArgument, "label outside 0..k-1");
        ++metrics.confusion[static_cast<std::size_t>(labels[r])]
                           [static_cast<std::size_t>(parties[r])];
    }

    auto make_row = [&](PartyGroup party, int cluster) {
        PrRow row;
        row.party = party;
        row.cluster = cluster;
        const auto& in_cluster = metrics.confusion[static_cast<std::size_t>(cluster)];
        row.true_positive = in_cluster[static_cast<std::size_t>(party)];
        row.cluster_total = in_cluster[0] + in_cluster[1] + in_cluster[2];
        for (const auto& counts : metrics.confusion)
            row.party_total += counts[static_cast<std::size_t>(party)];
        if (row.cluster_total > 0)
            row.precision = static_cast<double>(row.true_positive) /
                            static_cast<double>(row.cluster_total);
        row.recall = row.party_total == 0 ? 0.0
                                          : static_cast<double>(row.true_positive) /
                                                static_cast<double>(row.party_total);
        return row;
    };
    metrics.rows.push_back(make_row(PartyGroup::Democrat, mapping.democrat_cluster));
    metrics.rows.push_back(make_row(PartyGroup::Republican, mapping.republican_cluster));
    return metrics;
}

PcaProjection pca_project(const AnalysisMatrix& data) {
    if (data.dim < 2) raise(Status::InvalidArgument, "PCA needs D >= 2");
    if (data.n < 3) raise(Status::InvalidArgument, "PCA needs n >= 3");

    const auto n = static_cast<Eigen::Index>(data.n);
    const auto dim = static_cast<Eigen::Index>(data.dim);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        x(data.positions.data(), n, dim);

    Eigen::RowVectorXd mean = x.colwise().mean();
    Eigen::MatrixXd centered = x.rowwise() - mean;
    Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(data.n - 1);
    if (cov.trace() <= 0.0)
        raise(Status::NumericError, "data has zero total variance");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        raise(Status::NumericError, "eigendecomposition failed");

    PcaProjection out;
    out.column_means.assign(mean.data(), mean.data() + dim);
    Eigen::MatrixXd axes(2, dim);
    for (int a = 0; a < 2; ++a) {
        // Eigenvalues come out ascending; take the top two.
        Eigen::Index col = dim - 1 - a;
        Eigen::VectorXd axis = solver.eigenvectors().col(col);
        Eigen::Index largest;
        axis.cwiseAbs().maxCoeff(&largest);
        if (axis(largest) < 0.0) axis = -axis;
        axes.row(a) = axis.transpose();
        out.explained_variance[static_cast<std::size_t>(a)] =
            std::max(0.0, solver.eigenvalues()(col));
    }
    // Eigen stores column-major; rebuild row-major explicitly.
    for (int a = 0; a < 2; ++a)
        for (Eigen::Index d = 0; d < dim; ++d) out.axes.push_back(axes(a, d));

    Eigen::MatrixXd projected = centered * axes.transpose();
    out.projected.reserve(static_cast<std::size_t>(n) * 2);
    for (Eigen::Index r = 0; r < n; ++r) {
        out.projected.push_back(projected(r, 0));
        out.projected.push_back(projected(r, 1));
    }
    return out;
}

DistanceSeries distance_report(const std::vector<YearSnapshot>& years,
                               std::vector<double> center) {
    if (years.empty()) raise(Status::InvalidArgument, "no year snapshots");
    const int dim = years.front().model.dim;
    if (center.empty()) center.assign(static_cast<std::size_t>(dim), 4.0);
    if (center.size() != static_cast<std::size_t>(dim))
        raise(Status::InvalidArgument, "center dimension disagrees with models");

    DistanceSeries series;
    series.center = center;
    for (const auto& snap : years) {
        if (snap.model.k != 2)
            raise(Status::Unsupported, "distance report needs k = 2 models");
        if (snap.model.dim != dim)
            raise(Status::InvalidArgument, "year snapshots disagree in dimension");
        DistanceYear row;
        row.year = snap.year;
        row.cluster_separation = distance(snap.model.mean(0), snap.model.mean(1));
        row.party_separation = distance(snap.democrat_mean, snap.republican_mean);
        row.cluster_center_dist[0] = distance(snap.model.mean(0), center);
        row.cluster_center_dist[1] = distance(snap.model.mean(1), center);
        row.democrat_center_dist = distance(snap.democrat_mean, center);
        row.republican_center_dist = distance(snap.republican_mean, center);
        series.rows.push_back(row);
    }
    return series;
}

AnalysisBundle analyze(const AnalysisMatrix& data, const MixtureModel& model,
                       const AnalysisOptions& options) {
    model.validate();
    AnalysisBundle bundle;
    bundle.model = model;
    bundle.labels = hard_assign(data, model);
    bundle.table = composition(data, bundle.labels, model);
    bundle.issue_labels = data.issue_labels;
    bundle.n = data.n;

    for (auto group : kPartyGroups) {
        try {
            bundle.group_means[static_cast<std::size_t>(group)] = party_mean(data, group);
        } catch (const Error&) {
            bundle.group_means[static_cast<std::size_t>(group)] = std::nullopt;
        }
    }

    std::optional<PartyClusterMapping> mapping = options.mapping;
    if (!mapping) mapping = default_party_mapping(data, model);
    if (mapping) {
        bundle.pr = precision_recall(bundle.labels, data.party_group, *mapping, model.k);
    } else {
        bundle.pr_note = "no distinct party-to-cluster pairing (parties share a nearest "
                         "cluster or a party is absent)";
    }

    if (data.dim > 2) bundle.pca = pca_project(data);

    bundle.center = options.center;
    if (bundle.center.empty()) bundle.center.assign(data.dim, 4.0);
    if (bundle.center.size() != data.dim)
        raise(Status::InvalidArgument, "center dimension disagrees with data");
    for (int i = 0; i < model.k; ++i)
        bundle.center_distances.push_back(distance(model.mean(i), bundle.center));

    // The grouping is already baked into party_group; this field is an echo
    // for reports.
    bundle.grouping_used = options.grouping.value_or(PartyGrouping::standard());
    return bundle;
}

std::string analysis_to_json(const AnalysisBundle& bundle) {
    json j;
    j["kind"] = "analysis";
    j["n"] = bundle.n;
    j["D"] = bundle.model.dim;
    j["model"] = json::parse(model_to_json(bundle.model));
    j["issue_labels"] = bundle.issue_labels;

    json clusters = json::array();
    for (const auto& c : bundle.table.clusters) {
        json cj;
        cj["cluster"] = c.index + 1;
        cj["center"] = c.center;
        cj["variance"] = c.variance;
        cj["count"] = c.count;
        cj["share"] = c.share;
        for (auto group : kPartyGroups) {
            cj[std::string(party_group_name(group)) + "_count"] =
                c.party_count[static_cast<std::size_t>(group)];
            cj[std::string(party_group_name(group)) + "_pct"] =
                c.party_pct[static_cast<std::size_t>(group)];
        }
        clusters.push_back(cj);
    }
    j["composition"] = clusters;

    json means;
    for (auto group : kPartyGroups) {
        const auto& mean = bundle.group_means[static_cast<std::size_t>(group)];
        means[party_group_name(group)] = mean ? json(*mean) : json(nullptr);
    }
    j["party_means"] = means;

    if (bundle.pr) {
        json pj;
        pj["mapping"] = {{"democrat", bundle.pr->mapping.democrat_cluster + 1},
                         {"republican", bundle.pr->mapping.republican_cluster + 1}};
        json rows = json::array();
        for (const auto& row : bundle.pr->rows) {
            json rj;
            rj["party"] = party_group_name(row.party);
            rj["cluster"] = row.cluster + 1;
            rj["true_positive"] = row.true_positive;
            rj["cluster_total"] = row.cluster_total;
            rj["party_total"] = row.party_total;
            rj["precision"] = row.precision ? json(*row.precision) : json(nullptr);
            rj["recall"] = row.recall;
            rows.push_back(rj);
        }
        pj["rows"] = rows;
        json confusion = json::array();
        for (const auto& counts : bundle.pr->confusion)
            confusion.push_back({counts[0], counts[1], counts[2]});
        pj["confusion"] = confusion;
        j["precision_recall"] = pj;
    } else {
        j["precision_recall"] = nullptr;
        j["precision_recall_note"] = bundle.pr_note;
    }

    if (bundle.pca) {
        json pj;
        pj["explained_variance"] = bundle.pca->explained_variance;
        json axes = json::array();
        for (int a = 0; a < 2; ++a)
            axes.push_back(std::vector<double>(
                bundle.pca->axes.begin() + a * static_cast<long>(bundle.model.dim),
                bundle.pca->axes.begin() + (a + 1) * static_cast<long>(bundle.model.dim)));
        pj["axes"] = axes;
        pj["column_means"] = bundle.pca->column_means;
        j["pca"] = pj;
    } else {
        j["pca"] = nullptr;
    }

    j["center"] = bundle.center;
    j["center_distances"] = bundle.center_distances;

    json grouping;
    for (auto group : kPartyGroups) {
        json codes = json::array();
        for (int code = 1; code <= 7; ++code)
            if (bundle.grouping_used.group_of_code[static_cast<std::size_t>(code - 1)] == group)
                codes.push_back(code);
        grouping[party_group_name(group)] = codes;
    }
    j["party_grouping"] = grouping;
    return j.dump(2) + "\n";
}

std::string composition_to_csv(const AnalysisBundle& bundle) {
    const auto dim = static_cast<std::size_t>(bundle.model.dim);
    std::string out = "cluster";
    for (std::size_t d = 0; d < dim; ++d) out += ",center_" + std::to_string(d + 1);
    for (std::size_t d = 0; d < dim; ++d) out += ",variance_" + std::to_string(d + 1);
    out += ",count,share,democrat_pct,independent_pct,republican_pct\n";
    for (const auto& c : bundle.table.clusters) {
        out += std::to_string(c.index + 1);
        for (double v : c.center) out += "," + format_double(v);
        for (double v : c.variance) out += "," + format_double(v);
        out += "," + std::to_string(c.count) + "," + format_double(c.share);
        for (std::size_t g = 0; g < 3; ++g) out += "," + format_double(c.party_pct[g]);
        out += "\n";
    }
    return out;
}

std::string composition_to_markdown(const AnalysisBundle& bundle) {
    std::string out = "| |";
    for (const auto& c : bundle.table.clusters)
        out += " Cluster " + std::to_string(c.index + 1) + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < bundle.table.clusters.size(); ++i) out += "---|";
    out += "\n| Center position |";
    for (const auto& c : bundle.table.clusters) out += " " + vector_text(c.center) + " |";
    out += "\n| Variance |";
    for (const auto& c : bundle.table.clusters) out += " " + vector_text(c.variance) + " |";
    out += "\n| Share of data |";
    for (const auto& c : bundle.table.clusters)
        out += " " + format_short(100.0 * c.share) + "% |";
    for (auto group : kPartyGroups) {
        std::string name = party_group_name(group);
        name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
        out += "\n| " + name + " |";
        for (const auto& c : bundle.table.clusters)
            out += " " + format_short(c.party_pct[static_cast<std::size_t>(group)]) + "% |";
    }
    out += "\n";
    return out;
}

std::string precision_recall_to_csv(const AnalysisBundle& bundle) {
    std::string out = "party,cluster,precision,recall,true_positive,cluster_total,party_total\n";
    if (!bundle.pr) return out;
    for (const auto& row : bundle.pr->rows) {
        out += std::string(party_group_name(row.party)) + "," + std::to_string(row.cluster + 1);
        out += "," + (row.precision ? format_double(*row.precision) : std::string());
        out += "," + format_double(row.recall);
        out += "," + std::to_string(row.true_positive) + "," +
               std::to_string(row.cluster_total) + "," + std::to_string(row.party_total);
        out += "\n";
    }
    return out;
}

std::string precision_recall_to_markdown(const AnalysisBundle& bundle) {
    if (!bundle.pr) return "precision/recall unavailable: " + bundle.pr_note + "\n";
    std::string out = "| |";
    for (const auto& row : bundle.pr->rows) {
        std::string name = party_group_name(row.party);
        name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
        out += " " + name + "/Cluster " + std::to_string(row.cluster + 1) + " |";
    }
    out += "\n|---|";
    for (std::size_t i = 0; i < bundle.pr->rows.size(); ++i) out += "---|";
    out += "\n| Precision |";
    for (const auto& row : bundle.pr->rows)
        out += row.precision ? " " + format_short(100.0 * *row.precision) + "% |"
                             : " undefined |";
    out += "\n| Recall |";
    for (const auto& row : bundle.pr->rows)
        out += " " + format_short(100.0 * row.recall) + "% |";
    out += "\n";
    return out;
}

std::string party_means_to_csv(const AnalysisBundle& bundle) {
    const auto dim = static_cast<std::size_t>(bundle.model.dim);
    std::string out = "group";
    for (std::size_t d = 0; d < dim; ++d) out += ",mean_" + std::to_string(d + 1);
    out += "\n";
    for (auto group : kPartyGroups) {
        const auto& mean = bundle.group_means[static_cast<std::size_t>(group)];
        if (!mean) continue;
        out += party_group_name(group);
        for (double v : *mean) out += "," + format_double(v);
        out += "\n";
    }
    return out;
}

std::string distance_to_json(const DistanceSeries& series) {
    json j;
    j["kind"] = "distance_series";
    j["center"] = series.center;
    json rows = json::array();
    for (const auto& row : series.rows) {
        rows.push_back({{"year", row.year},
                        {"cluster_separation", row.cluster_separation},
                        {"party_separation", row.party_separation},
                        {"cluster1_center_dist", row.cluster_center_dist[0]},
                        {"cluster2_center_dist", row.cluster_center_dist[1]},
                        {"democrat_center_dist", row.democrat_center_dist},
                        {"republican_center_dist", row.republican_center_dist}});
    }
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

std::string distance_to_csv(const DistanceSeries& series) {
    std::string out = "year,metric,value\n";
    for (const auto& row : series.rows) {
        auto line = [&](const char* metric, double value) {
            out += std::to_string(row.year) + "," + metric + "," + format_double(value) + "\n";
        };
        line("cluster_separation", row.cluster_separation);
        line("party_separation", row.party_separation);
        line("cluster1_center_dist", row.cluster_center_dist[0]);
        line("cluster2_center_dist", row.cluster_center_dist[1]);
        line("democrat_center_dist", row.democrat_center_dist);
        line("republican_center_dist", row.republican_center_dist);
    }
    return out;
}

DistanceSeries distance_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        raise(Status::ParseError, std::string("distance series JSON: ") + e.what());
    }
    DistanceSeries series;
    try {
        if (j.value("kind", std::string()) != "distance_series")
            raise(Status::ParseError, "not a distance_series document");
        series.center = j.at("center").get<std::vector<double>>();
        for (const auto& rj : j.at("rows")) {
            DistanceYear row;
            row.year = rj.at("year").get<int>();
            row.cluster_separation = rj.at("cluster_separation").get<double>();
            row.party_separation = rj.at("party_separation").get<double>();
            row.cluster_center_dist[0] = rj.at("cluster1_center_dist").get<double>();
            row.cluster_center_dist[1] = rj.at("cluster2_center_dist").get<double>();
            row.democrat_center_dist = rj.at("democrat_center_dist").get<double>();
            row.republican_center_dist = rj.at("republican_center_dist").get<double>();
            series.rows.push_back(row);
        }
    } catch (const json::exception& e) {
        raise(Status::ParseError, std::string("distance series JSON: ") + e.what());
    }
    return series;
}

DistanceSeries distance_report_from_json(const std::string& per_year_json) {
    json j;
    try {
        j = json::parse(per_year_json);
    } catch (const json::exception& e) {
        raise(Status::ParseError, std::string("per-year JSON: ") + e.what());
    }
    std::vector<YearSnapshot> years;
    std::vector<double> center;
    try {
        if (j.contains("center") && !j.at("center").is_null())
            center = j.at("center").get<std::vector<double>>();
        for (const auto& yj : j.at("years")) {
            YearSnapshot snap;
            snap.year = yj.at("year").get<int>();
            snap.model = model_from_json(yj.at("model").dump());
            snap.democrat_mean = yj.at("democrat_mean").get<std::vector<double>>();
            snap.republican_mean = yj.at("republican_mean").get<std::vector<double>>();
            years.push_back(std::move(snap));
        }
    } catch (const json::exception& e) {
        raise(Status::ParseError, std::string("per-year JSON: ") + e.what());
    }
    return distance_report(years, std::move(center));
}

} // namespace smx
