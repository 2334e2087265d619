#include "surveymix/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "surveymix/rng.hpp"

namespace smx {

using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

struct Frame {
    // Maps data coordinates onto the pixel viewport (y grows downward).
    double x_lo, x_hi, y_lo, y_hi;
    double left, right, top, bottom; // pixel margins
    int width, height;

    double px(double x) const {
        return left + (x - x_lo) / (x_hi - x_lo) * (width - left - right);
    }
    double py(double y) const {
        return top + (y_hi - y) / (y_hi - y_lo) * (height - top - bottom);
    }
};

std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
    double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    double raw_step = span / target;
    double mag = std::pow(10.0, std::floor(std::log10(raw_step)));
    double step = mag;
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * mult >= raw_step) {
            step = mag * mult;
            break;
        }
    }
    std::vector<double> ticks;
    double first = std::ceil(lo / step) * step;
    for (double t = first; t <= hi + 1e-9 * span; t += step) {
        double rounded = std::fabs(t) < step * 1e-6 ? 0.0 : t;
        ticks.push_back(rounded);
    }
    return ticks;
}

void open_svg(std::string& svg, const PlotSpec& spec, const std::string& title) {
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) +
           "\" height=\"" + std::to_string(spec.height) + "\" viewBox=\"0 0 " +
           std::to_string(spec.width) + " " + std::to_string(spec.height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    if (!title.empty())
        svg += "<text x=\"" + fmt(spec.width / 2.0) +
               "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\" "
               "text-anchor=\"middle\">" +
               xml_escape(title) + "</text>\n";
}

void draw_axes(std::string& svg, const Frame& f, const std::vector<double>& x_ticks,
               const std::vector<double>& y_ticks, const std::string& x_label,
               const std::string& y_label) {
    double x0 = f.left, x1 = f.width - f.right;
    double y0 = f.top, y1 = f.height - f.bottom;
    svg += "<g stroke=\"#333333\" stroke-width=\"1\" fill=\"none\">\n";
    svg += "<path d=\"M" + fmt(x0) + " " + fmt(y0) + " L" + fmt(x0) + " " + fmt(y1) + " L" +
           fmt(x1) + " " + fmt(y1) + "\"/>\n";
    svg += "</g>\n";
    svg += "<g font-family=\"sans-serif\" font-size=\"10\" fill=\"#333333\">\n";
    for (double t : x_ticks) {
        double x = f.px(t);
        svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x) +
               "\" y2=\"" + fmt(y1 + 4) + "\" stroke=\"#333333\"/>\n";
        svg += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y1 + 15) +
               "\" text-anchor=\"middle\">" + fmt(t) + "</text>\n";
    }
    for (double t : y_ticks) {
        double y = f.py(t);
        svg += "<line x1=\"" + fmt(x0 - 4) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(x0) +
               "\" y2=\"" + fmt(y) + "\" stroke=\"#333333\"/>\n";
        svg += "<text x=\"" + fmt(x0 - 6) + "\" y=\"" + fmt(y + 3) +
               "\" text-anchor=\"end\">" + fmt(t) + "</text>\n";
    }
    if (!x_label.empty())
        svg += "<text x=\"" + fmt((x0 + x1) / 2) + "\" y=\"" + fmt(f.height - 6.0) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + xml_escape(x_label) +
               "</text>\n";
    if (!y_label.empty())
        svg += "<text x=\"12\" y=\"" + fmt((y0 + y1) / 2) +
               "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 12 " +
               fmt((y0 + y1) / 2) + ")\">" + xml_escape(y_label) + "</text>\n";
    svg += "</g>\n";
}

std::string star_path(double cx, double cy, double outer) {
    // 5-pointed star, first point up.
    std::string d;
    double inner = outer * 0.42;
    for (int i = 0; i < 10; ++i) {
        double angle = -1.5707963267948966 + i * 0.6283185307179586;
        double r = (i % 2 == 0) ? outer : inner;
        double x = cx + r * std::cos(angle);
        double y = cy + r * std::sin(angle);
        d += (i == 0 ? "M" : "L") + fmt(x) + " " + fmt(y);
    }
    return d + "Z";
}

std::string triangle_points(double cx, double cy, double r) {
    return fmt(cx) + "," + fmt(cy - r) + " " + fmt(cx - 0.866 * r) + "," + fmt(cy + 0.5 * r) +
           " " + fmt(cx + 0.866 * r) + "," + fmt(cy + 0.5 * r);
}

// White-to-dark-blue ramp used by the density heatmap.
std::string heat_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    t = std::sqrt(t); // lift low densities into view
    auto channel = [&](double from, double to) {
        return static_cast<int>(std::lround(from + (to - from) * t));
    };
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", channel(255, 8), channel(255, 48),
                  channel(255, 107));
    return buf;
}

constexpr int kHeatLevels = 24;

std::vector<std::pair<double, double>> project_points(const AnalysisMatrix& data,
                                                      const PcaProjection& pca) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(data.n);
    for (std::size_t r = 0; r < data.n; ++r)
        pts.emplace_back(pca.projected[2 * r], pca.projected[2 * r + 1]);
    return pts;
}

std::pair<double, double> project_vector(std::span<const double> v, const PcaProjection& pca) {
    double out[2] = {0.0, 0.0};
    const std::size_t dim = pca.column_means.size();
    for (int a = 0; a < 2; ++a)
        for (std::size_t d = 0; d < dim; ++d)
            out[a] += (v[d] - pca.column_means[d]) * pca.axes[a * dim + d];
    return {out[0], out[1]};
}

} // namespace

void PlotSpec::validate() const {
    if (!(jitter_halfwidth >= 0.0 && jitter_halfwidth < 0.5))
        raise(Status::InvalidArgument, "jitter_halfwidth must lie in [0, 0.5)");
    if (width <= 0 || height <= 0)
        raise(Status::InvalidArgument, "plot dimensions must be positive");
}

PlotSpec plot_spec_from_json(const std::string& json_text) {
    PlotSpec spec;
    if (json_text.empty()) return spec;
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        raise(Status::ParseError, std::string("plot spec: ") + e.what());
    }
    spec.jitter_halfwidth = j.value("jitter", spec.jitter_halfwidth);
    spec.width = j.value("width", spec.width);
    spec.height = j.value("height", spec.height);
    spec.seed = j.value("seed", spec.seed);
    spec.validate();
    return spec;
}

std::string party_code_color(int code) {
    switch (code) {
    case 1: return "#08306b";
    case 2: return "#2171b5";
    case 3: return "#6baed6";
    case 4: return "#969696";
    case 5: return "#fc9272";
    case 6: return "#cb181d";
    case 7: return "#67000d";
    default: return "#969696";
    }
}

std::string render_scatter(const AnalysisMatrix& data, const MixtureModel& model,
                           const PlotSpec& spec) {
    spec.validate();
    model.validate();
    if (static_cast<int>(data.dim) != model.dim)
        raise(Status::InvalidArgument, "data dimension disagrees with model");

    std::vector<std::pair<double, double>> points;
    std::vector<std::pair<double, double>> cluster_means;
    std::vector<std::pair<double, double>> party_means_2d;
    std::vector<std::string> party_colors = {"#2171b5", "#cb181d"};
    std::string x_label, y_label;
    Frame f{};

    std::array<std::optional<std::vector<double>>, 2> pm;
    try {
        pm[0] = party_mean(data, PartyGroup::Democrat);
    } catch (const Error&) {}
    try {
        pm[1] = party_mean(data, PartyGroup::Republican);
    } catch (const Error&) {}

    if (data.dim == 2) {
        points.reserve(data.n);
        for (std::size_t r = 0; r < data.n; ++r)
            points.emplace_back(data.row(r)[0], data.row(r)[1]);
        for (int i = 0; i < model.k; ++i)
            cluster_means.emplace_back(model.mean(i)[0], model.mean(i)[1]);
        for (const auto& mean : pm)
            if (mean) party_means_2d.emplace_back((*mean)[0], (*mean)[1]);
        x_label = data.issue_labels[0];
        y_label = data.issue_labels[1];
        f.x_lo = 0.5;
        f.x_hi = 7.5;
        f.y_lo = 0.5;
        f.y_hi = 7.5;
    } else {
        auto pca = pca_project(data);
        points = project_points(data, pca);
        for (int i = 0; i < model.k; ++i)
            cluster_means.push_back(project_vector(model.mean(i), pca));
        for (const auto& mean : pm)
            if (mean) party_means_2d.push_back(project_vector(*mean, pca));
        x_label = "PC1";
        y_label = "PC2";
        double x_lo = points[0].first, x_hi = points[0].first;
        double y_lo = points[0].second, y_hi = points[0].second;
        for (const auto& [x, y] : points) {
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
        double pad_x = 0.05 * (x_hi - x_lo) + 0.5;
        double pad_y = 0.05 * (y_hi - y_lo) + 0.5;
        f.x_lo = x_lo - pad_x;
        f.x_hi = x_hi + pad_x;
        f.y_lo = y_lo - pad_y;
        f.y_hi = y_hi + pad_y;
    }
    f.left = 52;
    f.right = 16;
    f.top = 28;
    f.bottom = 42;
    f.width = spec.width;
    f.height = spec.height;

    Rng jitter(derive_seed(spec.seed, stream::kJitter));

    std::string svg;
    open_svg(svg, spec, x_label + " vs " + y_label);
    draw_axes(svg, f,
              data.dim == 2 ? std::vector<double>{1, 2, 3, 4, 5, 6, 7}
                            : nice_ticks(f.x_lo, f.x_hi),
              data.dim == 2 ? std::vector<double>{1, 2, 3, 4, 5, 6, 7}
                            : nice_ticks(f.y_lo, f.y_hi),
              x_label, y_label);

    svg += "<g class=\"data\">\n";
    for (std::size_t r = 0; r < points.size(); ++r) {
        double jx = (jitter.uniform() * 2.0 - 1.0) * spec.jitter_halfwidth;
        double jy = (jitter.uniform() * 2.0 - 1.0) * spec.jitter_halfwidth;
        svg += "<circle class=\"datum\" cx=\"" + fmt(f.px(points[r].first + jx)) + "\" cy=\"" +
               fmt(f.py(points[r].second + jy)) + "\" r=\"2.2\" fill=\"" +
               party_code_color(data.party_strength[r]) + "\" fill-opacity=\"0.55\"/>\n";
    }
    svg += "</g>\n";

    for (const auto& [x, y] : cluster_means)
        svg += "<path class=\"cluster-mean\" d=\"" + star_path(f.px(x), f.py(y), 9) +
               "\" fill=\"#ffd92f\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    for (std::size_t i = 0; i < party_means_2d.size(); ++i)
        svg += "<polygon class=\"party-mean\" points=\"" +
               triangle_points(f.px(party_means_2d[i].first), f.py(party_means_2d[i].second), 8) +
               "\" fill=\"" + party_colors[i % 2] +
               "\" stroke=\"#ffffff\" stroke-width=\"1\"/>\n";

    svg += "</svg>\n";
    return svg;
}

std::vector<double> density_grid(const MixtureModel& model, int cells, double lo, double hi) {
    model.validate();
    if (model.dim != 2) raise(Status::Unsupported, "density grid needs D = 2");
    if (cells < 2) raise(Status::InvalidArgument, "grid needs at least 2 cells");
    std::vector<double> grid(static_cast<std::size_t>(cells) * cells);
    double step = (hi - lo) / (cells - 1);
    for (int iy = 0; iy < cells; ++iy) {
        for (int ix = 0; ix < cells; ++ix) {
            double x[2] = {lo + ix * step, lo + iy * step};
            grid[static_cast<std::size_t>(iy) * cells + ix] =
                mixture_density(std::span<const double>(x, 2), model);
        }
    }
    return grid;
}

std::string render_density(const MixtureModel& model, const PlotSpec& spec) {
    spec.validate();
    constexpr int cells = 141;
    constexpr double lo = 0.5, hi = 7.5;
    auto grid = density_grid(model, cells, lo, hi);
    double peak = *std::max_element(grid.begin(), grid.end());
    if (peak <= 0.0) peak = 1.0;

    Frame f{};
    f.x_lo = lo;
    f.x_hi = hi;
    f.y_lo = lo;
    f.y_hi = hi;
    f.left = 52;
    f.right = 16;
    f.top = 28;
    f.bottom = 42;
    f.width = spec.width;
    f.height = spec.height;

    std::string svg;
    open_svg(svg, spec, "Mixture density");

    // Heatmap cells, quantized and run-length merged along each row.
    double step = (hi - lo) / (cells - 1);
    svg += "<g shape-rendering=\"crispEdges\">\n";
    for (int iy = 0; iy < cells; ++iy) {
        double y_top = f.py(lo + iy * step + step / 2);
        double y_bot = f.py(lo + iy * step - step / 2);
        int run_start = 0;
        auto level_of = [&](int ix) {
            double d = grid[static_cast<std::size_t>(iy) * cells + ix] / peak;
            int level = static_cast<int>(d * kHeatLevels);
            return std::min(level, kHeatLevels - 1);
        };
        int run_level = level_of(0);
        auto flush = [&](int end_ix) {
            if (run_level == 0) return; // leave white background visible
            double x0 = f.px(lo + run_start * step - step / 2);
            double x1 = f.px(lo + (end_ix - 1) * step + step / 2);
            svg += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y_top) + "\" width=\"" +
                   fmt(x1 - x0) + "\" height=\"" + fmt(y_bot - y_top) + "\" fill=\"" +
                   heat_color((run_level + 0.5) / kHeatLevels) + "\"/>\n";
        };
        for (int ix = 1; ix < cells; ++ix) {
            int level = level_of(ix);
            if (level != run_level) {
                flush(ix);
                run_start = ix;
                run_level = level;
            }
        }
        flush(cells);
    }
    svg += "</g>\n";

    draw_axes(svg, f, {1, 2, 3, 4, 5, 6, 7}, {1, 2, 3, 4, 5, 6, 7}, "issue 1", "issue 2");

    // 1-sigma and 2-sigma axis-aligned ellipses per component.
    double sx_scale = (f.px(1.0) - f.px(0.0));
    double sy_scale = (f.py(0.0) - f.py(1.0));
    for (int i = 0; i < model.k; ++i) {
        double sx = std::sqrt(model.variance(i)[0]);
        double sy = std::sqrt(model.variance(i)[1]);
        double cx = f.px(model.mean(i)[0]);
        double cy = f.py(model.mean(i)[1]);
        for (int mult = 1; mult <= 2; ++mult) {
            svg += "<ellipse class=\"sigma\" cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) +
                   "\" rx=\"" + fmt(mult * sx * sx_scale) + "\" ry=\"" +
                   fmt(mult * sy * sy_scale) + "\" fill=\"none\" stroke=\"#e41a1c\" " +
                   (mult == 2 ? "stroke-dasharray=\"4 3\" " : "") + "stroke-width=\"1.2\"/>\n";
        }
        svg += "<path class=\"component-center\" d=\"" + star_path(cx, cy, 7) +
               "\" fill=\"#ffd92f\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::string render_curves(const LineChart& chart, const PlotSpec& spec) {
    spec.validate();
    if (chart.series.empty()) raise(Status::InvalidArgument, "chart has no series");
    for (const auto& s : chart.series)
        if (s.points.empty()) raise(Status::InvalidArgument, "series has no points");

    double x_lo = chart.series[0].points[0].first, x_hi = x_lo;
    double y_lo = chart.series[0].points[0].second, y_hi = y_lo;
    for (const auto& s : chart.series) {
        for (const auto& [x, y] : s.points) {
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    }
    if (x_hi == x_lo) {
        x_lo -= 1.0;
        x_hi += 1.0;
    }
    if (y_hi == y_lo) {
        y_lo -= 1.0;
        y_hi += 1.0;
    }
    double pad_y = 0.06 * (y_hi - y_lo);

    Frame f{};
    f.x_lo = x_lo - 0.04 * (x_hi - x_lo);
    f.x_hi = x_hi + 0.04 * (x_hi - x_lo);
    f.y_lo = y_lo - pad_y;
    f.y_hi = y_hi + pad_y;
    f.left = 72;
    f.right = 16;
    f.top = 28;
    f.bottom = 42;
    f.width = spec.width;
    f.height = spec.height;

    std::string svg;
    open_svg(svg, spec, chart.title);
    draw_axes(svg, f, nice_ticks(x_lo, x_hi), nice_ticks(f.y_lo, f.y_hi), chart.x_label,
              chart.y_label);

    const std::vector<std::string> palette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                              "#ff7f0e", "#8c564b"};
    for (std::size_t s = 0; s < chart.series.size(); ++s) {
        const auto& series = chart.series[s];
        std::string color = series.color.empty() ? palette[s % palette.size()] : series.color;
        if (series.points.size() > 1) {
            std::string pts;
            for (const auto& [x, y] : series.points) {
                if (!pts.empty()) pts += " ";
                pts += fmt(f.px(x)) + "," + fmt(f.py(y));
            }
            svg += "<polyline class=\"series\" points=\"" + pts + "\" fill=\"none\" stroke=\"" +
                   color + "\" stroke-width=\"1.6\"" +
                   (series.dashed ? " stroke-dasharray=\"5 4\"" : "") + "/>\n";
        }
        for (const auto& [x, y] : series.points)
            svg += "<circle class=\"point\" cx=\"" + fmt(f.px(x)) + "\" cy=\"" + fmt(f.py(y)) +
                   "\" r=\"2.6\" fill=\"" + color + "\"/>\n";
        // Legend entry.
        double ly = f.top + 14.0 * static_cast<double>(s) + 4.0;
        double lx = f.width - f.right - 150.0;
        svg += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(lx + 18) +
               "\" y2=\"" + fmt(ly) + "\" stroke=\"" + color + "\" stroke-width=\"1.6\"" +
               (series.dashed ? " stroke-dasharray=\"5 4\"" : "") + "/>\n";
        svg += "<text x=\"" + fmt(lx + 22) + "\" y=\"" + fmt(ly + 3) +
               "\" font-family=\"sans-serif\" font-size=\"10\">" + xml_escape(series.label) +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

LineChart chart_from_sweep(const SweepReport& report) {
    LineChart chart;
    chart.title = "Information criteria by cluster count";
    chart.x_label = "clusters";
    chart.y_label = "criterion";
    Series aic{"AIC", "", false, {}};
    Series bic{"BIC", "", true, {}};
    for (const auto& e : report.entries) {
        if (!e.ok) continue;
        aic.points.emplace_back(e.k, e.aic);
        bic.points.emplace_back(e.k, e.bic);
    }
    if (aic.points.empty()) raise(Status::EmptyResult, "sweep has no successful fits");
    chart.series.push_back(std::move(aic));
    chart.series.push_back(std::move(bic));
    return chart;
}

LineChart chart_from_xval(const XvalReport& report) {
    LineChart chart;
    chart.title = "Cross-validated AIC by cluster count";
    chart.x_label = "clusters";
    chart.y_label = "mean test AIC";
    Series aic{"test AIC (fold mean)", "", false, {}};
    for (const auto& a : report.aggregates) {
        if (a.folds_ok == 0) continue;
        aic.points.emplace_back(a.k, a.mean_test_aic);
    }
    if (aic.points.empty()) raise(Status::EmptyResult, "cross-validation has no successful folds");
    chart.series.push_back(std::move(aic));
    return chart;
}

std::pair<LineChart, LineChart> charts_from_distance(const DistanceSeries& series) {
    LineChart separation;
    separation.title = "Cluster vs party mean separation";
    separation.x_label = "year";
    separation.y_label = "distance";
    Series cluster{"between cluster means", "#1f77b4", false, {}};
    Series party{"between party means", "#d62728", false, {}};
    for (const auto& row : series.rows) {
        cluster.points.emplace_back(row.year, row.cluster_separation);
        party.points.emplace_back(row.year, row.party_separation);
    }
    separation.series = {cluster, party};

    LineChart center;
    center.title = "Distance from center";
    center.x_label = "year";
    center.y_label = "distance";
    Series c1{"cluster 1", "#1f77b4", true, {}};
    Series c2{"cluster 2", "#d62728", true, {}};
    Series dem{"democrat mean", "#1f77b4", false, {}};
    Series rep{"republican mean", "#d62728", false, {}};
    for (const auto& row : series.rows) {
        c1.points.emplace_back(row.year, row.cluster_center_dist[0]);
        c2.points.emplace_back(row.year, row.cluster_center_dist[1]);
        dem.points.emplace_back(row.year, row.democrat_center_dist);
        rep.points.emplace_back(row.year, row.republican_center_dist);
    }
    center.series = {c1, c2, dem, rep};
    return {separation, center};
}

} // namespace smx
