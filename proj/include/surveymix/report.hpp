#ifndef SURVEYMIX_REPORT_HPP
#define SURVEYMIX_REPORT_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "surveymix/analysis.hpp"
#include "surveymix/selection.hpp"

namespace smx {

struct PlotSpec {
    // Visualization-only uniform jitter applied to scatter markers so the
    // discrete grid becomes readable; never fed back into fitting.
    double jitter_halfwidth = 0.25;
    int width = 720;
    int height = 540;
    std::uint64_t seed = 0;

    void validate() const;
};

PlotSpec plot_spec_from_json(const std::string& json_text);

// Scatter of all rows colored by the 7-level party-ID ramp (blue shades for
// Democrat codes, grey for Independent, red shades for Republican; darker =
// stronger identification), cluster means as stars, party means as
// triangles. Data with more than two dimensions is projected with PCA first
// (model means and party means are projected through the same axes).
std::string render_scatter(const AnalysisMatrix& data, const MixtureModel& model,
                           const PlotSpec& spec);

// Mixture density sampled on a 141x141 grid over [0.5, 7.5]^2, drawn as a
// shaded heatmap with 1-sigma and 2-sigma axis-aligned ellipses per
// component.
std::string render_density(const MixtureModel& model, const PlotSpec& spec);

// Row-major density values on the heatmap grid; exposed for tests.
std::vector<double> density_grid(const MixtureModel& model, int cells = 141,
                                 double lo = 0.5, double hi = 7.5);

struct Series {
    std::string label;
    std::string color;
    bool dashed = false;
    std::vector<std::pair<double, double>> points;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

std::string render_curves(const LineChart& chart, const PlotSpec& spec);

LineChart chart_from_sweep(const SweepReport& report);
LineChart chart_from_xval(const XvalReport& report);
// Two charts: cluster/party separations, and the four distances from center.
std::pair<LineChart, LineChart> charts_from_distance(const DistanceSeries& series);

// Fill color for a 7-point party-ID code.
std::string party_code_color(int code);

} // namespace smx

#endif
