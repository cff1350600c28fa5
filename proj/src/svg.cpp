#include "salience/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <iterator>

namespace salience::svg {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 180.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 70.0;
constexpr double kPlotW = kWidth - kLeft - kRight;
constexpr double kPlotH = kHeight - kTop - kBottom;

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string header(const std::string& title) {
    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        num(kWidth), num(kHeight), num(kWidth), num(kHeight));
    s += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", num(kWidth), num(kHeight));
    s += fmt::format("<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
                     num(kLeft + kPlotW / 2), escape(title));
    return s;
}

std::string axes() {
    return fmt::format(
        "<line class=\"axis\" x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#000000\"/>\n"
        "<line class=\"axis\" x1=\"{0}\" y1=\"{2}\" x2=\"{3}\" y2=\"{2}\" stroke=\"#000000\"/>\n",
        num(kLeft), num(kTop), num(kTop + kPlotH), num(kLeft + kPlotW));
}

std::string no_data() {
    return fmt::format(
        "<text class=\"no-data\" x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" "
        "text-anchor=\"middle\" fill=\"#666666\">no data</text>\n",
        num(kLeft + kPlotW / 2), num(kTop + kPlotH / 2));
}

/// Rounds the axis maximum up to 1, 2 or 5 times a power of ten.
double nice_ceiling(double v) {
    if (v <= 0.0) return 1.0;
    const double p = std::pow(10.0, std::floor(std::log10(v)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * p >= v) return m * p;
    return 10.0 * p;
}

std::string legend_swatch(std::size_t row, const std::string& label, const std::string& marker) {
    const double y = kTop + 10.0 + 20.0 * static_cast<double>(row);
    return marker + fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
                                num(kLeft + kPlotW + 36.0), num(y + 4.0), escape(label));
}

std::string marker(std::size_t shape, double x, double y, const char* fill) {
    const double r = 4.0;
    const char* name = kShapes[shape % std::size(kShapes)];
    switch (shape % std::size(kShapes)) {
        case 0:
            return fmt::format("<circle class=\"marker\" data-shape=\"{}\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\"/>\n",
                               name, num(x), num(y), num(r), fill);
        case 1:
            return fmt::format(
                "<rect class=\"marker\" data-shape=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                name, num(x - r), num(y - r), num(2 * r), num(2 * r), fill);
        case 2:
            return fmt::format("<polygon class=\"marker\" data-shape=\"{}\" points=\"{},{} {},{} {},{}\" fill=\"{}\"/>\n",
                               name, num(x), num(y - r), num(x - r), num(y + r), num(x + r), num(y + r), fill);
        case 3:
            return fmt::format(
                "<polygon class=\"marker\" data-shape=\"{}\" points=\"{},{} {},{} {},{} {},{}\" fill=\"{}\"/>\n", name,
                num(x), num(y - r), num(x + r), num(y), num(x), num(y + r), num(x - r), num(y), fill);
        default:
            return fmt::format(
                "<path class=\"marker\" data-shape=\"{}\" d=\"M{},{}L{},{}M{},{}L{},{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                name, num(x - r), num(y - r), num(x + r), num(y + r), num(x - r), num(y + r), num(x + r), num(y - r),
                fill);
    }
}

}  // namespace

std::string num(double v) {
    if (v == 0.0) v = 0.0;  // no "-0.000000"
    std::string s = fmt::format("{:.6f}", v);
    return s == "-0.000000" ? "0.000000" : s;
}

std::string escape(std::string_view text) {
    std::string out;
    for (char c : text) {
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

std::string render_bar_chart(const BarChart& chart) {
    std::string s = header(chart.title);
    s += axes();
    s += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
                     num(kLeft + kPlotW / 2), num(kHeight - 12.0), escape(chart.x_label));
    s += fmt::format(
        "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
        "transform=\"rotate(-90 16 {})\">{}</text>\n",
        num(kTop + kPlotH / 2), num(kTop + kPlotH / 2), escape(chart.y_label));

    double max_v = 0.0;
    for (const auto& series : chart.series)
        for (double v : series.values) max_v = std::max(max_v, v);
    if (chart.categories.empty() || chart.series.empty() || max_v <= 0.0) {
        s += no_data();
        s += "</svg>\n";
        return s;
    }
    const double top = nice_ceiling(max_v);
    for (int t = 0; t <= 5; ++t) {
        const double v = top * t / 5.0;
        const double y = kTop + kPlotH - kPlotH * v / top;
        s += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\"/>\n", num(kLeft - 4.0), num(y),
                         num(kLeft), num(y));
        s += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
                         num(kLeft - 6.0), num(y + 3.0), num(v));
    }
    const double slot = kPlotW / static_cast<double>(chart.categories.size());
    const double bar_w = slot * 0.8 / static_cast<double>(chart.series.size());
    for (std::size_t c = 0; c < chart.categories.size(); ++c) {
        const double x0 = kLeft + slot * static_cast<double>(c) + slot * 0.1;
        for (std::size_t k = 0; k < chart.series.size(); ++k) {
            const double v = c < chart.series[k].values.size() ? chart.series[k].values[c] : 0.0;
            const double h = kPlotH * v / top;
            s += fmt::format(
                "<rect class=\"bar\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"><title>{}: {}</title></rect>\n",
                num(x0 + bar_w * static_cast<double>(k)), num(kTop + kPlotH - h), num(bar_w), num(h), color(k),
                escape(chart.series[k].name), num(v));
        }
        s += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
                         num(kLeft + slot * (static_cast<double>(c) + 0.5)), num(kTop + kPlotH + 14.0),
                         escape(chart.categories[c]));
    }
    if (chart.series.size() > 1 || !chart.series.front().name.empty()) {
        for (std::size_t k = 0; k < chart.series.size(); ++k) {
            const double y = kTop + 10.0 + 20.0 * static_cast<double>(k);
            s += legend_swatch(k, chart.series[k].name,
                               fmt::format("<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n",
                                           num(kLeft + kPlotW + 18.0), num(y - 6.0), color(k)));
        }
    }
    s += "</svg>\n";
    return s;
}

std::string render_scatter(const ScatterChart& chart) {
    std::string s = header(chart.title);
    s += axes();
    if (chart.points.empty()) {
        s += no_data();
        s += "</svg>\n";
        return s;
    }
    double x_lo = chart.points.front().x, x_hi = x_lo, y_lo = chart.points.front().y, y_hi = y_lo;
    for (const auto& p : chart.points) {
        x_lo = std::min(x_lo, p.x);
        x_hi = std::max(x_hi, p.x);
        y_lo = std::min(y_lo, p.y);
        y_hi = std::max(y_hi, p.y);
    }
    const double x_span = x_hi > x_lo ? x_hi - x_lo : 1.0;
    const double y_span = y_hi > y_lo ? y_hi - y_lo : 1.0;
    const double pad = 8.0;
    for (const auto& p : chart.points) {
        const double x = kLeft + pad + (kPlotW - 2 * pad) * (p.x - x_lo) / x_span;
        const double y = kTop + kPlotH - pad - (kPlotH - 2 * pad) * (p.y - y_lo) / y_span;
        s += marker(p.shape, x, y, color(p.color));
    }
    std::size_t row = 0;
    for (std::size_t c = 0; c < chart.color_names.size(); ++c, ++row) {
        const double y = kTop + 10.0 + 20.0 * static_cast<double>(row);
        s += legend_swatch(row, chart.color_names[c],
                           fmt::format("<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n",
                                       num(kLeft + kPlotW + 18.0), num(y - 6.0), color(c)));
    }
    for (std::size_t k = 0; k < chart.shape_names.size(); ++k, ++row) {
        const double y = kTop + 10.0 + 20.0 * static_cast<double>(row);
        std::string m = marker(k, kLeft + kPlotW + 24.0, y, "#444444");
        // Legend glyphs are not data markers.
        m.replace(m.find("class=\"marker\""), 14, "class=\"legend\"");
        s += legend_swatch(row, chart.shape_names[k], m);
    }
    s += "</svg>\n";
    return s;
}

}  // namespace salience::svg
