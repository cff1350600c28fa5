#pragma once

// Minimal deterministic SVG charts. Every number is written with 6 decimals.

#include <cstddef>
#include <string>
#include <vector>

namespace salience::svg {

struct BarSeries {
    std::string name;
    std::vector<double> values;  // one per category
};

/// Vertical bars; several series are drawn side by side within each category.
struct BarChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<std::string> categories;
    std::vector<BarSeries> series;
};

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    std::size_t color = 0;  // index into color_names
    std::size_t shape = 0;  // index into shape_names
};

/// Color encodes one attribute and marker shape another.
struct ScatterChart {
    std::string title;
    std::vector<std::string> color_names;
    std::vector<std::string> shape_names;
    std::vector<ScatterPoint> points;
};

/// Marker shapes in assignment order.
inline constexpr const char* kShapes[] = {"circle", "square", "triangle", "diamond", "cross"};

std::string num(double v);
std::string escape(std::string_view text);

/// Empty charts (no categories, no series, or all values zero) show axes and a "no data" note.
std::string render_bar_chart(const BarChart& chart);
std::string render_scatter(const ScatterChart& chart);

}  // namespace salience::svg
