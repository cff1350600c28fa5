#include "salience/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "salience/errors.hpp"
#include "salience/svg.hpp"

namespace salience {

using nlohmann::ordered_json;

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read {}", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back().push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back().push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else if (c != '\r') {
            fields.back().push_back(c);
        }
    }
    return fields;
}

std::string counts_csv(const SalienceTable& table) {
    std::string out = "issue,day,channel,count\n";
    for (const auto& [cell, n] : table.counts)
        out += fmt::format("{},{},{},{}\n", csv_field(table.issues.at(cell.issue)), cell.day,
                           csv_field(cell.channel.name), n);
    return out;
}

SalienceTable parse_counts_csv(std::string_view text, Method method, const std::vector<std::string>& issues) {
    SalienceTable table;
    table.method = method;
    table.issues = issues;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 4) throw SchemaError("counts row must have 4 fields", line_no);
        const auto it = std::find(issues.begin(), issues.end(), f[0]);
        if (it == issues.end()) throw SchemaError(fmt::format("unknown issue '{}'", f[0]), line_no);
        try {
            table.add({static_cast<std::size_t>(it - issues.begin()), std::stoi(f[1]), Channel{f[2]}},
                      std::stoull(f[3]));
        } catch (const std::logic_error&) {
            throw SchemaError("day and count must be integers", line_no);
        }
    }
    return table;
}

std::string clusters_csv(const std::vector<ClusterRow>& rows) {
    std::string out = "comment_id,label,issue,channel,day,x2d,y2d\n";
    for (const auto& r : rows)
        out += fmt::format("{},{},{},{},{},{},{}\n", csv_field(r.comment_id), r.label, csv_field(r.issue),
                           csv_field(r.channel.name), r.day, svg::num(r.x2d), svg::num(r.y2d));
    return out;
}

std::string excluded_csv(const std::vector<ExcludedRow>& rows) {
    std::string out = "comment_id,reason\n";
    for (const auto& r : rows) out += fmt::format("{},{}\n", csv_field(r.comment_id), csv_field(r.reason));
    return out;
}

StatsSummary compute_stats(const SalienceTable& keyword, const SalienceTable& cluster) {
    StatsSummary s;
    s.comparison = compare_methods(keyword, cluster);
    auto gof = [](const std::vector<std::uint64_t>& totals) -> std::optional<GofStat> {
        try {
            return chi_square_gof(totals);
        } catch (const DegenerateInput&) {
            return std::nullopt;
        }
    };
    s.keyword = gof(s.comparison.keyword_totals);
    s.cluster = gof(s.comparison.cluster_totals);
    return s;
}

namespace {

double round_fixed(double v) { return std::stod(fmt::format("{:.6f}", v)); }
double round_significant(double v) { return std::stod(fmt::format("{:.6e}", v)); }

ordered_json method_block(std::string_view method, const std::optional<GofStat>& g,
                          const std::vector<std::string>& issues, const std::vector<std::uint64_t>& totals) {
    ordered_json j;
    j["method"] = method;
    j["chi2"] = g ? ordered_json(round_fixed(g->chi2)) : ordered_json(nullptr);
    j["df"] = static_cast<int>(issues.size()) - 1;
    j["p_value"] = g ? ordered_json(round_significant(g->p_value)) : ordered_json(nullptr);
    ordered_json counts = ordered_json::object();
    for (std::size_t i = 0; i < issues.size(); ++i) counts[issues[i]] = totals[i];
    j["counts"] = std::move(counts);
    return j;
}

std::vector<std::string> day_labels(int days) {
    std::vector<std::string> out;
    for (int d = 0; d < days; ++d) out.push_back(fmt::format("Day {}", d));
    return out;
}

std::string totals_chart(const SalienceTable& t, const std::string& title, const std::string& y_label) {
    svg::BarChart c{title, "Issue", y_label, t.issues, {}};
    svg::BarSeries s{"", {}};
    for (auto v : t.issue_totals()) s.values.push_back(static_cast<double>(v));
    c.series.push_back(std::move(s));
    return svg::render_bar_chart(c);
}

std::string by_day_chart(const SalienceTable& t, int days, const std::string& title, const std::string& y_label) {
    svg::BarChart c{title, "Day", y_label, day_labels(days), {}};
    const auto by_day = t.totals_by_day();
    for (std::size_t i = 0; i < t.issues.size(); ++i) {
        svg::BarSeries s{t.issues[i], std::vector<double>(static_cast<std::size_t>(std::max(days, 0)), 0.0)};
        for (const auto& [day, totals] : by_day)
            if (day >= 0 && day < days) s.values[static_cast<std::size_t>(day)] = static_cast<double>(totals[i]);
        c.series.push_back(std::move(s));
    }
    return svg::render_bar_chart(c);
}

std::string by_channel_chart(const SalienceTable& t, const std::string& title, const std::string& y_label) {
    svg::BarChart c{title, "Issue", y_label, t.issues, {}};
    for (const auto& [channel, totals] : t.totals_by_channel()) {
        svg::BarSeries s{channel.name, {}};
        for (auto v : totals) s.values.push_back(static_cast<double>(v));
        c.series.push_back(std::move(s));
    }
    return svg::render_bar_chart(c);
}

std::string scatter_chart(const ReportData& data) {
    svg::ScatterChart c;
    c.title = "Comment clusters (2-D layout)";
    c.color_names = data.cluster.issues;
    c.color_names.push_back("excluded");
    std::set<std::string> channels;
    for (const auto& r : data.clusters) channels.insert(r.channel.name);
    c.shape_names.assign(channels.begin(), channels.end());
    for (const auto& r : data.clusters) {
        const auto issue_it = std::find(data.cluster.issues.begin(), data.cluster.issues.end(), r.issue);
        const auto color = static_cast<std::size_t>(issue_it - data.cluster.issues.begin());
        const auto shape =
            static_cast<std::size_t>(std::distance(channels.begin(), channels.find(r.channel.name)));
        c.points.push_back({r.x2d, r.y2d, color, shape});
    }
    return svg::render_scatter(c);
}

}  // namespace

ordered_json stats_json(const StatsSummary& stats, std::uint64_t seed) {
    const auto& cmp = stats.comparison;
    ordered_json j;
    j["seed"] = seed;
    j["methods"] = ordered_json::array({method_block("keyword", stats.keyword, cmp.issues, cmp.keyword_totals),
                                        method_block("cluster", stats.cluster, cmp.issues, cmp.cluster_totals)});
    ordered_json c;
    c["keyword_ranking"] = cmp.keyword_ranking;
    c["cluster_ranking"] = cmp.cluster_ranking;
    c["top3_overlap"] = cmp.top3_overlap;
    c["top_issue_agrees"] = !cmp.keyword_ranking.empty() && cmp.keyword_ranking.front() == cmp.cluster_ranking.front();
    j["comparison"] = std::move(c);
    return j;
}

std::vector<std::string> report_files() {
    return {"counts_keyword.csv", "counts_cluster.csv", "clusters.csv", "excluded.csv", "stats.json",
            "fig2_keyword_totals.svg", "fig3_keyword_by_day.svg", "fig4_cluster_scatter.svg",
            "fig5_cluster_by_channel.svg", "fig6_cluster_totals.svg", "fig7_cluster_by_day.svg"};
}

namespace {

// Records the run seed as the first child of the <svg> element.
std::string with_seed(std::string svg_text, std::uint64_t seed) {
    const auto at = svg_text.find('\n') + 1;
    return svg_text.insert(at, fmt::format("<desc>seed {}</desc>\n", seed));
}

}  // namespace

void emit_reports(const ReportData& data, const std::filesystem::path& outdir) {
    const auto write_svg = [&](const char* name, std::string body) {
        write_text_file(outdir / name, with_seed(std::move(body), data.seed));
    };
    write_text_file(outdir / "counts_keyword.csv", counts_csv(data.keyword));
    write_text_file(outdir / "counts_cluster.csv", counts_csv(data.cluster));
    write_text_file(outdir / "clusters.csv", clusters_csv(data.clusters));
    write_text_file(outdir / "excluded.csv", excluded_csv(data.excluded));
    write_text_file(outdir / "stats.json", stats_json(data.stats, data.seed).dump(2) + "\n");
    write_svg("fig2_keyword_totals.svg",
              totals_chart(data.keyword, "Issue mentions by keyword matching", "Keyword occurrences"));
    write_svg("fig3_keyword_by_day.svg",
              by_day_chart(data.keyword, data.window_days, "Keyword issue mentions by day", "Keyword occurrences"));
    write_svg("fig4_cluster_scatter.svg", scatter_chart(data));
    write_svg("fig5_cluster_by_channel.svg",
              by_channel_chart(data.cluster, "Cluster issue frequency by channel", "Comments"));
    write_svg("fig6_cluster_totals.svg", totals_chart(data.cluster, "Issue frequency by cluster analysis", "Comments"));
    write_svg("fig7_cluster_by_day.svg",
              by_day_chart(data.cluster, data.window_days, "Cluster issue frequency by day", "Comments"));
}

}  // namespace salience
