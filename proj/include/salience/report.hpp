#pragma once

// Output tables (CSV, JSON) and figures (SVG) of a run.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "salience/analyze.hpp"
#include "salience/corpus.hpp"
#include "salience/salience_table.hpp"

namespace salience {

/// Writes `content` to `path` (creating parent directories). Throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

/// RFC 4180 quoting when the field holds a comma, quote, or line break.
std::string csv_field(std::string_view text);
/// Splits one CSV line, honoring quoted fields.
std::vector<std::string> split_csv_line(std::string_view line);

/// "issue,day,channel,count", one row per nonzero cell in table order.
std::string counts_csv(const SalienceTable& table);
SalienceTable parse_counts_csv(std::string_view text, Method method, const std::vector<std::string>& issues);

struct ClusterRow {
    std::string comment_id;
    int label = -1;
    std::string issue;  // empty when the comment is excluded
    Channel channel;
    DayIndex day = 0;
    double x2d = 0.0;
    double y2d = 0.0;
};

struct ExcludedRow {
    std::string comment_id;
    std::string reason;
};

std::string clusters_csv(const std::vector<ClusterRow>& rows);
std::string excluded_csv(const std::vector<ExcludedRow>& rows);

struct StatsSummary {
    std::optional<GofStat> keyword;  // absent when the table is empty
    std::optional<GofStat> cluster;
    MethodComparison comparison;
};

StatsSummary compute_stats(const SalienceTable& keyword, const SalienceTable& cluster);
nlohmann::ordered_json stats_json(const StatsSummary& stats, std::uint64_t seed);

struct ReportData {
    SalienceTable keyword;
    SalienceTable cluster;
    StatsSummary stats;
    std::vector<ClusterRow> clusters;
    std::vector<ExcludedRow> excluded;
    int window_days = 0;
    std::uint64_t seed = 0;
};

/// File names written by emit_reports.
std::vector<std::string> report_files();

/// counts_keyword.csv, counts_cluster.csv, clusters.csv, excluded.csv, stats.json and
/// fig2..fig7 SVGs. Throws IoError.
void emit_reports(const ReportData& data, const std::filesystem::path& outdir);

}  // namespace salience
