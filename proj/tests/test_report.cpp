#include "doctest.h"

#include <regex>

#include "fixtures.hpp"
#include "json.hpp"
#include "salience/report.hpp"
#include "salience/svg.hpp"

using namespace salience;

namespace {

const std::vector<std::string> kIssues{"Immigration", "Inflation", "Identity politics", "Democracy", "Public health"};

SalienceTable table(Method m, std::initializer_list<std::tuple<std::size_t, int, const char*, std::uint64_t>> cells) {
    SalienceTable t;
    t.method = m;
    t.issues = kIssues;
    for (const auto& [issue, day, ch, n] : cells) t.add(SalienceCell{issue, day, Channel{ch}}, n);
    return t;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
    return n;
}

ReportData sample_data() {
    ReportData d;
    d.keyword = table(Method::Keyword, {{0, 0, "NYT", 12}, {1, 3, "WSJ", 5}, {4, 7, "NYT", 2}, {2, 1, "WSJ", 1}});
    d.cluster = table(Method::Cluster, {{0, 0, "NYT", 3}, {1, 2, "WSJ", 2}, {0, 2, "WSJ", 1}});
    d.stats = compute_stats(d.keyword, d.cluster);
    d.clusters = {{"c1", 0, "Immigration", Channel{"NYT"}, 0, 1.5, -2.0},
                  {"c2", 1, "", Channel{"WSJ"}, 2, 0.25, 3.0},
                  {"c3", -1, "", Channel{"WSJ"}, 2, 0.0, 0.0}};
    d.excluded = {{"c2", "new_category:other"}, {"c3", "noise"}};
    d.window_days = 8;
    d.seed = 42;
    return d;
}

}  // namespace

TEST_CASE("csv quoting") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(split_csv_line("x,\"a,b\",\"q\"\"q\",") == std::vector<std::string>{"x", "a,b", "q\"q", ""});
}

TEST_CASE("counts csv round trip") {
    const auto t = table(Method::Keyword, {{0, 0, "NYT", 12}, {3, 5, "WSJ", 4}});
    const auto text = counts_csv(t);
    CHECK(text.starts_with("issue,day,channel,count\n"));
    CHECK(parse_counts_csv(text, Method::Keyword, kIssues) == t);
}

TEST_CASE("svg number formatting") {
    CHECK(svg::num(1.0) == "1.000000");
    CHECK(svg::num(-0.0) == "0.000000");
    CHECK(svg::num(-1e-9) == "0.000000");
    CHECK(svg::escape("<a & \"b\">") == "&lt;a &amp; &quot;b&quot;&gt;");
}

TEST_CASE("empty bar charts render a no-data note") {
    svg::BarChart c;
    c.title = "Empty";
    const auto s = svg::render_bar_chart(c);
    CHECK(s.starts_with("<svg"));
    CHECK(s.find("no-data") != std::string::npos);
    c.categories = {"A", "B"};
    c.series = {{"x", {0.0, 0.0}}};
    CHECK(svg::render_bar_chart(c).find("no-data") != std::string::npos);
    c.series[0].values[1] = 3.0;
    CHECK(svg::render_bar_chart(c).find("no-data") == std::string::npos);
}

TEST_CASE("scatter encodes a second attribute by marker shape") {
    svg::ScatterChart c;
    c.color_names = {"Immigration", "Inflation"};
    c.shape_names = {"NYT", "WSJ"};
    c.points = {{0, 0, 0, 0}, {1, 1, 1, 1}, {2, 0, 0, 1}};
    const auto s = svg::render_scatter(c);
    CHECK(count_of(s, "class=\"marker\"") == 3);
    CHECK(count_of(s, "data-shape=\"circle\"") >= 1);
    CHECK(count_of(s, "data-shape=\"square\"") >= 1);
}

TEST_CASE("stats json layout") {
    const auto d = sample_data();
    const auto j = stats_json(d.stats, 42);
    CHECK(j["seed"] == 42);
    REQUIRE(j["methods"].size() == 2);
    CHECK(j["methods"][0]["method"] == "keyword");
    CHECK(j["methods"][0]["df"] == 4);
    CHECK(j["methods"][0]["counts"]["Immigration"] == 12);
    CHECK(j["methods"][0]["counts"]["Democracy"] == 0);
    CHECK(j["comparison"]["keyword_ranking"][0] == "Immigration");
    CHECK(j["comparison"]["top_issue_agrees"] == true);
}

TEST_CASE("emitted reports are complete and consistent") {
    testing::TempDir dir("report");
    const auto d = sample_data();
    emit_reports(d, dir.path());
    for (const auto& f : report_files()) CHECK(std::filesystem::exists(dir / f));
    CHECK(report_files().size() == 11);

    // CSV sums agree with the counts in stats.json
    const auto stats = nlohmann::json::parse(read_text_file(dir / "stats.json"));
    for (const auto& [file, m] : {std::pair{"counts_keyword.csv", 0}, std::pair{"counts_cluster.csv", 1}}) {
        const auto t = parse_counts_csv(read_text_file(dir / file), m ? Method::Cluster : Method::Keyword, kIssues);
        const auto totals = t.issue_totals();
        for (std::size_t i = 0; i < kIssues.size(); ++i)
            CHECK(stats["methods"][static_cast<std::size_t>(m)]["counts"][kIssues[i]] == totals[i]);
    }

    const auto fig4 = read_text_file(dir / "fig4_cluster_scatter.svg");
    CHECK(count_of(fig4, "data-shape=\"circle\"") >= 1);
    CHECK(count_of(fig4, "data-shape=\"square\"") >= 1);
    CHECK(fig4.find("data-shape=\"triangle\"") == std::string::npos);
    for (const auto& f : report_files())
        if (f.ends_with(".svg")) CHECK(read_text_file(dir / f).find("<desc>seed 42</desc>") != std::string::npos);

    const auto excl = read_text_file(dir / "excluded.csv");
    CHECK(excl == "comment_id,reason\nc2,new_category:other\nc3,noise\n");
    CHECK(read_text_file(dir / "clusters.csv").starts_with("comment_id,label,issue,channel,day,x2d,y2d\n"));

    // same input, same bytes
    testing::TempDir again("report2");
    emit_reports(d, again.path());
    for (const auto& f : report_files()) CHECK(read_text_file(dir / f) == read_text_file(again / f));
}

TEST_CASE("empty tables still produce every file") {
    testing::TempDir dir("report-empty");
    ReportData d;
    d.keyword.issues = kIssues;
    d.cluster.issues = kIssues;
    d.cluster.method = Method::Cluster;
    d.stats = compute_stats(d.keyword, d.cluster);
    CHECK_FALSE(d.stats.keyword);
    d.window_days = 8;
    emit_reports(d, dir.path());
    for (const auto& f : report_files()) CHECK(std::filesystem::exists(dir / f));
    CHECK(read_text_file(dir / "fig2_keyword_totals.svg").find("no-data") != std::string::npos);
    CHECK(read_text_file(dir / "counts_keyword.csv") == "issue,day,channel,count\n");
}
