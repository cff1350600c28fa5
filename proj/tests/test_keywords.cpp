#include "doctest.h"

#include <algorithm>

#include "oracles.hpp"
#include "salience/errors.hpp"
#include "salience/keywords.hpp"
#include "salience/random.hpp"
#include "salience/textprep.hpp"
#include "salience/timeutil.hpp"

using namespace salience;

namespace {

const StopwordSet& stops() {
    static const StopwordSet s = default_stopwords();
    return s;
}

const IssueTaxonomy& tax() {
    static const IssueTaxonomy t = default_taxonomy(stops());
    return t;
}

MatchCounts match_text(std::string_view text, CountMode mode = CountMode::Occurrences) {
    return match_comment(normalize(text, stops()), text, tax(), mode);
}

std::uint64_t issue_count(std::string_view text, std::string_view issue) {
    return match_text(text).per_issue.at(tax().find_issue(issue));
}

}  // namespace

TEST_CASE("shipped taxonomy has five issues and thirty-five keywords") {
    CHECK(tax().issue_names() ==
          std::vector<std::string>{"Immigration", "Inflation", "Identity politics", "Democracy", "Public health"});
    CHECK(tax().rule_count() == 35);
    CHECK(tax().issues[0].rules.size() == 8);
    CHECK(tax().find_issue("public HEALTH") == 4);
    CHECK(tax().find_issue("Crime") == std::string::npos);
}

TEST_CASE("longest phrase wins at a position") {
    CHECK(issue_count("The border crisis is real", "Immigration") == 1);
    CHECK(issue_count("border border crisis", "Immigration") == 2);
    CHECK(issue_count("Illegal immigration and immigration", "Immigration") == 2);
    CHECK(issue_count("the woke agenda, so woke", "Identity politics") == 2);
    CHECK(issue_count("nothing to see", "Immigration") == 0);
}

TEST_CASE("case and punctuation do not matter") {
    CHECK(issue_count("INFLATION!!! cost-of-living", "Inflation") == 2);
    CHECK(issue_count("Covid.vaccines", "Public health") == 2);
}

TEST_CASE("RFK Jr. counts once, RFK alone counts once") {
    CHECK(issue_count("RFK Jr. will fix it", "Public health") == 1);
    CHECK(issue_count("rfk jr", "Public health") == 1);
    CHECK(issue_count("RFK is running", "Public health") == 1);
}

TEST_CASE("digit-bearing keywords match the raw text with word bounds") {
    CHECK(issue_count("Remember J6!", "Democracy") == 1);
    CHECK(issue_count("j6 and J6", "Democracy") == 2);
    CHECK(issue_count("MJ6X", "Democracy") == 0);
    CHECK(issue_count("January 6 was awful", "Democracy") == 1);
    CHECK(issue_count("January   6th", "Democracy") == 0);
    CHECK(issue_count("January 16", "Democracy") == 0);
    CHECK(count_word_bounded("aa aa aaa", "aa") == 2);
}

TEST_CASE("cooccurrence rules count once per comment") {
    const auto idx = tax().find_issue("Identity politics");
    const auto m = match_text("transgender athletes in sports, sports everywhere");
    CHECK(m.per_issue[idx] == 2);  // the cooccur rule plus the "transgender" phrase
    CHECK(match_text("sports only").per_issue[idx] == 0);
    CHECK(match_text("gender affirming care for children").per_issue[idx] == 1);
    CHECK(match_text("gender affirming care").per_issue[idx] == 0);
}

TEST_CASE("comment count mode caps each issue at one") {
    const auto m = match_text("border border border inflation", CountMode::Comments);
    CHECK(m.per_issue[0] == 1);
    CHECK(m.per_issue[1] == 1);
    std::uint64_t rule_sum = 0;
    for (auto n : m.per_rule[0]) rule_sum += n;
    CHECK(rule_sum == 1);
}

TEST_CASE("matcher agrees with the reference on random comments") {
    for (const auto& text : testing::random_keyword_comments(1000, 20, 2024)) {
        INFO(text);
        REQUIRE(match_text(text).per_issue == testing::keyword_oracle(text, tax(), stops()));
    }
}

TEST_CASE("taxonomy parsing errors") {
    CHECK_THROWS_AS(parse_taxonomy(R"({"issues":[{"name":"A","keywords":[]}]})", stops()), SchemaError);
    CHECK_THROWS_AS(parse_taxonomy(R"({"issues":[{"name":"A","keywords":["x"]},{"name":"a","keywords":["y"]}]})",
                                   stops()),
                    SchemaError);
    CHECK_THROWS_AS(parse_taxonomy("not json", stops()), SchemaError);
    const auto t = parse_taxonomy(R"({"issues":[{"name":"Crime","keywords":["crime wave",{"all_of":[["police"],["budget","funding"]]}]}]})",
                                  stops());
    CHECK(t.rule_count() == 2);
    CHECK(match_comment(normalize("police funding", stops()), "police funding", t).per_issue[0] == 1);
}

TEST_CASE("keyword salience table sums comments per day and channel") {
    using namespace std::chrono;
    Corpus c;
    c.window = {year{2024} / October / 29, year{2024} / November / 5};
    auto add = [&](std::string id, std::string ch, std::string ts, std::string text) {
        Comment m;
        m.comment_id = std::move(id);
        m.video_id = "v";
        m.channel = Channel{std::move(ch)};
        m.author_key = id;
        m.text = std::move(text);
        m.published_at = parse_rfc3339(ts);
        c.comments.push_back(m);
    };
    add("1", "NYT", "2024-10-29T10:00:00Z", "border border");
    add("2", "NYT", "2024-10-29T11:00:00Z", "inflation");
    add("3", "WSJ", "2024-10-31T11:00:00Z", "border");
    const auto table = salience_table_keywords(c, tax(), stops());
    CHECK(table.issue_totals() == std::vector<std::uint64_t>{3, 1, 0, 0, 0});
    CHECK(table.counts.at(SalienceCell{0, 0, Channel{"NYT"}}) == 2);
    CHECK(table.counts.at(SalienceCell{0, 2, Channel{"WSJ"}}) == 1);
    CHECK(salience_table_keywords(c, tax(), stops(), CountMode::Comments).issue_totals() ==
          std::vector<std::uint64_t>{2, 1, 0, 0, 0});
}

TEST_CASE("plain examples") {
    CHECK(issue_count("woke woke agenda", "Identity politics") == 2);
    for (std::size_t i = 0; i < tax().issues.size(); ++i) CHECK(match_text("I love puppies").per_issue[i] == 0);
    CHECK(issue_count("transparent sports coverage", "Identity politics") == 0);
    CHECK(match_text("BORDER Crisis").per_issue == match_text("border crisis").per_issue);
}

namespace {

Corpus window_corpus() {
    using namespace std::chrono;
    Corpus c;
    c.window = {year{2024} / October / 29, year{2024} / November / 5};
    return c;
}

void add_comment(Corpus& c, std::string id, std::string channel, std::string text) {
    Comment m;
    m.comment_id = std::move(id);
    m.video_id = "v";
    m.channel = Channel{std::move(channel)};
    m.author_key = "a";
    m.text = std::move(text);
    m.published_at = parse_rfc3339("2024-10-31T12:00:00Z");
    c.comments.push_back(std::move(m));
}

}  // namespace

TEST_CASE("tables are empty for an empty corpus and additive over disjoint corpora") {
    CHECK(salience_table_keywords(window_corpus(), tax(), stops()).counts.empty());

    const auto texts = testing::random_keyword_comments(200, 15, 77);
    Corpus all = window_corpus(), first = window_corpus(), second = window_corpus();
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const std::string ch = i % 3 ? "NYT" : "WSJ";
        add_comment(all, std::to_string(i), ch, texts[i]);
        add_comment(i < 100 ? first : second, std::to_string(i), ch, texts[i]);
    }
    const auto a = salience_table_keywords(first, tax(), stops()).issue_totals();
    const auto b = salience_table_keywords(second, tax(), stops()).issue_totals();
    const auto whole = salience_table_keywords(all, tax(), stops()).issue_totals();
    for (std::size_t i = 0; i < whole.size(); ++i) CHECK(whole[i] == a[i] + b[i]);
}

TEST_CASE("custom single-issue taxonomy") {
    const auto t = parse_taxonomy(R"({"issues":[{"name":"Weather","keywords":["storm","heat wave"]}]})", stops());
    Corpus c = window_corpus();
    add_comment(c, "1", "NYT", "A storm and a heat wave, then another storm");
    add_comment(c, "2", "NYT", "border crisis");
    const auto table = salience_table_keywords(c, t, stops());
    CHECK(table.issue_totals() == std::vector<std::uint64_t>{3});
}

TEST_CASE("a corpus dominated by one issue ranks it first") {
    Corpus c = window_corpus();
    for (int i = 0; i < 30; ++i) add_comment(c, "i" + std::to_string(i), "NYT", "the border crisis again");
    for (int i = 0; i < 5; ++i) add_comment(c, "f" + std::to_string(i), "NYT", "inflation hurts");
    const auto totals = salience_table_keywords(c, tax(), stops()).issue_totals();
    CHECK(std::max_element(totals.begin(), totals.end()) - totals.begin() == tax().find_issue("Immigration"));
}
