#include "doctest.h"

#include "salience/corpus.hpp"
#include "salience/textprep.hpp"
#include "salience/timeutil.hpp"

using namespace salience;

namespace {

StopwordSet small_stops() { return parse_stopwords("# test list\nthe\nA\n\nand\n", "test"); }

}  // namespace

TEST_CASE("stopword parsing skips comments and lowercases") {
    const auto s = small_stops();
    CHECK(s.words.size() == 3);
    CHECK(s.contains("a"));
    CHECK_FALSE(s.contains("#"));
    CHECK(default_stopwords().contains("the"));
}

TEST_CASE("normalize splits on punctuation and drops non-alphabetic tokens") {
    const auto s = small_stops();
    CHECK(normalize("The BORDER crisis, and the economy!!", s) == TokenList{"border", "crisis", "economy"});
    CHECK(normalize("J6 was 2021... 100% real", s) == TokenList{"was", "real"});
    CHECK(normalize("anti-woke/pro-DEI", s) == TokenList{"anti", "woke", "pro", "dei"});
    CHECK(normalize("", s).empty());
    CHECK(normalize("\xF0\x9F\x98\x82\xF0\x9F\x98\x82", s).empty());
}

TEST_CASE("edge apostrophes are stripped, inner ones make the token non-alphabetic") {
    const auto s = small_stops();
    CHECK(normalize("don't 'quoted' it's", s) == TokenList{"quoted"});
    CHECK(normalize("don\xE2\x80\x99t stop", s) == TokenList{"stop"});
}

TEST_CASE("unicode lowercase and whitespace") {
    const auto s = small_stops();
    CHECK(normalize("CAF\xC3\x89\xC2\xA0" "Na\xC3\xAFve", s) == TokenList{"caf\xC3\xA9", "na\xC3\xAFve"});
    CHECK(to_lower_utf8("\xC3\x9C" "BER") == "\xC3\xBC" "ber");
}

TEST_CASE("invalid utf-8 is replaced and counted") {
    NormalizeStats stats;
    const auto lowered = to_lower_utf8("ab\xFF" "cd\xC3", &stats);
    CHECK(stats.invalid_utf8 == 2);
    CHECK(lowered == "ab\xEF\xBF\xBD" "cd\xEF\xBF\xBD");
    NormalizeStats s2;
    CHECK(normalize("border\xFFwall", small_stops(), &s2) == TokenList{"border", "wall"});
    CHECK(s2.invalid_utf8 == 1);
}

TEST_CASE("utf-8 decode/encode round trip") {
    const std::string text = "a\xC3\xA9\xE2\x82\xAC\xF0\x9F\x98\x82";
    const auto cps = decode_utf8(text);
    CHECK(cps == std::u32string{U'a', 0xE9, 0x20AC, 0x1F602});
    CHECK(encode_utf8(cps) == text);
}

TEST_CASE("normalize is idempotent on its own output") {
    const auto s = default_stopwords();
    const auto once = normalize("Inflation is KILLING us, groceries & rent doubled; Trump's border plan!", s);
    std::string joined;
    for (const auto& t : once) joined += t + " ";
    CHECK(normalize(joined, s) == once);
}

TEST_CASE("group_concat groups in-window comments by day and channel") {
    using namespace std::chrono;
    Corpus c;
    c.window = {year{2024} / October / 29, year{2024} / November / 5};
    auto add = [&](std::string id, std::string ch, std::string ts, std::string text, bool oow = false) {
        Comment m;
        m.comment_id = std::move(id);
        m.video_id = "v";
        m.channel = Channel{std::move(ch)};
        m.author_key = "x";
        m.text = std::move(text);
        m.published_at = parse_rfc3339(ts);
        m.out_of_window = oow;
        c.comments.push_back(m);
    };
    add("b", "NYT", "2024-10-30T12:00:00Z", "second border");
    add("a", "NYT", "2024-10-30T01:00:00Z", "first inflation");
    add("c", "WSJ", "2024-10-30T02:00:00Z", "other");
    add("d", "NYT", "2024-11-09T02:00:00Z", "late", true);
    const auto g = group_concat(c, small_stops());
    REQUIRE(g.size() == 2);
    const auto& nyt = g.at(GroupKey{1, Channel{"NYT"}});
    CHECK(nyt.tokens == TokenList{"first", "inflation", "second", "border"});
    CHECK(nyt.members == std::vector<std::size_t>{1, 0});
    CHECK(nyt.boundaries == std::vector<std::size_t>{0, 2, 4});
    CHECK(nyt.member_tokens(1).size() == 2);
    CHECK(g.at(GroupKey{1, Channel{"WSJ"}}).tokens == TokenList{"other"});
}

TEST_CASE("stopwords and digit tokens are removed") {
    const auto s = parse_stopwords("is\nup\n", "t");
    CHECK(normalize("Inflation is UP!!! 100%", s) == TokenList{"inflation"});
    CHECK(normalize("Border-crisis, BORDER crisis.", s) == TokenList{"border", "crisis", "border", "crisis"});
    const auto d = default_stopwords();
    for (const auto& t : normalize("The economy is what it is and we are all in it, for the people", d))
        CHECK_FALSE(d.contains(t));
}

TEST_CASE("group_concat conserves tokens and handles an empty corpus") {
    using namespace std::chrono;
    Corpus c;
    c.window = {year{2024} / October / 29, year{2024} / November / 5};
    CHECK(group_concat(c, small_stops()).empty());

    const char* texts[] = {"the border and the wall", "A tax on tariffs", "and", "prices prices prices"};
    std::size_t expected = 0;
    for (int i = 0; i < 4; ++i) {
        Comment m;
        m.comment_id = std::to_string(i);
        m.video_id = "v";
        m.channel = Channel{i % 2 ? "WSJ" : "NYT"};
        m.author_key = "x";
        m.text = texts[i];
        m.published_at = parse_rfc3339(i < 2 ? "2024-10-29T05:00:00Z" : "2024-11-02T05:00:00Z");
        expected += normalize(m.text, small_stops()).size();
        c.comments.push_back(m);
    }
    std::size_t total = 0;
    for (const auto& [key, entry] : group_concat(c, small_stops())) total += entry.tokens.size();
    CHECK(total == expected);
}
