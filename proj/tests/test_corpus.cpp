#include "doctest.h"

#include <chrono>
#include <sstream>

#include "fixtures.hpp"
#include "salience/corpus.hpp"
#include "salience/errors.hpp"

using namespace salience;
using namespace std::chrono;

namespace {

AnalysisWindow paper_window() { return {year{2024} / October / 29, year{2024} / November / 5}; }

Comment make(std::string id, std::string text, std::string ts, std::string author = "a", std::string video = "v1") {
    Comment c;
    c.comment_id = std::move(id);
    c.video_id = std::move(video);
    c.channel = Channel{"NYT"};
    c.author_key = std::move(author);
    c.text = std::move(text);
    c.published_at = parse_rfc3339(ts);
    return c;
}

}  // namespace

TEST_CASE("day index counts calendar days from the window start") {
    const auto w = paper_window();
    CHECK(day_index(parse_rfc3339("2024-10-29T00:00:00Z"), w) == 0);
    CHECK(day_index(parse_rfc3339("2024-10-29T23:59:59Z"), w) == 0);
    CHECK(day_index(parse_rfc3339("2024-11-01T08:00:00Z"), w) == 3);
    CHECK(day_index(parse_rfc3339("2024-11-05T23:59:59Z"), w) == 7);
    CHECK_THROWS_AS(day_index(parse_rfc3339("2024-11-06T00:00:00Z"), w), OutOfWindow);
    CHECK_THROWS_AS(day_index(parse_rfc3339("2024-10-28T23:59:59Z"), w), OutOfWindow);
    CHECK(w.length_days() == 8);
}

TEST_CASE("window validation") {
    AnalysisWindow bad{year{2024} / November / 5, year{2024} / October / 29};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("dedupe drops repeated ids and reposts, keeps the earliest") {
    std::vector<Comment> in{
        make("c2", "border crisis", "2024-10-30T10:00:00Z"),
        make("c1", "border crisis", "2024-10-30T09:00:00Z"),
        make("c1", "border crisis", "2024-10-30T09:00:00Z"),
        make("c3", "border crisis", "2024-10-30T09:00:00Z", "b"),
        make("c4", "border crisis", "2024-10-30T09:00:00Z", "a", "v2"),
    };
    const auto out = dedupe(in);
    REQUIRE(out.size() == 3);
    CHECK(out[0].comment_id == "c1");
    CHECK(out[1].comment_id == "c3");
    CHECK(out[2].comment_id == "c4");
}

TEST_CASE("dedupe is idempotent and order independent") {
    const auto raw = testing::synthetic_corpus_500().corpus.comments;
    const auto once = dedupe(raw);
    CHECK(dedupe(once) == once);
    auto reversed = raw;
    std::reverse(reversed.begin(), reversed.end());
    CHECK(dedupe(reversed) == once);
}

TEST_CASE("author hashing is salted and truncated") {
    const auto k = hash_author("alice", "salt");
    CHECK(k.size() == 16);
    CHECK(k == hash_author("alice", "salt"));
    CHECK(k != hash_author("alice", "pepper"));
    CHECK(k != hash_author("bob", "salt"));
}

TEST_CASE("corpus jsonl round trip") {
    const auto fx = testing::synthetic_corpus_500();
    std::stringstream buf;
    write_corpus(fx.corpus, buf);
    const Corpus back = read_corpus(buf);
    CHECK(back == fx.corpus);
    const auto n = count_corpus(back);
    CHECK(n.comments == fx.spec.raw);
    CHECK(n.top_level + n.replies == n.comments);
}

TEST_CASE("schema errors carry line numbers") {
    std::stringstream buf;
    buf << R"({"kind":"window","start_date":"2024-10-29","end_date":"2024-11-05"})" << "\n";
    buf << R"({"kind":"comment","comment_id":"x"})" << "\n";
    try {
        (void)read_corpus(buf);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.line() == 2u);
    }
}

TEST_CASE("validation rejects duplicate ids and dangling videos") {
    Corpus c;
    c.window = paper_window();
    Video v;
    v.video_id = "v1";
    v.channel = Channel{"NYT"};
    c.videos.push_back(v);
    c.comments.push_back(make("c1", "x", "2024-10-30T10:00:00Z"));
    CHECK_NOTHROW(validate_corpus(c));
    c.comments.push_back(make("c1", "y", "2024-10-30T11:00:00Z"));
    CHECK_THROWS_AS(validate_corpus(c), SchemaError);
    c.comments.back().comment_id = "c2";
    c.comments.back().video_id = "nope";
    CHECK_THROWS_AS(validate_corpus(c), SchemaError);
}

TEST_CASE("out-of-window comments are flagged, not dropped") {
    auto fx = testing::synthetic_corpus_500();
    Corpus c = fx.corpus;
    c.comments = dedupe(c.comments);
    flag_out_of_window(c);
    CHECK(c.comments.size() == fx.spec.deduped);
    CHECK(count_corpus(c).out_of_window == fx.spec.out_of_window);
}

TEST_CASE("day index examples and monotonicity") {
    const auto w = paper_window();
    CHECK(day_index(parse_rfc3339("2024-10-29T13:00:00Z"), w) == 0);
    CHECK(day_index(parse_rfc3339("2024-11-05T01:00:00Z"), w) == 7);
    auto t = parse_rfc3339("2024-10-29T00:00:00Z");
    int last = 0;
    for (int step = 0; step < 8 * 24 * 4; ++step, t += minutes(15)) {
        const int d = day_index(t, w);
        CHECK(d >= last);
        last = d;
    }
}

TEST_CASE("dedupe never grows its input") {
    const auto raw = testing::synthetic_corpus_500().corpus.comments;
    CHECK(dedupe(raw).size() <= raw.size());
    CHECK(dedupe({}).empty());
}
