#include "fixtures.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <map>

#include "json.hpp"
#include "salience/random.hpp"

namespace salience::testing {

using nlohmann::json;
namespace fs = std::filesystem;

TempDir::TempDir(std::string_view tag) {
    static std::uint64_t counter = 0;
    const auto stamp = static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count());
    path_ = fs::temp_directory_path() / fmt::format("salience-{}-{:x}-{}", tag, stamp, counter++);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

LabeledPoints gaussian_blobs(std::size_t per_blob, std::size_t n_blobs, std::size_t dim, double separation,
                             std::uint64_t seed) {
    CounterRng rng = make_stream(seed, "fixture:blobs");
    LabeledPoints out;
    out.points = DenseMatrix(per_blob * n_blobs, dim);
    for (std::size_t b = 0; b < n_blobs; ++b) {
        for (std::size_t p = 0; p < per_blob; ++p) {
            const std::size_t row = b * per_blob + p;
            for (std::size_t d = 0; d < dim; ++d) out.points(row, d) = rng.normal();
            out.points(row, 0) += separation * static_cast<double>(b);
            out.truth.push_back(static_cast<int>(b));
        }
    }
    return out;
}

LabeledPoints permute(const LabeledPoints& in, const std::vector<std::size_t>& perm) {
    LabeledPoints out;
    out.points = DenseMatrix(in.points.rows, in.points.cols);
    for (std::size_t r = 0; r < perm.size(); ++r) {
        std::copy(in.points.row(perm[r]).begin(), in.points.row(perm[r]).end(), out.points.row(r).begin());
        out.truth.push_back(in.truth[perm[r]]);
    }
    return out;
}

namespace {

struct IssueVocabulary {
    std::vector<std::string> keywords;
    std::vector<std::string> context;
};

// Keywords are written as they appear in comments; context words belong to no issue's keywords.
const std::vector<IssueVocabulary>& vocabulary() {
    static const std::vector<IssueVocabulary> v{
        {{"immigration", "illegal immigration", "illegal immigrants", "migrant crime", "the border crisis",
          "the border", "every migrant", "each immigrant"},
         {"deportation", "asylum", "visas", "caravans", "crossings", "patrols"}},
        {{"the cost of living", "the high price of food", "the high price of gas", "inflation"},
         {"groceries", "rent", "paychecks", "mortgages", "wages", "budgets"}},
        {{"identity politics", "woke", "the woke agenda", "wokeness", "DEI", "critical race theory", "trans",
          "gender identity", "transgender"},
         {"pronouns", "campuses", "curriculum", "activists", "ideology", "bathrooms"}},
        {{"democracy", "January 6", "J6", "election denial"},
         {"ballots", "capitol", "insurrection", "certification", "voters", "constitution"}},
        {{"MAHA", "Make America Healthy Again", "RFK", "RFK Jr.", "vaccines", "vaccination", "covid",
          "public health"},
         {"doctors", "hospitals", "nutrition", "pandemic", "chemicals", "autism"}},
    };
    return v;
}

const std::vector<std::string> kFillers{"honestly", "really", "seriously", "folks", "everyone", "totally"};

template <typename T>
const T& pick(const std::vector<T>& v, CounterRng& rng) {
    return v[static_cast<std::size_t>(rng.below(v.size()))];
}

std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

std::string issue_sentence(const IssueVocabulary& vocab, CounterRng& rng) {
    const auto& kw1 = pick(vocab.keywords, rng);
    std::string kw2 = pick(vocab.keywords, rng);
    while (kw2 == kw1) kw2 = pick(vocab.keywords, rng);
    return fmt::format("{} {} {} {} {} {}.", capitalize(pick(kFillers, rng)), kw1, pick(vocab.context, rng),
                       pick(vocab.context, rng), kw2, pick(vocab.context, rng));
}

}  // namespace

LabeledSentences issue_sentences(const std::vector<std::size_t>& per_issue, std::uint64_t seed) {
    CounterRng rng = make_stream(seed, "fixture:sentences");
    LabeledSentences out;
    for (std::size_t i = 0; i < per_issue.size() && i < vocabulary().size(); ++i) {
        for (std::size_t k = 0; k < per_issue[i]; ++k) {
            out.texts.push_back(issue_sentence(vocabulary()[i], rng));
            out.issue.push_back(static_cast<int>(i));
        }
    }
    return out;
}

std::vector<std::string> offtopic_sentences(std::size_t n, std::uint64_t seed) {
    static const std::vector<IssueVocabulary> topics{
        {{"this recipe", "the lasagna", "my grandmother's soup", "the sourdough"},
         {"delicious", "oven", "garlic", "basil", "kitchen", "baking"}},
        {{"the quarterback", "this touchdown", "the playoffs", "the halftime show"},
         {"stadium", "coach", "fans", "tickets", "referee", "league"}},
    };
    CounterRng rng = make_stream(seed, "fixture:offtopic");
    std::vector<std::string> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back(issue_sentence(topics[k % topics.size()], rng));
    return out;
}

SyntheticCorpus synthetic_corpus_500(std::uint64_t seed) {
    using namespace std::chrono;
    CounterRng rng = make_stream(seed, "fixture:corpus500");
    SyntheticCorpus out;
    auto& spec = out.spec;
    spec.issue_counts = {100, 60, 80, 90, 50};
    spec.offtopic = 60;
    spec.degenerate = 10;
    spec.out_of_window = 20;
    spec.duplicate_ids = 15;
    spec.reposts = 15;

    Corpus& c = out.corpus;
    c.window = {year{2024} / October / 29, year{2024} / November / 5};
    const std::vector<Channel> channels{{"NYT"}, {"WSJ"}};
    for (std::size_t v = 0; v < 6; ++v) {
        Video video;
        video.video_id = fmt::format("vid{:02}", v);
        video.channel = channels[v % 2];
        video.title = fmt::format("Election coverage part {}", v + 1);
        video.description = "Analysis of the 2024 presidential election.";
        video.tags = {"election", "politics"};
        video.published_at = UtcTime{sys_days{c.window.start}} + hours{static_cast<int>(v) * 20};
        c.videos.push_back(std::move(video));
    }

    const auto window_ms = static_cast<std::uint64_t>(
        duration_cast<milliseconds>(days{c.window.length_days()}).count());
    auto in_window_time = [&] {
        const auto offset = (rng.below(window_ms / 1000)) * 1000;
        return UtcTime{sys_days{c.window.start}} + milliseconds{offset};
    };

    std::vector<std::string> texts;
    const auto sentences = issue_sentences(spec.issue_counts, seed);
    texts = sentences.texts;
    for (auto& t : offtopic_sentences(spec.offtopic, seed)) texts.push_back(std::move(t));
    const std::vector<std::string> degenerate{"ok", "no", "\xF0\x9F\x98\x82", "!!", "\xF0\x9F\x91\x8D",
                                              "\xF0\x9F\x98\x82\xF0\x9F\x98\x82", "?", "hm", "..", "\xF0\x9F\x94\xA5"};
    for (std::size_t k = 0; k < spec.degenerate; ++k) texts.push_back(degenerate[k % degenerate.size()]);

    std::size_t next_id = 0;
    std::map<std::string, std::vector<std::string>> tops_by_video;
    auto make_comment = [&](std::string text, UtcTime when) {
        Comment cm;
        cm.comment_id = fmt::format("c{:04}", next_id++);
        const Video& v = c.videos[static_cast<std::size_t>(rng.below(c.videos.size()))];
        cm.video_id = v.video_id;
        cm.channel = v.channel;
        cm.author_key = hash_author(fmt::format("user{}", rng.below(200)), "fixture");
        cm.text = std::move(text);
        cm.published_at = when;
        auto& tops = tops_by_video[v.video_id];
        if (!tops.empty() && rng.uniform01() < 0.4) {
            cm.is_reply = true;
            cm.parent_id = tops[static_cast<std::size_t>(rng.below(tops.size()))];
        } else {
            tops.push_back(cm.comment_id);
        }
        return cm;
    };

    // Shuffle the texts so issue, off-topic and emoji comments interleave in time.
    std::vector<std::size_t> order(texts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
    for (const auto i : order) c.comments.push_back(make_comment(texts[i], in_window_time()));

    // Published after the window closes (late replies are common on news videos).
    const auto late = issue_sentences({4, 4, 4, 4, 4}, seed + 1);
    for (std::size_t k = 0; k < spec.out_of_window; ++k)
        c.comments.push_back(make_comment(late.texts[k], UtcTime{sys_days{c.window.end} + days{1 + k % 3}} + hours{k}));

    const std::size_t base = c.comments.size();
    // Same comment delivered twice by the API.
    for (std::size_t k = 0; k < spec.duplicate_ids; ++k) c.comments.push_back(c.comments[(k * 17) % base]);
    // Same author reposting the same text under a new id, a few minutes later.
    for (std::size_t k = 0; k < spec.reposts; ++k) {
        Comment repost = c.comments[(k * 29 + 5) % base];
        repost.comment_id = fmt::format("c{:04}", next_id++);
        repost.published_at += minutes{3};
        repost.is_reply = false;
        repost.parent_id.reset();
        c.comments.push_back(std::move(repost));
    }

    std::sort(c.comments.begin(), c.comments.end(), comment_order);
    flag_out_of_window(c);
    spec.raw = c.comments.size();
    spec.deduped = spec.raw - spec.duplicate_ids - spec.reposts;
    return out;
}

fs::path source_dir() { return fs::path(SALIENCE_SOURCE_DIR); }
fs::path bundled_corpus_path() { return source_dir() / "data" / "fixtures" / "synthetic_500.jsonl"; }
fs::path bundled_config_path() { return source_dir() / "data" / "fixtures" / "synthetic_500.run.json"; }

// ---- recorded YouTube responses ----

namespace {

json comment_resource(const FakeComment& c, const std::string& parent) {
    json snippet{{"authorDisplayName", c.author},
                 {"authorChannelId", {{"value", "UC" + c.author}}},
                 {"textOriginal", c.text},
                 {"textDisplay", c.text},
                 {"publishedAt", c.published_at}};
    if (!parent.empty()) snippet["parentId"] = parent;
    return json{{"kind", "youtube#comment"}, {"id", c.id}, {"snippet", std::move(snippet)}};
}

template <typename Item, typename MakeRequest, typename MakeItem>
void write_pages(const fs::path& dir, const std::vector<Item>& items, std::size_t page_size, MakeRequest make_request,
                 MakeItem make_item) {
    const std::size_t pages = std::max<std::size_t>(1, (items.size() + page_size - 1) / page_size);
    for (std::size_t p = 0; p < pages; ++p) {
        HttpRequest req = make_request();
        if (p > 0) req.params["pageToken"] = fmt::format("page{}", p);
        json body{{"items", json::array()}};
        for (std::size_t i = p * page_size; i < std::min(items.size(), (p + 1) * page_size); ++i)
            body["items"].push_back(make_item(items[i]));
        if (p + 1 < pages) body["nextPageToken"] = fmt::format("page{}", p + 1);
        FixtureTransport::write_fixture(dir, req, HttpResponse{200, body.dump()});
    }
}

}  // namespace

void write_youtube_fixtures(const fs::path& dir, const SearchConfig& config, const std::vector<FakeVideo>& videos,
                            std::size_t page_size) {
    using namespace std::chrono;
    fs::create_directories(dir);
    const std::string after = format_rfc3339(UtcTime{sys_days{config.window.start}});
    const std::string before = format_rfc3339(UtcTime{sys_days{config.window.end} + days{1}});

    std::vector<std::string> candidate_ids;
    for (const auto& spec : config.channels) {
        std::vector<const FakeVideo*> mine;
        for (const auto& v : videos)
            if (v.channel_id == spec.channel_id) mine.push_back(&v);
        for (const auto& term : config.query_terms) {
            HttpRequest req{"/youtube/v3/search",
                            {{"part", "snippet"},
                             {"channelId", spec.channel_id},
                             {"q", term},
                             {"type", "video"},
                             {"order", "date"},
                             {"maxResults", "50"},
                             {"publishedAfter", after},
                             {"publishedBefore", before}}};
            json body{{"items", json::array()}};
            for (const auto* v : mine)
                body["items"].push_back({{"id", {{"kind", "youtube#video"}, {"videoId", v->id}}},
                                         {"snippet",
                                          {{"channelId", v->channel_id},
                                           {"title", v->title},
                                           {"description", v->description.substr(0, 40)},
                                           {"publishedAt", v->published_at}}}});
            FixtureTransport::write_fixture(dir, req, HttpResponse{200, body.dump()});
        }
        for (const auto* v : mine) candidate_ids.push_back(v->id);
    }
    std::sort(candidate_ids.begin(), candidate_ids.end());
    candidate_ids.erase(std::unique(candidate_ids.begin(), candidate_ids.end()), candidate_ids.end());
    for (std::size_t start = 0; start < candidate_ids.size(); start += 50) {
        std::string joined;
        json body{{"items", json::array()}};
        for (std::size_t i = start; i < std::min(candidate_ids.size(), start + 50); ++i) {
            if (!joined.empty()) joined += ',';
            joined += candidate_ids[i];
            const auto& v = *std::find_if(videos.begin(), videos.end(), [&](const FakeVideo& x) { return x.id == candidate_ids[i]; });
            body["items"].push_back({{"id", v.id},
                                     {"snippet",
                                      {{"channelId", v.channel_id},
                                       {"title", v.title},
                                       {"description", v.description},
                                       {"tags", v.tags},
                                       {"publishedAt", v.published_at}}}});
        }
        FixtureTransport::write_fixture(dir, HttpRequest{"/youtube/v3/videos", {{"part", "snippet"}, {"id", joined}}},
                                        HttpResponse{200, body.dump()});
    }

    for (const auto& v : videos) {
        auto thread_request = [&] {
            return HttpRequest{"/youtube/v3/commentThreads",
                               {{"part", "snippet,replies"},
                                {"videoId", v.id},
                                {"maxResults", "100"},
                                {"textFormat", "plainText"}}};
        };
        if (v.comments_disabled) {
            const json err{{"error",
                            {{"code", 403},
                             {"message", "The video identified by the videoId parameter has disabled comments."},
                             {"errors", json::array({{{"reason", "commentsDisabled"}, {"domain", "youtube.commentThread"}}})}}}};
            FixtureTransport::write_fixture(dir, thread_request(), HttpResponse{403, err.dump()});
            continue;
        }
        write_pages(dir, v.threads, page_size, thread_request, [&](const FakeThread& t) {
            json replies = json::array();
            for (std::size_t r = 0; r < std::min(t.inline_replies, t.replies.size()); ++r)
                replies.push_back(comment_resource(t.replies[r], t.top.id));
            json thread{{"kind", "youtube#commentThread"},
                        {"id", t.top.id},
                        {"snippet",
                         {{"videoId", v.id},
                          {"topLevelComment", comment_resource(t.top, "")},
                          {"totalReplyCount", t.replies.size()}}}};
            if (!replies.empty()) thread["replies"] = {{"comments", replies}};
            return thread;
        });
        for (const auto& t : v.threads) {
            if (t.replies.size() <= t.inline_replies) continue;
            write_pages(
                dir, t.replies, page_size,
                [&] {
                    return HttpRequest{"/youtube/v3/comments",
                                       {{"part", "snippet"},
                                        {"parentId", t.top.id},
                                        {"maxResults", "100"},
                                        {"textFormat", "plainText"}}};
                },
                [&](const FakeComment& c) { return comment_resource(c, t.top.id); });
        }
    }
}

SearchConfig fixture_search_config() {
    using namespace std::chrono;
    SearchConfig cfg;
    cfg.channels = {{Channel{"NYT"}, "UCnyt"}, {Channel{"WSJ"}, "UCwsj"}};
    cfg.query_terms = {"election"};
    cfg.window = {year{2024} / October / 29, year{2024} / November / 5};
    cfg.api_key_env = "SALIENCE_TEST_NO_KEY";
    return cfg;
}

namespace {

FakeVideo election_video(std::string id, std::string channel_id) {
    FakeVideo v;
    v.id = std::move(id);
    v.channel_id = std::move(channel_id);
    v.title = "Election night live";
    v.description = "Coverage of the race.";
    v.published_at = "2024-10-30T00:00:00Z";
    return v;
}

}  // namespace

FakeVideo paginated_video() {
    auto v = election_video("vidA", "UCnyt");
    for (int i = 0; i < 200; ++i) {
        FakeThread t;
        t.top = {fmt::format("t{:03}", i), fmt::format("user{}", i), fmt::format("comment number {}", i),
                 "2024-10-30T12:00:00Z"};
        v.threads.push_back(t);
    }
    for (int r = 0; r < 10; ++r)
        v.threads[7].replies.push_back({fmt::format("t007.r{}", r), "replier", fmt::format("reply {}", r), "2024-10-30T13:00:00Z"});
    return v;
}

std::vector<FakeVideo> reported_crawl_videos() {
    constexpr int kTop = 4157, kReplies = 3652, kTopReposts = 600, kReplyReposts = 408;
    std::vector<FakeVideo> vids;
    for (int k = 0; k < 20; ++k) vids.push_back(election_video(fmt::format("vid{:02}", k), k % 2 ? "UCwsj" : "UCnyt"));
    // replies go to every other row of 20 threads until the budget runs out
    int reply_budget = kReplies;
    for (int i = 0; i < kTop; ++i) {
        FakeThread t;
        const auto ts = fmt::format("2024-11-0{}T{:02}:{:02}:00Z", 1 + i % 4, i % 24, i % 60);
        t.top = {fmt::format("c{:05}", i), fmt::format("a{}", i), fmt::format("top level {}", i), ts};
        const int nr = std::min(reply_budget, (i / 20) % 2 ? 0 : 2);
        for (int r = 0; r < nr; ++r)
            t.replies.push_back({fmt::format("c{:05}.{}", i, r), fmt::format("b{}", i), fmt::format("reply {} {}", i, r), ts});
        reply_budget -= nr;
        vids[static_cast<std::size_t>(i % 20)].threads.push_back(t);
    }
    // reposts: same video, author and text, later timestamp, new id
    for (int i = 0; i < kTopReposts; ++i) {
        auto& v = vids[static_cast<std::size_t>(i % 20)];
        FakeThread t;
        t.top = v.threads[static_cast<std::size_t>(1 + i / 20)].top;
        t.top.id = fmt::format("rp{:05}", i);
        t.top.published_at = format_rfc3339(parse_rfc3339(t.top.published_at) + std::chrono::minutes(3));
        v.threads.push_back(t);
    }
    for (int i = 0; i < kReplyReposts; ++i) {
        auto& thread = vids[static_cast<std::size_t>(i % 20)].threads[static_cast<std::size_t>(2 * (i / 20))];
        auto copy = thread.replies[0];
        copy.id = fmt::format("rr{:05}", i);
        copy.published_at = "2024-11-05T23:00:00Z";
        thread.replies.push_back(copy);
    }
    return vids;
}

}  // namespace salience::testing
