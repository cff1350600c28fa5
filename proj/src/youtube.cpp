#include "salience/youtube.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "salience/errors.hpp"
#include "salience/hashing.hpp"
#include "salience/http.hpp"

namespace salience {

using nlohmann::json;

namespace {

constexpr const char* kSearchPath = "/youtube/v3/search";
constexpr const char* kVideosPath = "/youtube/v3/videos";
constexpr const char* kThreadsPath = "/youtube/v3/commentThreads";
constexpr const char* kCommentsPath = "/youtube/v3/comments";

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

json parse_body(const HttpResponse& response, const std::string& context) {
    if (response.status != 200) throw_api_error(response, context);
    try {
        return json::parse(response.body);
    } catch (const json::parse_error& e) {
        throw TransportError(fmt::format("{}: response is not JSON ({})", context, e.what()),
                             response.status);
    }
}

std::string str_at(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) return {};
    return it->get<std::string>();
}

std::string next_token(const json& body) { return str_at(body, "nextPageToken"); }

Comment comment_from_snippet(const json& item, const Video& video, bool is_reply,
                             std::string_view salt) {
    const json& snippet = item.at("snippet");
    Comment c;
    c.comment_id = str_at(item, "id");
    c.video_id = video.video_id;
    c.channel = video.channel;
    std::string author;
    if (auto it = snippet.find("authorChannelId"); it != snippet.end() && it->is_object())
        author = str_at(*it, "value");
    if (author.empty()) author = str_at(snippet, "authorDisplayName");
    c.author_key = hash_author(author, salt);
    c.text = str_at(snippet, "textOriginal");
    if (c.text.empty()) c.text = str_at(snippet, "textDisplay");
    c.published_at = parse_rfc3339(str_at(snippet, "publishedAt"));
    c.is_reply = is_reply;
    if (is_reply) c.parent_id = str_at(snippet, "parentId");
    return c;
}

bool mentions_any(const Video& v, const std::vector<std::string>& lowered_terms) {
    std::vector<std::string> fields{lower_ascii(v.title), lower_ascii(v.description)};
    for (const auto& t : v.tags) fields.push_back(lower_ascii(t));
    for (const auto& term : lowered_terms) {
        for (const auto& f : fields) {
            if (f.find(term) != std::string::npos) return true;
        }
    }
    return false;
}

}  // namespace

[[noreturn]] void throw_api_error(const HttpResponse& response, const std::string& context) {
    std::string reason;
    std::string message;
    try {
        const json body = json::parse(response.body);
        if (auto err = body.find("error"); err != body.end() && err->is_object()) {
            message = str_at(*err, "message");
            if (auto errs = err->find("errors"); errs != err->end() && errs->is_array() && !errs->empty())
                reason = str_at(errs->front(), "reason");
        }
    } catch (const json::exception&) {
        // body is not JSON; keep the status only
    }
    const std::string what =
        fmt::format("{}: HTTP {} {}{}", context, response.status, reason, message.empty() ? "" : " - " + message);
    if (reason == "commentsDisabled") throw CommentsDisabled(what, response.status);
    if (response.status == 429 || reason == "quotaExceeded" || reason == "rateLimitExceeded" ||
        reason == "userRateLimitExceeded" || reason == "dailyLimitExceeded")
        throw QuotaError(what, response.status);
    if (response.status == 401 || reason == "keyInvalid" || reason == "forbidden" ||
        reason == "authError" || reason == "accessNotConfigured")
        throw AuthError(what, response.status);
    throw TransportError(what, response.status);
}

// ---- transports ----

FixtureTransport::FixtureTransport(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_))
        throw ConfigError(fmt::format("fixture directory {} does not exist", dir_.string()));
}

std::string FixtureTransport::fixture_key(const HttpRequest& request) {
    std::string canonical = request.path;
    char sep = '?';
    for (const auto& [k, v] : request.params) {  // std::map iterates sorted
        if (k == "key") continue;
        canonical += sep;
        canonical += http::url_encode(k) + "=" + http::url_encode(v);
        sep = '&';
    }
    return sha256_hex(canonical);
}

void FixtureTransport::write_fixture(const std::filesystem::path& dir, const HttpRequest& request,
                                     const HttpResponse& response) {
    std::filesystem::create_directories(dir);
    const std::string key = fixture_key(request);
    {
        std::ofstream out(dir / (key + ".body"), std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(fmt::format("cannot write fixture in {}", dir.string()));
        out << response.body;
    }
    const auto status_path = dir / (key + ".status");
    if (response.status != 200) {
        std::ofstream out(status_path, std::ios::trunc);
        out << response.status << '\n';
    } else {
        std::filesystem::remove(status_path);
    }
}

HttpResponse FixtureTransport::get(const HttpRequest& request) {
    const std::string key = fixture_key(request);
    const auto body_path = dir_ / (key + ".body");
    if (!std::filesystem::exists(body_path))
        throw TransportError(fmt::format("no recorded fixture for {} (key {})", request.path, key), 404);
    HttpResponse response;
    response.body = read_file(body_path);
    const auto status_path = dir_ / (key + ".status");
    if (std::filesystem::exists(status_path)) response.status = std::stoi(read_file(status_path));
    std::lock_guard lock(mutex_);
    ++served_;
    return response;
}

std::size_t FixtureTransport::requests_served() const {
    std::lock_guard lock(mutex_);
    return served_;
}

LiveTransport::LiveTransport(std::string api_key, std::string host)
    : api_key_(std::move(api_key)), host_(std::move(host)) {
    if (api_key_.empty()) throw ConfigError("YouTube API key is empty");
}

HttpResponse LiveTransport::get(const HttpRequest& request) {
    std::string target = request.path;
    char sep = '?';
    for (const auto& [k, v] : request.params) {
        target += sep;
        target += http::url_encode(k) + "=" + http::url_encode(v);
        sep = '&';
    }
    target += sep;
    target += "key=" + http::url_encode(api_key_);
    const auto r = http::get(host_, target);
    return HttpResponse{r.status, r.body};
}

RecordingTransport::RecordingTransport(HttpTransport& inner, std::filesystem::path dir)
    : inner_(inner), dir_(std::move(dir)) {}

HttpResponse RecordingTransport::get(const HttpRequest& request) {
    HttpResponse response = inner_.get(request);
    std::lock_guard lock(mutex_);
    FixtureTransport::write_fixture(dir_, request, response);
    return response;
}

TokenBucket::TokenBucket(double rate_per_second, double burst)
    : rate_(rate_per_second), burst_(burst), tokens_(burst), last_(Clock::now()) {
    if (rate_ <= 0.0 || burst_ < 1.0) throw ConfigError("token bucket needs rate > 0 and burst >= 1");
}

void TokenBucket::acquire() {
    std::unique_lock lock(mutex_);
    for (;;) {
        const auto now = Clock::now();
        tokens_ = std::min(burst_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
        last_ = now;
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
        lock.unlock();
        std::this_thread::sleep_for(wait);
        lock.lock();
    }
}

RateLimitedTransport::RateLimitedTransport(HttpTransport& inner, std::shared_ptr<TokenBucket> bucket)
    : inner_(inner), bucket_(std::move(bucket)) {}

HttpResponse RateLimitedTransport::get(const HttpRequest& request) {
    bucket_->acquire();
    return inner_.get(request);
}

// ---- API operations ----

void SearchConfig::validate() const {
    if (channels.empty()) throw ConfigError("search config lists no channels");
    if (query_terms.empty()) throw ConfigError("search config lists no query terms");
    window.validate();
}

std::vector<Video> search_videos(const SearchConfig& config, HttpTransport& transport) {
    using namespace std::chrono;
    config.validate();
    const std::string after = format_rfc3339(UtcTime{sys_days{config.window.start}});
    const std::string before = format_rfc3339(UtcTime{sys_days{config.window.end} + days{1}});

    std::map<std::string, Video> candidates;
    for (const auto& spec : config.channels) {
        for (const auto& term : config.query_terms) {
            std::string page;
            for (int n = 0; n < config.max_pages_per_query; ++n) {
                HttpRequest req{kSearchPath,
                                {{"part", "snippet"},
                                 {"channelId", spec.channel_id},
                                 {"q", term},
                                 {"type", "video"},
                                 {"order", "date"},
                                 {"maxResults", "50"},
                                 {"publishedAfter", after},
                                 {"publishedBefore", before}}};
                if (!page.empty()) req.params["pageToken"] = page;
                const json body = parse_body(transport.get(req), "search.list");
                for (const auto& item : body.value("items", json::array())) {
                    const auto id_it = item.find("id");
                    if (id_it == item.end()) continue;
                    const std::string video_id = id_it->is_object() ? str_at(*id_it, "videoId") : std::string{};
                    if (video_id.empty() || candidates.contains(video_id)) continue;
                    const json& snippet = item.at("snippet");
                    if (str_at(snippet, "channelId") != spec.channel_id) continue;
                    Video v;
                    v.video_id = video_id;
                    v.channel = spec.channel;
                    v.title = str_at(snippet, "title");
                    v.description = str_at(snippet, "description");
                    v.published_at = parse_rfc3339(str_at(snippet, "publishedAt"));
                    candidates.emplace(video_id, std::move(v));
                }
                page = next_token(body);
                if (page.empty()) break;
            }
        }
    }

    // search.list snippets truncate descriptions and omit tags; videos.list has both.
    std::vector<std::string> ids;
    for (const auto& [id, _] : candidates) ids.push_back(id);
    for (std::size_t start = 0; start < ids.size(); start += 50) {
        std::string joined;
        for (std::size_t i = start; i < std::min(ids.size(), start + 50); ++i) {
            if (!joined.empty()) joined += ',';
            joined += ids[i];
        }
        const json body =
            parse_body(transport.get(HttpRequest{kVideosPath, {{"part", "snippet"}, {"id", joined}}}),
                       "videos.list");
        for (const auto& item : body.value("items", json::array())) {
            auto it = candidates.find(str_at(item, "id"));
            if (it == candidates.end()) continue;
            const json& snippet = item.at("snippet");
            it->second.title = str_at(snippet, "title");
            it->second.description = str_at(snippet, "description");
            it->second.tags.clear();
            for (const auto& t : snippet.value("tags", json::array()))
                if (t.is_string()) it->second.tags.push_back(t.get<std::string>());
            if (auto p = str_at(snippet, "publishedAt"); !p.empty())
                it->second.published_at = parse_rfc3339(p);
        }
    }

    std::vector<std::string> lowered;
    for (const auto& t : config.query_terms) lowered.push_back(lower_ascii(t));
    std::vector<Video> out;
    for (auto& [id, v] : candidates) {
        if (!config.window.contains(v.published_at)) continue;
        if (!mentions_any(v, lowered)) continue;
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<Comment> fetch_comments(const Video& video, HttpTransport& transport,
                                    std::string_view author_salt) {
    if (video.video_id.empty()) throw ConfigError("fetch_comments: empty video id");
    std::vector<Comment> out;
    std::string page;
    for (;;) {
        HttpRequest req{kThreadsPath,
                        {{"part", "snippet,replies"},
                         {"videoId", video.video_id},
                         {"maxResults", "100"},
                         {"textFormat", "plainText"}}};
        if (!page.empty()) req.params["pageToken"] = page;
        const json body = parse_body(transport.get(req), "commentThreads.list " + video.video_id);
        for (const auto& thread : body.value("items", json::array())) {
            const json& snippet = thread.at("snippet");
            out.push_back(comment_from_snippet(snippet.at("topLevelComment"), video, false, author_salt));
            const std::string thread_id = str_at(thread, "id");
            const std::size_t total_replies = snippet.value("totalReplyCount", 0u);
            json inline_replies = json::array();
            if (auto r = thread.find("replies"); r != thread.end())
                inline_replies = r->value("comments", json::array());
            if (inline_replies.size() >= total_replies) {
                for (const auto& reply : inline_replies)
                    out.push_back(comment_from_snippet(reply, video, true, author_salt));
                continue;
            }
            // The thread only embeds a few replies; page through comments.list for all of them.
            std::string reply_page;
            for (;;) {
                HttpRequest rreq{kCommentsPath,
                                 {{"part", "snippet"},
                                  {"parentId", thread_id},
                                  {"maxResults", "100"},
                                  {"textFormat", "plainText"}}};
                if (!reply_page.empty()) rreq.params["pageToken"] = reply_page;
                const json rbody = parse_body(transport.get(rreq), "comments.list " + thread_id);
                for (const auto& reply : rbody.value("items", json::array()))
                    out.push_back(comment_from_snippet(reply, video, true, author_salt));
                reply_page = next_token(rbody);
                if (reply_page.empty()) break;
            }
        }
        page = next_token(body);
        if (page.empty()) break;
    }
    return out;
}

IngestResult ingest(const SearchConfig& config, HttpTransport& transport, const IngestOptions& options) {
    IngestResult result;
    result.corpus.window = config.window;
    result.corpus.videos = search_videos(config, transport);

    const auto& videos = result.corpus.videos;
    std::vector<std::vector<Comment>> per_video(videos.size());
    std::vector<bool> skipped(videos.size(), false);
    const std::size_t width = std::max<std::size_t>(1, options.max_concurrency);
    for (std::size_t start = 0; start < videos.size(); start += width) {
        std::vector<std::future<std::vector<Comment>>> inflight;
        const std::size_t stop = std::min(videos.size(), start + width);
        for (std::size_t i = start; i < stop; ++i) {
            inflight.push_back(std::async(std::launch::async, [&, i] {
                return fetch_comments(videos[i], transport, options.author_salt);
            }));
        }
        for (std::size_t i = start; i < stop; ++i) {
            try {
                per_video[i] = inflight[i - start].get();
            } catch (const CommentsDisabled& e) {
                spdlog::warn("skipping video {}: {}", videos[i].video_id, e.what());
                skipped[i] = true;
            }
        }
    }

    for (std::size_t i = 0; i < videos.size(); ++i) {
        if (skipped[i]) result.skipped_videos.push_back(videos[i].video_id);
        for (auto& c : per_video[i]) result.corpus.comments.push_back(std::move(c));
    }
    auto& comments = result.corpus.comments;
    std::sort(comments.begin(), comments.end(), [](const Comment& a, const Comment& b) {
        if (comment_order(a, b)) return true;
        if (comment_order(b, a)) return false;
        return std::tie(a.video_id, a.author_key, a.text) < std::tie(b.video_id, b.author_key, b.text);
    });
    comments.erase(std::unique(comments.begin(), comments.end()), comments.end());
    flag_out_of_window(result.corpus);
    return result;
}

}  // namespace salience
