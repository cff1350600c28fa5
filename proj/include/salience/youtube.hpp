#pragma once

// YouTube Data API v3 ingestion: search.list, videos.list, commentThreads.list and
// comments.list over a pluggable HTTP transport (live, fixture replay, or recording).

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "salience/corpus.hpp"

namespace salience {

struct HttpRequest {
    std::string path;  // e.g. "/youtube/v3/search"
    std::map<std::string, std::string> params;
};

struct HttpResponse {
    int status = 200;
    std::string body;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    /// Returns the raw response; only connection-level failures throw (TransportError).
    virtual HttpResponse get(const HttpRequest& request) = 0;
};

/// Replays recorded bodies from a directory. Each request maps to `<key>.body` and an
/// optional `<key>.status` (defaults to 200), where key = fixture_key(request).
class FixtureTransport : public HttpTransport {
public:
    explicit FixtureTransport(std::filesystem::path dir);
    HttpResponse get(const HttpRequest& request) override;

    /// SHA-256 of the path and the sorted params, with the "key" param excluded.
    static std::string fixture_key(const HttpRequest& request);
    static void write_fixture(const std::filesystem::path& dir, const HttpRequest& request,
                              const HttpResponse& response);

    std::size_t requests_served() const;

private:
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    std::size_t served_ = 0;
};

/// HTTPS client for https://www.googleapis.com. The API key is appended per request
/// and never recorded.
class LiveTransport : public HttpTransport {
public:
    LiveTransport(std::string api_key, std::string host = "https://www.googleapis.com");
    HttpResponse get(const HttpRequest& request) override;

private:
    std::string api_key_;
    std::string host_;
};

/// Forwards to an inner transport and writes every response as a fixture.
class RecordingTransport : public HttpTransport {
public:
    RecordingTransport(HttpTransport& inner, std::filesystem::path dir);
    HttpResponse get(const HttpRequest& request) override;

private:
    HttpTransport& inner_;
    std::filesystem::path dir_;
    std::mutex mutex_;
};

/// Token bucket shared by every in-flight request: at most `rate` requests per second
/// on average, with bursts up to `burst`.
class TokenBucket {
public:
    using Clock = std::chrono::steady_clock;
    TokenBucket(double rate_per_second, double burst);
    void acquire();

private:
    double rate_;
    double burst_;
    double tokens_;
    Clock::time_point last_;
    std::mutex mutex_;
};

class RateLimitedTransport : public HttpTransport {
public:
    RateLimitedTransport(HttpTransport& inner, std::shared_ptr<TokenBucket> bucket);
    HttpResponse get(const HttpRequest& request) override;

private:
    HttpTransport& inner_;
    std::shared_ptr<TokenBucket> bucket_;
};

struct ChannelSpec {
    Channel channel;         // display identifier, e.g. NYT
    std::string channel_id;  // YouTube channel id
};

struct SearchConfig {
    std::vector<ChannelSpec> channels;
    std::vector<std::string> query_terms;
    AnalysisWindow window;
    /// Name of the environment variable holding the API key.
    std::string api_key_env = "YOUTUBE_API_KEY";
    int max_pages_per_query = 10;

    void validate() const;
};

/// Searches each configured channel for each query term, then keeps only videos that are
/// published inside the window and mention a query term (case-insensitive) in the title,
/// description, or tags. Sorted by video_id.
std::vector<Video> search_videos(const SearchConfig& config, HttpTransport& transport);

/// All top-level comments and replies of one video, across every result page.
/// Throws CommentsDisabled when the video has comments turned off.
std::vector<Comment> fetch_comments(const Video& video, HttpTransport& transport,
                                    std::string_view author_salt);

struct IngestOptions {
    std::string author_salt;
    std::size_t max_concurrency = 4;
};

struct IngestResult {
    Corpus corpus;  // comments not yet deduplicated, sorted by comment_order
    std::vector<std::string> skipped_videos;
};

/// search_videos followed by fetch_comments for every video; videos with comments
/// disabled are skipped with a warning. Output is independent of completion order.
IngestResult ingest(const SearchConfig& config, HttpTransport& transport,
                    const IngestOptions& options);

/// Maps an API error response onto the error hierarchy and throws it.
[[noreturn]] void throw_api_error(const HttpResponse& response, const std::string& context);

}  // namespace salience
