#pragma once

// Synthetic inputs shared by the unit and acceptance tests.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "salience/corpus.hpp"
#include "salience/matrix.hpp"
#include "salience/youtube.hpp"

namespace salience::testing {

/// Creates a fresh directory under the system temp dir; removed on destruction.
class TempDir {
public:
    explicit TempDir(std::string_view tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

struct LabeledPoints {
    DenseMatrix points;
    std::vector<int> truth;
};

/// Isotropic Gaussian blobs (sigma 1) whose centers sit `separation` apart along the first axis.
LabeledPoints gaussian_blobs(std::size_t per_blob, std::size_t n_blobs, std::size_t dim, double separation,
                             std::uint64_t seed);

/// Reorders rows (and truth) by `perm`.
LabeledPoints permute(const LabeledPoints& in, const std::vector<std::size_t>& perm);

struct LabeledSentences {
    std::vector<std::string> texts;
    std::vector<int> issue;  // index into the shipped taxonomy's issue order
};

/// Sentences built from each issue's keywords plus issue-specific context words.
/// `per_issue` holds one count per issue in taxonomy order.
LabeledSentences issue_sentences(const std::vector<std::size_t>& per_issue, std::uint64_t seed);

/// Sentences about topics outside the taxonomy (cooking, football).
std::vector<std::string> offtopic_sentences(std::size_t n, std::uint64_t seed);

struct SyntheticCorpusSpec {
    std::size_t raw = 0;
    std::size_t deduped = 0;
    std::size_t out_of_window = 0;
    std::size_t degenerate = 0;
    std::size_t duplicate_ids = 0;
    std::size_t reposts = 0;
    std::vector<std::size_t> issue_counts;  // in-window issue sentences per issue
    std::size_t offtopic = 0;
};

struct SyntheticCorpus {
    Corpus corpus;  // raw, before deduplication
    SyntheticCorpusSpec spec;
};

/// The bundled 500-comment fixture: two channels, eight-day window, duplicates, reposts,
/// replies, out-of-window comments, emoji-only comments, and off-topic chatter.
SyntheticCorpus synthetic_corpus_500(std::uint64_t seed = 500);

/// Repository-relative location of the bundled fixture and its run config.
std::filesystem::path source_dir();
std::filesystem::path bundled_corpus_path();
std::filesystem::path bundled_config_path();

// ---- recorded YouTube responses ----

struct FakeComment {
    std::string id;
    std::string author;
    std::string text;
    std::string published_at;
};

struct FakeThread {
    FakeComment top;
    std::vector<FakeComment> replies;
    std::size_t inline_replies = 5;  // replies embedded in the thread resource
};

struct FakeVideo {
    std::string id;
    std::string channel_id;
    std::string title;
    std::string description;
    std::vector<std::string> tags;
    std::string published_at;
    std::vector<FakeThread> threads;
    bool comments_disabled = false;
};

/// Writes search, videos, commentThreads and comments responses for `videos` so that
/// ingest(config, FixtureTransport(dir)) replays them. Threads are paged `page_size` per page.
void write_youtube_fixtures(const std::filesystem::path& dir, const SearchConfig& config,
                            const std::vector<FakeVideo>& videos, std::size_t page_size = 100);

SearchConfig fixture_search_config();

/// One in-window video with 200 top-level comments and 10 replies under thread "t007".
FakeVideo paginated_video();

/// Twenty videos holding 7,809 unique comments (4,157 top-level, 3,652 replies) plus
/// 1,008 reposts of existing comments: 8,817 records before deduplication.
std::vector<FakeVideo> reported_crawl_videos();

}  // namespace salience::testing
