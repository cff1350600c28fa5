#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "salience/timeutil.hpp"

namespace salience {

/// Channel identifier such as "NYT" or "WSJ".
struct Channel {
    std::string name;

    auto operator<=>(const Channel&) const = default;
};

/// Whole-calendar-day offset from the analysis window start.
using DayIndex = int;

struct AnalysisWindow {
    CalendarDate start;
    CalendarDate end;  // inclusive

    /// Throws ConfigError unless start <= end.
    void validate() const;
    bool contains(UtcTime t) const;
    /// Number of calendar days covered (end - start + 1).
    int length_days() const;

    bool operator==(const AnalysisWindow&) const = default;
};

struct Video {
    std::string video_id;
    Channel channel;
    std::string title;
    std::string description;
    std::vector<std::string> tags;
    UtcTime published_at;

    bool operator==(const Video&) const = default;
};

struct Comment {
    std::string comment_id;
    std::string video_id;
    Channel channel;
    std::string author_key;
    std::string text;
    UtcTime published_at;
    bool is_reply = false;
    std::optional<std::string> parent_id;
    /// Published outside the analysis window: kept in storage, skipped by analysis.
    bool out_of_window = false;

    bool operator==(const Comment&) const = default;
};

struct Corpus {
    AnalysisWindow window;
    std::vector<Video> videos;
    std::vector<Comment> comments;

    bool operator==(const Corpus&) const = default;
};

/// Returns the calendar-day offset of `ts` (UTC) from window.start. Throws OutOfWindow.
DayIndex day_index(UtcTime ts, const AnalysisWindow& window);

/// Orders by (published_at, comment_id).
bool comment_order(const Comment& a, const Comment& b);

/// Drops repeated comment_ids, then repeated (video_id, author_key, text) triples,
/// keeping the earliest-published record of each group. Output is sorted by comment_order.
std::vector<Comment> dedupe(std::vector<Comment> comments);

/// Sets out_of_window on every comment from the corpus window.
void flag_out_of_window(Corpus& corpus);

/// Pseudonymous author key: first 16 hex chars of SHA-256(salt ":" author).
std::string hash_author(std::string_view author, std::string_view salt);

/// Checks corpus invariants; throws SchemaError describing the first violation.
void validate_corpus(const Corpus& corpus);

/// Raw (pre-dedupe) files may repeat comment ids; validate_corpus rejects them.
/// JSONL: a {"kind":"window"} header, then one {"kind":"video"} or {"kind":"comment"}
/// record per line, in corpus order.
void write_corpus(const Corpus& corpus, std::ostream& out);
Corpus read_corpus(std::istream& in);

void store_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

struct CorpusCounts {
    std::size_t videos = 0;
    std::size_t comments = 0;
    std::size_t top_level = 0;
    std::size_t replies = 0;
    std::size_t out_of_window = 0;
};

CorpusCounts count_corpus(const Corpus& corpus);

}  // namespace salience
