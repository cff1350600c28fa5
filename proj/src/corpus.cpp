#include "salience/corpus.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "json.hpp"
#include "salience/errors.hpp"
#include "salience/hashing.hpp"

namespace salience {

using ojson = nlohmann::ordered_json;

void AnalysisWindow::validate() const {
    if (!start.ok() || !end.ok()) throw ConfigError("analysis window has an invalid date");
    if (start > end)
        throw ConfigError(fmt::format("analysis window start {} is after end {}", format_date(start),
                                      format_date(end)));
}

bool AnalysisWindow::contains(UtcTime t) const {
    const CalendarDate d = utc_date(t);
    return d >= start && d <= end;
}

int AnalysisWindow::length_days() const {
    using namespace std::chrono;
    return static_cast<int>((sys_days{end} - sys_days{start}).count()) + 1;
}

DayIndex day_index(UtcTime ts, const AnalysisWindow& window) {
    using namespace std::chrono;
    if (!window.contains(ts))
        throw OutOfWindow(fmt::format("{} is outside the window {}..{}", format_rfc3339(ts),
                                      format_date(window.start), format_date(window.end)));
    return static_cast<DayIndex>((sys_days{utc_date(ts)} - sys_days{window.start}).count());
}

bool comment_order(const Comment& a, const Comment& b) {
    return std::tie(a.published_at, a.comment_id) < std::tie(b.published_at, b.comment_id);
}

std::vector<Comment> dedupe(std::vector<Comment> comments) {
    std::stable_sort(comments.begin(), comments.end(), comment_order);
    std::unordered_set<std::string> seen_ids;
    std::set<std::tuple<std::string, std::string, std::string>> seen_content;
    std::vector<Comment> kept;
    kept.reserve(comments.size());
    for (auto& c : comments) {
        if (!seen_ids.insert(c.comment_id).second) continue;
        if (!seen_content.emplace(c.video_id, c.author_key, c.text).second) continue;
        kept.push_back(std::move(c));
    }
    return kept;
}

void flag_out_of_window(Corpus& corpus) {
    for (auto& c : corpus.comments) c.out_of_window = !corpus.window.contains(c.published_at);
}

std::string hash_author(std::string_view author, std::string_view salt) {
    std::string material;
    material.reserve(salt.size() + 1 + author.size());
    material.append(salt).push_back(':');
    material.append(author);
    return sha256_hex(material).substr(0, 16);
}

void validate_corpus(const Corpus& corpus) {
    corpus.window.validate();
    std::unordered_set<std::string> video_ids;
    for (const auto& v : corpus.videos) {
        if (v.video_id.empty()) throw SchemaError("video with empty video_id");
        if (!video_ids.insert(v.video_id).second)
            throw SchemaError(fmt::format("duplicate video_id '{}'", v.video_id));
    }
    std::unordered_set<std::string> comment_ids;
    for (const auto& c : corpus.comments) {
        if (c.comment_id.empty()) throw SchemaError("comment with empty comment_id");
        if (!comment_ids.insert(c.comment_id).second)
            throw SchemaError(fmt::format("duplicate comment_id '{}'", c.comment_id));
        if (!video_ids.contains(c.video_id))
            throw SchemaError(
                fmt::format("comment '{}' references unknown video '{}'", c.comment_id, c.video_id));
        if (c.is_reply != c.parent_id.has_value())
            throw SchemaError(
                fmt::format("comment '{}': is_reply must be set iff parent_id is", c.comment_id));
    }
}

namespace {

constexpr auto kDumpErrors = nlohmann::json::error_handler_t::replace;

ojson to_json(const Video& v) {
    return ojson{{"kind", "video"},
                 {"video_id", v.video_id},
                 {"channel", v.channel.name},
                 {"title", v.title},
                 {"description", v.description},
                 {"tags", v.tags},
                 {"published_at", format_rfc3339(v.published_at)}};
}

ojson to_json(const Comment& c) {
    return ojson{{"kind", "comment"},
                 {"comment_id", c.comment_id},
                 {"video_id", c.video_id},
                 {"channel", c.channel.name},
                 {"author_key", c.author_key},
                 {"text", c.text},
                 {"published_at", format_rfc3339(c.published_at)},
                 {"is_reply", c.is_reply},
                 {"parent_id", c.parent_id ? ojson(*c.parent_id) : ojson(nullptr)},
                 {"out_of_window", c.out_of_window}};
}

const ojson& field(const ojson& rec, const char* key, std::size_t line) {
    auto it = rec.find(key);
    if (it == rec.end()) throw SchemaError(fmt::format("missing field '{}'", key), line);
    return *it;
}

std::string string_field(const ojson& rec, const char* key, std::size_t line) {
    const auto& v = field(rec, key, line);
    if (!v.is_string()) throw SchemaError(fmt::format("field '{}' must be a string", key), line);
    return v.get<std::string>();
}

bool bool_field(const ojson& rec, const char* key, std::size_t line) {
    const auto& v = field(rec, key, line);
    if (!v.is_boolean()) throw SchemaError(fmt::format("field '{}' must be a boolean", key), line);
    return v.get<bool>();
}

UtcTime time_field(const ojson& rec, const char* key, std::size_t line) {
    const std::string text = string_field(rec, key, line);
    try {
        return parse_rfc3339(text);
    } catch (const SchemaError& e) {
        throw SchemaError(fmt::format("field '{}': {}", key, e.what()), line);
    }
}

CalendarDate date_field(const ojson& rec, const char* key, std::size_t line) {
    const std::string text = string_field(rec, key, line);
    try {
        return parse_date(text);
    } catch (const SchemaError& e) {
        throw SchemaError(fmt::format("field '{}': {}", key, e.what()), line);
    }
}

}  // namespace

void write_corpus(const Corpus& corpus, std::ostream& out) {
    ojson header{{"kind", "window"},
                 {"start_date", format_date(corpus.window.start)},
                 {"end_date", format_date(corpus.window.end)}};
    out << header.dump(-1, ' ', false, kDumpErrors) << '\n';
    for (const auto& v : corpus.videos) out << to_json(v).dump(-1, ' ', false, kDumpErrors) << '\n';
    for (const auto& c : corpus.comments)
        out << to_json(c).dump(-1, ' ', false, kDumpErrors) << '\n';
}

Corpus read_corpus(std::istream& in) {
    Corpus corpus;
    bool have_window = false;
    std::string text;
    std::size_t line = 0;
    std::unordered_set<std::string> video_ids;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        ojson rec;
        try {
            rec = ojson::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(fmt::format("invalid JSON: {}", e.what()), line);
        }
        if (!rec.is_object()) throw SchemaError("record is not a JSON object", line);
        const std::string kind = string_field(rec, "kind", line);
        if (kind == "window") {
            if (have_window) throw SchemaError("second window record", line);
            corpus.window.start = date_field(rec, "start_date", line);
            corpus.window.end = date_field(rec, "end_date", line);
            try {
                corpus.window.validate();
            } catch (const ConfigError& e) {
                throw SchemaError(e.what(), line);
            }
            have_window = true;
        } else if (kind == "video") {
            Video v;
            v.video_id = string_field(rec, "video_id", line);
            if (v.video_id.empty()) throw SchemaError("empty video_id", line);
            if (!video_ids.insert(v.video_id).second)
                throw SchemaError(fmt::format("duplicate video_id '{}'", v.video_id), line);
            v.channel.name = string_field(rec, "channel", line);
            v.title = string_field(rec, "title", line);
            v.description = string_field(rec, "description", line);
            const auto& tags = field(rec, "tags", line);
            if (!tags.is_array()) throw SchemaError("field 'tags' must be an array", line);
            for (const auto& t : tags) {
                if (!t.is_string()) throw SchemaError("tags must be strings", line);
                v.tags.push_back(t.get<std::string>());
            }
            v.published_at = time_field(rec, "published_at", line);
            corpus.videos.push_back(std::move(v));
        } else if (kind == "comment") {
            Comment c;
            c.comment_id = string_field(rec, "comment_id", line);
            if (c.comment_id.empty()) throw SchemaError("empty comment_id", line);
            c.video_id = string_field(rec, "video_id", line);
            c.channel.name = string_field(rec, "channel", line);
            c.author_key = string_field(rec, "author_key", line);
            c.text = string_field(rec, "text", line);
            c.published_at = time_field(rec, "published_at", line);
            c.is_reply = bool_field(rec, "is_reply", line);
            const auto& parent = field(rec, "parent_id", line);
            if (parent.is_string()) {
                c.parent_id = parent.get<std::string>();
            } else if (!parent.is_null()) {
                throw SchemaError("field 'parent_id' must be a string or null", line);
            }
            if (c.is_reply != c.parent_id.has_value())
                throw SchemaError("is_reply must be true iff parent_id is present", line);
            c.out_of_window = bool_field(rec, "out_of_window", line);
            corpus.comments.push_back(std::move(c));
        } else {
            throw SchemaError(fmt::format("unknown record kind '{}'", kind), line);
        }
    }
    if (!have_window) throw SchemaError("corpus has no window record");
    for (const auto& c : corpus.comments) {
        if (!video_ids.contains(c.video_id))
            throw SchemaError(
                fmt::format("comment '{}' references unknown video '{}'", c.comment_id, c.video_id));
    }
    return corpus;
}

void store_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write corpus file {}", path.string()));
    write_corpus(corpus, out);
    if (!out) throw IoError(fmt::format("write failed for {}", path.string()));
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open corpus file {}", path.string()));
    try {
        return read_corpus(in);
    } catch (const SchemaError& e) {
        throw SchemaError(fmt::format("{}: {}", path.string(), e.detail()), e.line());
    }
}

CorpusCounts count_corpus(const Corpus& corpus) {
    CorpusCounts counts;
    counts.videos = corpus.videos.size();
    counts.comments = corpus.comments.size();
    for (const auto& c : corpus.comments) {
        if (c.is_reply) {
            ++counts.replies;
        } else {
            ++counts.top_level;
        }
        if (c.out_of_window) ++counts.out_of_window;
    }
    return counts;
}

}  // namespace salience
