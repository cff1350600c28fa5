#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "salience/corpus.hpp"

namespace salience {

/// Lowercase, purely alphabetic tokens in original order.
using TokenList = std::vector<std::string>;

struct StopwordSet {
    std::unordered_set<std::string> words;
    std::string source_name;

    bool contains(std::string_view w) const { return words.contains(std::string(w)); }
};

/// One word per line; blank lines and '#' comments ignored; entries are lowercased.
StopwordSet parse_stopwords(std::string_view text, std::string source_name);
StopwordSet load_stopwords(const std::filesystem::path& path);
/// The shipped English list.
StopwordSet default_stopwords();

struct NormalizeStats {
    std::size_t invalid_utf8 = 0;  // byte sequences replaced with U+FFFD
};

/// Splits on Unicode whitespace, punctuation and symbols (apostrophes stay inside tokens),
/// strips edge apostrophes, lowercases, and drops non-alphabetic tokens and stopwords.
TokenList normalize(std::string_view text, const StopwordSet& stopwords, NormalizeStats* stats = nullptr);

/// Unicode simple lowercase of UTF-8 text; invalid sequences become U+FFFD.
std::string to_lower_utf8(std::string_view text, NormalizeStats* stats = nullptr);

/// Decodes UTF-8 into code points, replacing invalid sequences with U+FFFD.
std::u32string decode_utf8(std::string_view text, NormalizeStats* stats = nullptr);
std::string encode_utf8(std::u32string_view text);

struct GroupKey {
    DayIndex day = 0;
    Channel channel;

    auto operator<=>(const GroupKey&) const = default;
};

/// Concatenated token stream of one (day, channel) group. Comment m owns
/// tokens[boundaries[m], boundaries[m + 1]); members index into Corpus::comments.
struct GroupEntry {
    std::vector<std::string> tokens;
    std::vector<std::size_t> boundaries{0};
    std::vector<std::size_t> members;

    std::span<const std::string> member_tokens(std::size_t m) const {
        return std::span<const std::string>(tokens).subspan(boundaries[m], boundaries[m + 1] - boundaries[m]);
    }
};

using GroupedText = std::map<GroupKey, GroupEntry>;

/// Groups in-window comments by (day, channel); members are ordered by (published_at, comment_id).
GroupedText group_concat(const Corpus& corpus, const StopwordSet& stopwords);

}  // namespace salience
