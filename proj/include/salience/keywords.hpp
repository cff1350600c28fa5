#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "salience/corpus.hpp"
#include "salience/salience_table.hpp"
#include "salience/textprep.hpp"

namespace salience {

enum class RuleKind { Phrase, Cooccur };

/// One keyword of an issue.
///  - Phrase: contiguous token sequence (`phrase`), or, when the keyword contains characters the
///    tokenizer drops (digits, as in "J6"), a word-bounded substring of the lowercased raw text.
///  - Cooccur: every entry of `term_lists` must be satisfied somewhere in the same comment; an
///    entry is satisfied by any one of its phrases.
struct KeywordRule {
    RuleKind kind = RuleKind::Phrase;
    std::string source;  // keyword as written in the taxonomy file
    TokenList phrase;
    std::vector<std::vector<TokenList>> term_lists;
    bool raw_text_fallback = false;
    std::string raw_pattern;  // lowercased, whitespace-collapsed
};

struct Issue {
    std::string name;
    std::vector<KeywordRule> rules;
};

struct IssueTaxonomy {
    std::vector<Issue> issues;

    std::size_t rule_count() const;
    std::vector<std::string> issue_names() const;
    /// Index of the issue whose name matches case-insensitively, or npos.
    std::size_t find_issue(std::string_view name) const;
    /// Every token appearing in any of the issue's rules.
    std::vector<std::string> keyword_tokens(std::size_t issue) const;
};

/// Parses the taxonomy JSON; keyword phrases are tokenized with the same normalization as
/// comments. Throws SchemaError on duplicate issues, empty rules, or malformed entries.
IssueTaxonomy parse_taxonomy(std::string_view json_text, const StopwordSet& stopwords);
IssueTaxonomy load_taxonomy(const std::filesystem::path& path, const StopwordSet& stopwords);
IssueTaxonomy default_taxonomy(const StopwordSet& stopwords);

enum class CountMode {
    Occurrences,  // every match counts
    Comments,     // an issue counts at most once per comment
};

struct MatchCounts {
    std::vector<std::uint64_t> per_issue;
    std::vector<std::vector<std::uint64_t>> per_rule;  // [issue][rule]
};

/// Counts keyword matches in one comment. Phrase rules scan left to right per issue, taking the
/// longest phrase that starts at each position and skipping past it. Cooccur rules count at most
/// once per comment. Raw-text rules count non-overlapping word-bounded occurrences.
MatchCounts match_comment(std::span<const std::string> tokens, std::string_view raw_text,
                          const IssueTaxonomy& taxonomy, CountMode mode = CountMode::Occurrences);

/// Sums match_comment over the in-window comments of each (day, channel) group.
SalienceTable salience_table_keywords(const Corpus& corpus, const IssueTaxonomy& taxonomy,
                                      const StopwordSet& stopwords,
                                      CountMode mode = CountMode::Occurrences);

/// Number of non-overlapping occurrences of `pattern` in `haystack` whose neighbours are not
/// letters or digits.
std::size_t count_word_bounded(std::string_view haystack, std::string_view pattern);

}  // namespace salience
