#include "salience/keywords.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "salience/errors.hpp"
#include "salience/resources.hpp"

namespace salience {

using nlohmann::json;

// ---- SalienceTable ----

std::string_view method_name(Method m) {
    return m == Method::Keyword ? "keyword" : "cluster";
}

void SalienceTable::add(const SalienceCell& cell, std::uint64_t n) {
    if (n == 0) return;
    counts[cell] += n;
}

SalienceTable& SalienceTable::operator+=(const SalienceTable& other) {
    if (issues != other.issues) throw IssueSetMismatch("cannot add salience tables over different issues");
    for (const auto& [cell, n] : other.counts) add(cell, n);
    return *this;
}

std::vector<std::uint64_t> SalienceTable::issue_totals() const {
    std::vector<std::uint64_t> totals(issues.size(), 0);
    for (const auto& [cell, n] : counts) totals.at(cell.issue) += n;
    return totals;
}

std::map<Channel, std::vector<std::uint64_t>> SalienceTable::totals_by_channel() const {
    std::map<Channel, std::vector<std::uint64_t>> out;
    for (const auto& [cell, n] : counts) {
        auto& row = out[cell.channel];
        row.resize(issues.size(), 0);
        row[cell.issue] += n;
    }
    return out;
}

std::map<DayIndex, std::vector<std::uint64_t>> SalienceTable::totals_by_day() const {
    std::map<DayIndex, std::vector<std::uint64_t>> out;
    for (const auto& [cell, n] : counts) {
        auto& row = out[cell.day];
        row.resize(issues.size(), 0);
        row[cell.issue] += n;
    }
    return out;
}

// ---- taxonomy ----

namespace {

bool has_digit(std::string_view text) {
    return std::any_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string collapse_whitespace(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(c));
    }
    return out;
}

TokenList phrase_tokens(const std::string& keyword, const std::string& issue, const StopwordSet& stopwords) {
    TokenList tokens = normalize(keyword, stopwords);
    if (tokens.empty())
        throw SchemaError(fmt::format("issue '{}': keyword '{}' has no matchable tokens", issue, keyword));
    return tokens;
}

KeywordRule compile_phrase(const std::string& keyword, const std::string& issue, const StopwordSet& stopwords) {
    KeywordRule rule;
    rule.kind = RuleKind::Phrase;
    rule.source = keyword;
    if (has_digit(keyword)) {
        rule.raw_text_fallback = true;
        rule.raw_pattern = collapse_whitespace(to_lower_utf8(keyword));
        if (rule.raw_pattern.empty())
            throw SchemaError(fmt::format("issue '{}': empty keyword", issue));
    } else {
        rule.phrase = phrase_tokens(keyword, issue, stopwords);
    }
    return rule;
}

KeywordRule compile_cooccur(const json& spec, const std::string& issue, const StopwordSet& stopwords) {
    const auto it = spec.find("all_of");
    if (it == spec.end() || !it->is_array() || it->size() < 2)
        throw SchemaError(fmt::format("issue '{}': co-occurrence keyword needs \"all_of\" with >= 2 term lists", issue));
    KeywordRule rule;
    rule.kind = RuleKind::Cooccur;
    std::vector<std::string> parts;
    for (const auto& list : *it) {
        if (!list.is_array() || list.empty())
            throw SchemaError(fmt::format("issue '{}': empty term list in co-occurrence keyword", issue));
        std::vector<TokenList> alternatives;
        std::vector<std::string> names;
        for (const auto& term : list) {
            if (!term.is_string()) throw SchemaError(fmt::format("issue '{}': terms must be strings", issue));
            const auto text = term.get<std::string>();
            if (has_digit(text))
                throw SchemaError(fmt::format("issue '{}': co-occurrence term '{}' contains digits", issue, text));
            alternatives.push_back(phrase_tokens(text, issue, stopwords));
            names.push_back(text);
        }
        std::string joined;
        for (const auto& n : names) joined += (joined.empty() ? "" : "|") + n;
        parts.push_back(joined);
        rule.term_lists.push_back(std::move(alternatives));
    }
    for (const auto& p : parts) rule.source += (rule.source.empty() ? "" : " + ") + p;
    return rule;
}

bool phrase_at(std::span<const std::string> tokens, std::size_t pos, const TokenList& phrase) {
    if (pos + phrase.size() > tokens.size()) return false;
    return std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(pos));
}

bool contains_phrase(std::span<const std::string> tokens, const TokenList& phrase) {
    for (std::size_t pos = 0; pos + phrase.size() <= tokens.size(); ++pos)
        if (phrase_at(tokens, pos, phrase)) return true;
    return false;
}

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

std::size_t IssueTaxonomy::rule_count() const {
    std::size_t n = 0;
    for (const auto& issue : issues) n += issue.rules.size();
    return n;
}

std::vector<std::string> IssueTaxonomy::issue_names() const {
    std::vector<std::string> names;
    for (const auto& issue : issues) names.push_back(issue.name);
    return names;
}

std::size_t IssueTaxonomy::find_issue(std::string_view name) const {
    const std::string wanted = to_lower_utf8(name);
    for (std::size_t i = 0; i < issues.size(); ++i)
        if (to_lower_utf8(issues[i].name) == wanted) return i;
    return static_cast<std::size_t>(-1);
}

std::vector<std::string> IssueTaxonomy::keyword_tokens(std::size_t issue) const {
    std::set<std::string> tokens;
    for (const auto& rule : issues.at(issue).rules) {
        for (const auto& t : rule.phrase) tokens.insert(t);
        for (const auto& list : rule.term_lists)
            for (const auto& alt : list)
                for (const auto& t : alt) tokens.insert(t);
        if (rule.raw_text_fallback) {
            // alphabetic words of a raw pattern, e.g. "january" in "january 6"
            std::istringstream words(rule.raw_pattern);
            std::string w;
            while (words >> w)
                if (std::all_of(w.begin(), w.end(), [](unsigned char c) { return std::isalpha(c); }))
                    tokens.insert(w);
        }
    }
    return {tokens.begin(), tokens.end()};
}

IssueTaxonomy parse_taxonomy(std::string_view json_text, const StopwordSet& stopwords) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaError(fmt::format("taxonomy is not valid JSON: {}", e.what()));
    }
    const auto issues_it = doc.find("issues");
    if (issues_it == doc.end() || !issues_it->is_array() || issues_it->empty())
        throw SchemaError("taxonomy needs a non-empty \"issues\" array");

    IssueTaxonomy taxonomy;
    std::set<std::string> seen;
    for (const auto& entry : *issues_it) {
        if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string())
            throw SchemaError("taxonomy issue needs a string \"name\"");
        Issue issue;
        issue.name = entry["name"].get<std::string>();
        if (issue.name.empty()) throw SchemaError("taxonomy issue with empty name");
        if (!seen.insert(to_lower_utf8(issue.name)).second)
            throw SchemaError(fmt::format("duplicate issue '{}'", issue.name));
        const auto kw = entry.find("keywords");
        if (kw == entry.end() || !kw->is_array() || kw->empty())
            throw SchemaError(fmt::format("issue '{}' has no keywords", issue.name));
        for (const auto& k : *kw) {
            if (k.is_string()) {
                issue.rules.push_back(compile_phrase(k.get<std::string>(), issue.name, stopwords));
            } else if (k.is_object()) {
                issue.rules.push_back(compile_cooccur(k, issue.name, stopwords));
            } else {
                throw SchemaError(fmt::format("issue '{}': keyword must be a string or object", issue.name));
            }
        }
        taxonomy.issues.push_back(std::move(issue));
    }
    return taxonomy;
}

IssueTaxonomy load_taxonomy(const std::filesystem::path& path, const StopwordSet& stopwords) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot open taxonomy file {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_taxonomy(ss.str(), stopwords);
    } catch (const SchemaError& e) {
        throw SchemaError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

IssueTaxonomy default_taxonomy(const StopwordSet& stopwords) {
    return parse_taxonomy(resources::default_taxonomy_json(), stopwords);
}

// ---- matching ----

std::size_t count_word_bounded(std::string_view haystack, std::string_view pattern) {
    if (pattern.empty()) return 0;
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = haystack.find(pattern, pos)) != std::string_view::npos) {
        const std::size_t end = pos + pattern.size();
        const bool left_ok = pos == 0 || !is_word_byte(static_cast<unsigned char>(haystack[pos - 1]));
        const bool right_ok = end == haystack.size() || !is_word_byte(static_cast<unsigned char>(haystack[end]));
        if (left_ok && right_ok) {
            ++count;
            pos = end;
        } else {
            ++pos;
        }
    }
    return count;
}

MatchCounts match_comment(std::span<const std::string> tokens, std::string_view raw_text,
                          const IssueTaxonomy& taxonomy, CountMode mode) {
    MatchCounts out;
    out.per_issue.assign(taxonomy.issues.size(), 0);
    out.per_rule.resize(taxonomy.issues.size());

    std::string lowered_raw;
    bool lowered_ready = false;

    for (std::size_t i = 0; i < taxonomy.issues.size(); ++i) {
        const auto& rules = taxonomy.issues[i].rules;
        auto& per_rule = out.per_rule[i];
        per_rule.assign(rules.size(), 0);

        std::size_t pos = 0;
        while (pos < tokens.size()) {
            std::size_t best_len = 0;
            std::size_t best_rule = 0;
            for (std::size_t r = 0; r < rules.size(); ++r) {
                const auto& rule = rules[r];
                if (rule.kind != RuleKind::Phrase || rule.raw_text_fallback) continue;
                if (rule.phrase.size() > best_len && phrase_at(tokens, pos, rule.phrase)) {
                    best_len = rule.phrase.size();
                    best_rule = r;
                }
            }
            if (best_len == 0) {
                ++pos;
                continue;
            }
            ++per_rule[best_rule];
            pos += best_len;
        }

        for (std::size_t r = 0; r < rules.size(); ++r) {
            const auto& rule = rules[r];
            if (rule.kind == RuleKind::Cooccur) {
                const bool all = std::all_of(rule.term_lists.begin(), rule.term_lists.end(), [&](const auto& list) {
                    return std::any_of(list.begin(), list.end(),
                                       [&](const TokenList& alt) { return contains_phrase(tokens, alt); });
                });
                if (all) per_rule[r] += 1;
            } else if (rule.raw_text_fallback) {
                if (!lowered_ready) {
                    lowered_raw = collapse_whitespace(to_lower_utf8(raw_text));
                    lowered_ready = true;
                }
                per_rule[r] += count_word_bounded(lowered_raw, rule.raw_pattern);
            }
        }

        std::uint64_t total = 0;
        for (auto n : per_rule) total += n;
        if (mode == CountMode::Comments && total > 1) {
            // keep the issue total at 1, attributed to the first matching rule
            bool kept = false;
            for (auto& n : per_rule) {
                if (n > 0 && !kept) {
                    n = 1;
                    kept = true;
                } else {
                    n = 0;
                }
            }
            total = 1;
        }
        out.per_issue[i] = total;
    }
    return out;
}

SalienceTable salience_table_keywords(const Corpus& corpus, const IssueTaxonomy& taxonomy,
                                      const StopwordSet& stopwords, CountMode mode) {
    SalienceTable table;
    table.method = Method::Keyword;
    table.issues = taxonomy.issue_names();
    const GroupedText groups = group_concat(corpus, stopwords);
    for (const auto& [key, entry] : groups) {
        for (std::size_t m = 0; m < entry.members.size(); ++m) {
            const Comment& c = corpus.comments[entry.members[m]];
            const MatchCounts counts = match_comment(entry.member_tokens(m), c.text, taxonomy, mode);
            for (std::size_t i = 0; i < counts.per_issue.size(); ++i)
                table.add(SalienceCell{i, key.day, key.channel}, counts.per_issue[i]);
        }
    }
    return table;
}

}  // namespace salience
