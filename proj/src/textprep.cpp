#include "salience/textprep.hpp"

#include <fmt/format.h>
#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "salience/errors.hpp"
#include "salience/resources.hpp"

namespace salience {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool is_apostrophe(char32_t c) { return c == U'\'' || c == 0x2019 || c == 0x02BC; }

bool is_boundary(char32_t c) {
    const auto cp = static_cast<UChar32>(c);
    if (c == kReplacement) return true;
    if (u_isUWhiteSpace(cp) || u_iscntrl(cp)) return true;
    if (is_apostrophe(c)) return false;
    if (u_ispunct(cp)) return true;
    const auto type = u_charType(cp);
    return type == U_MATH_SYMBOL || type == U_CURRENCY_SYMBOL || type == U_MODIFIER_SYMBOL ||
           type == U_OTHER_SYMBOL;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::u32string decode_utf8(std::string_view text, NormalizeStats* stats) {
    std::u32string out;
    out.reserve(text.size());
    const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
    const auto length = static_cast<int32_t>(text.size());
    int32_t i = 0;
    while (i < length) {
        UChar32 c = 0;
        U8_NEXT(bytes, i, length, c);
        if (c < 0) {
            out.push_back(kReplacement);
            if (stats) ++stats->invalid_utf8;
        } else {
            out.push_back(static_cast<char32_t>(c));
        }
    }
    return out;
}

std::string encode_utf8(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t c : text) {
        uint8_t buf[4];
        int32_t n = 0;
        UBool error = false;
        U8_APPEND(buf, n, 4, static_cast<UChar32>(c), error);
        if (error) {
            n = 0;
            U8_APPEND_UNSAFE(buf, n, kReplacement);
        }
        out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
    }
    return out;
}

std::string to_lower_utf8(std::string_view text, NormalizeStats* stats) {
    std::u32string cps = decode_utf8(text, stats);
    for (auto& c : cps) c = static_cast<char32_t>(u_tolower(static_cast<UChar32>(c)));
    return encode_utf8(cps);
}

StopwordSet parse_stopwords(std::string_view text, std::string source_name) {
    StopwordSet set;
    set.source_name = std::move(source_name);
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::string word = trim(line);
        if (word.empty()) continue;
        set.words.insert(to_lower_utf8(word));
    }
    return set;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open stopword file {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_stopwords(ss.str(), path.filename().string());
}

StopwordSet default_stopwords() {
    return parse_stopwords(resources::default_stopwords_text(), "stopwords_en");
}

TokenList normalize(std::string_view text, const StopwordSet& stopwords, NormalizeStats* stats) {
    const std::u32string cps = decode_utf8(text, stats);
    TokenList tokens;
    std::size_t i = 0;
    while (i < cps.size()) {
        while (i < cps.size() && is_boundary(cps[i])) ++i;
        std::size_t j = i;
        while (j < cps.size() && !is_boundary(cps[j])) ++j;
        std::size_t b = i;
        std::size_t e = j;
        i = j;
        while (b < e && is_apostrophe(cps[b])) ++b;
        while (e > b && is_apostrophe(cps[e - 1])) --e;
        if (b == e) continue;

        std::u32string token;
        bool alphabetic = true;
        for (std::size_t k = b; k < e; ++k) {
            const auto cp = static_cast<UChar32>(cps[k]);
            if (!u_isUAlphabetic(cp)) {
                alphabetic = false;
                break;
            }
            token.push_back(static_cast<char32_t>(u_tolower(cp)));
        }
        if (!alphabetic) continue;
        std::string utf8 = encode_utf8(token);
        if (stopwords.contains(utf8)) continue;
        tokens.push_back(std::move(utf8));
    }
    return tokens;
}

GroupedText group_concat(const Corpus& corpus, const StopwordSet& stopwords) {
    std::vector<std::size_t> order(corpus.comments.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return comment_order(corpus.comments[a], corpus.comments[b]);
    });

    GroupedText groups;
    for (std::size_t idx : order) {
        const Comment& c = corpus.comments[idx];
        if (c.out_of_window || !corpus.window.contains(c.published_at)) continue;
        GroupEntry& entry = groups[GroupKey{day_index(c.published_at, corpus.window), c.channel}];
        TokenList tokens = normalize(c.text, stopwords);
        entry.tokens.insert(entry.tokens.end(), std::make_move_iterator(tokens.begin()),
                            std::make_move_iterator(tokens.end()));
        entry.boundaries.push_back(entry.tokens.size());
        entry.members.push_back(idx);
    }
    return groups;
}

}  // namespace salience
