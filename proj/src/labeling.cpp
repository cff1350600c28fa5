#include "salience/labeling.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "salience/errors.hpp"
#include "salience/resources.hpp"

namespace salience {

namespace {

std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

/// Collapses whitespace runs and cuts at `limit` bytes on a code point boundary.
std::string one_line(std::string_view text, std::size_t limit) {
    std::string out;
    bool space = false;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(c);
    }
    if (out.size() > limit) {
        std::size_t cut = limit;
        while (cut > 0 && (static_cast<unsigned char>(out[cut]) & 0xC0) == 0x80) --cut;
        out.resize(cut);
        out += "...";
    }
    return out;
}

constexpr std::string_view kFormatReminder =
    "\n\nYour previous answer did not follow the required format. Reply with exactly one line containing "
    "either one of the category names above, verbatim, or NEW: followed by a short name. No other text.";

}  // namespace

TfidfModel TfidfModel::fit(std::span<const TokenList> docs) {
    TfidfModel m;
    m.n_docs = docs.size();
    for (const auto& doc : docs) {
        TokenList uniq(doc);
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (auto& t : uniq) ++m.df[std::move(t)];
    }
    return m;
}

double TfidfModel::idf(std::string_view term) const {
    const auto it = df.find(term);
    const double d = it == df.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + d)) + 1.0;
}

std::vector<TermScore> tfidf_top_terms(const TfidfModel& model, std::span<const TokenList> docs,
                                       std::span<const std::size_t> members, std::size_t k) {
    std::map<std::string_view, std::size_t> tf;
    for (const auto m : members)
        for (const auto& t : docs[m]) ++tf[t];
    std::vector<TermScore> scored;
    scored.reserve(tf.size());
    for (const auto& [term, count] : tf)
        scored.push_back({std::string(term), static_cast<double>(count) * model.idf(term)});
    const auto keep = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                      [](const TermScore& a, const TermScore& b) {
                          return a.score != b.score ? a.score > b.score : a.term < b.term;
                      });
    scored.resize(keep);
    return scored;
}

std::vector<std::size_t> medoid_samples(const DenseMatrix& points, std::span<const std::size_t> members,
                                        std::size_t count) {
    if (members.empty() || count == 0) return {};
    const std::size_t m = members.size();
    std::vector<double> total(m, 0.0);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) {
            const double d = std::sqrt(squared_euclidean(points.row(members[a]), points.row(members[b])));
            total[a] += d;
            total[b] += d;
        }
    const std::size_t medoid = static_cast<std::size_t>(std::min_element(total.begin(), total.end()) - total.begin());
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(m);
    for (std::size_t a = 0; a < m; ++a)
        order.emplace_back(squared_euclidean(points.row(members[a]), points.row(members[medoid])), members[a]);
    const auto keep = std::min(count, m);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < keep; ++i) out.push_back(order[i].second);
    return out;
}

std::vector<ClusterSummary> summarize_clusters(const ClusterAssignment& assignment, std::span<const TokenList> docs,
                                               std::span<const std::string> texts, const DenseMatrix& points,
                                               const SummaryOptions& opts) {
    const std::size_t n = assignment.labels.size();
    if (docs.size() != n || texts.size() != n || points.rows != n)
        throw ConfigError("summarize_clusters: inputs are not aligned with the assignment");
    const TfidfModel model = TfidfModel::fit(docs);
    std::vector<ClusterSummary> out;
    for (int c = 0; c < assignment.cluster_count; ++c) {
        const auto members = assignment.members(c);
        ClusterSummary s;
        s.cluster_id = c;
        s.size = members.size();
        s.top_terms = tfidf_top_terms(model, docs, members, opts.top_terms);
        for (const auto i : medoid_samples(points, members, opts.samples)) s.sample_comments.push_back(texts[i]);
        out.push_back(std::move(s));
    }
    return out;
}

std::string build_prompt(const ClusterSummary& summary, const IssueTaxonomy& taxonomy, std::string_view tmpl) {
    std::string categories;
    for (const auto& issue : taxonomy.issues) categories += fmt::format("- {}\n", issue.name);
    if (!categories.empty()) categories.pop_back();
    std::string terms;
    for (const auto& t : summary.top_terms) terms += fmt::format("- {} ({:.6f})\n", t.term, t.score);
    if (!terms.empty()) terms.pop_back();
    std::string samples;
    if (!summary.sample_comments.empty()) {
        samples = "\nComments near the center of the cluster:\n";
        for (std::size_t i = 0; i < summary.sample_comments.size(); ++i)
            samples += fmt::format("{}. {}\n", i + 1, one_line(summary.sample_comments[i], 400));
    }
    std::string out(tmpl);
    replace_all(out, "{categories}", categories);
    replace_all(out, "{terms}", terms);
    replace_all(out, "{samples}", samples);
    return out;
}

std::string build_prompt(const ClusterSummary& summary, const IssueTaxonomy& taxonomy) {
    return build_prompt(summary, taxonomy, resources::default_label_prompt());
}

std::string_view outcome_name(LabelOutcome o) {
    switch (o) {
        case LabelOutcome::Predefined: return "predefined";
        case LabelOutcome::NewCategory: return "new_category";
        case LabelOutcome::Unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

std::string_view source_name(LabelSource s) { return s == LabelSource::Llm ? "llm" : "fallback"; }

std::optional<LabelDecision> parse_label_response(std::string_view response, const IssueTaxonomy& taxonomy,
                                                  int cluster_id) {
    std::string_view line;
    for (std::size_t pos = 0; pos <= response.size();) {
        const std::size_t end = std::min(response.find('\n', pos), response.size());
        line = trim(response.substr(pos, end - pos));
        if (!line.empty()) break;
        pos = end + 1;
    }
    if (line.empty()) return std::nullopt;
    LabelDecision d;
    d.cluster_id = cluster_id;
    d.source = LabelSource::Llm;
    d.raw_response = std::string(response);
    if (const auto idx = taxonomy.find_issue(line); idx != std::string::npos) {
        d.outcome = LabelOutcome::Predefined;
        d.name = taxonomy.issues[idx].name;
        return d;
    }
    if (line.size() > 4 && iequals(line.substr(0, 4), "new:")) {
        const auto name = trim(line.substr(4));
        if (name.empty()) return std::nullopt;
        d.outcome = LabelOutcome::NewCategory;
        d.name = std::string(name);
        return d;
    }
    return std::nullopt;
}

LabelDecision llm_label(ChatClient& client, const std::string& prompt, const IssueTaxonomy& taxonomy, int cluster_id) {
    const std::string first = client.complete(prompt);
    if (auto d = parse_label_response(first, taxonomy, cluster_id)) return *d;
    const std::string second = client.complete(prompt + std::string(kFormatReminder));
    if (auto d = parse_label_response(second, taxonomy, cluster_id)) return *d;
    throw ParseFailure(fmt::format("cluster {}: label response does not follow the answer grammar", cluster_id),
                       second);
}

LabelDecision fallback_label(const ClusterSummary& summary, const IssueTaxonomy& taxonomy, double theta) {
    LabelDecision d;
    d.cluster_id = summary.cluster_id;
    d.source = LabelSource::Fallback;
    std::vector<double> score(taxonomy.issues.size(), 0.0);
    double mass = 0.0;
    for (const auto& t : summary.top_terms) mass += t.score;
    for (std::size_t i = 0; i < taxonomy.issues.size(); ++i) {
        const auto tokens = taxonomy.keyword_tokens(i);
        for (const auto& t : summary.top_terms)
            if (std::binary_search(tokens.begin(), tokens.end(), t.term)) score[i] += t.score;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < score.size(); ++i)
        if (score[i] > score[best]) best = i;
    if (!score.empty() && score[best] > 0.0 && score[best] >= theta * mass) {
        d.outcome = LabelOutcome::Predefined;
        d.name = taxonomy.issues[best].name;
    } else {
        d.outcome = LabelOutcome::NewCategory;
        d.name = "other";
    }
    std::string audit;
    for (std::size_t i = 0; i < score.size(); ++i)
        audit += fmt::format("{}{}={:.6f}", i ? ";" : "", taxonomy.issues[i].name, score[i]);
    d.raw_response = fmt::format("{};mass={:.6f}", audit, mass);
    return d;
}

std::optional<LabelerMode> parse_labeler_mode(std::string_view s) {
    if (s == "llm") return LabelerMode::Llm;
    if (s == "fallback") return LabelerMode::Fallback;
    if (s == "llm-with-fallback") return LabelerMode::LlmWithFallback;
    return std::nullopt;
}

std::string_view labeler_mode_name(LabelerMode m) {
    switch (m) {
        case LabelerMode::Llm: return "llm";
        case LabelerMode::Fallback: return "fallback";
        case LabelerMode::LlmWithFallback: return "llm-with-fallback";
    }
    return "fallback";
}

std::vector<LabelDecision> label_clusters(std::span<const ClusterSummary> summaries, const IssueTaxonomy& taxonomy,
                                          const LabelerOptions& opts, ChatClient* client) {
    if (opts.mode != LabelerMode::Fallback && client == nullptr)
        throw ConfigError(fmt::format("labeler '{}' needs a chat client", labeler_mode_name(opts.mode)));
    std::vector<LabelDecision> out;
    out.reserve(summaries.size());
    for (const auto& s : summaries) {
        if (opts.mode == LabelerMode::Fallback) {
            out.push_back(fallback_label(s, taxonomy, opts.theta));
            continue;
        }
        const std::string prompt = opts.prompt_template.empty() ? build_prompt(s, taxonomy)
                                                                : build_prompt(s, taxonomy, opts.prompt_template);
        try {
            out.push_back(llm_label(*client, prompt, taxonomy, s.cluster_id));
        } catch (const ParseFailure& e) {
            if (opts.mode == LabelerMode::LlmWithFallback) {
                out.push_back(fallback_label(s, taxonomy, opts.theta));
            } else {
                LabelDecision d;
                d.cluster_id = s.cluster_id;
                d.outcome = LabelOutcome::Unlabeled;
                d.source = LabelSource::Llm;
                d.raw_response = e.raw_response();
                out.push_back(std::move(d));
            }
        }
    }
    return out;
}

std::size_t FilteredAssignment::labeled_count() const {
    return static_cast<std::size_t>(std::count_if(issue.begin(), issue.end(), [](int i) { return i >= 0; }));
}

FilteredAssignment filter_offtopic(const ClusterAssignment& assignment, std::span<const LabelDecision> decisions,
                                   const IssueTaxonomy& taxonomy) {
    std::unordered_map<int, const LabelDecision*> by_cluster;
    for (const auto& d : decisions) by_cluster[d.cluster_id] = &d;
    for (int c = 0; c < assignment.cluster_count; ++c)
        if (!by_cluster.contains(c)) throw MissingDecision(fmt::format("cluster {} has no label decision", c));

    FilteredAssignment out;
    out.issue.assign(assignment.labels.size(), -1);
    for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
        const int label = assignment.labels[i];
        if (label == kNoise) {
            out.excluded.push_back({i, "noise"});
            continue;
        }
        const LabelDecision& d = *by_cluster.at(label);
        switch (d.outcome) {
            case LabelOutcome::Predefined: {
                const auto idx = taxonomy.find_issue(d.name);
                if (idx == std::string::npos)
                    throw ConfigError(fmt::format("label '{}' is not a taxonomy issue", d.name));
                out.issue[i] = static_cast<int>(idx);
                break;
            }
            case LabelOutcome::NewCategory: out.excluded.push_back({i, "new_category:" + d.name}); break;
            case LabelOutcome::Unlabeled: out.excluded.push_back({i, "unlabeled"}); break;
        }
    }
    return out;
}

}  // namespace salience
