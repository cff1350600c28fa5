#pragma once

// Cluster summaries (TF-IDF terms and medoid samples), LLM and rule-based labeling, and the
// off-topic filter that restricts clustered comments to the taxonomy's issues.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "salience/chat.hpp"
#include "salience/hdbscan.hpp"
#include "salience/keywords.hpp"
#include "salience/matrix.hpp"
#include "salience/textprep.hpp"

namespace salience {

/// Document frequencies over a corpus where each comment is one document.
struct TfidfModel {
    std::size_t n_docs = 0;
    std::map<std::string, std::size_t, std::less<>> df;

    static TfidfModel fit(std::span<const TokenList> docs);
    /// ln((1 + N) / (1 + df)) + 1; terms outside the vocabulary use df = 0.
    double idf(std::string_view term) const;
};

struct TermScore {
    std::string term;
    double score = 0.0;

    bool operator==(const TermScore&) const = default;
};

/// Raw term counts summed over `members`, times corpus idf; top k by (score desc, term asc).
std::vector<TermScore> tfidf_top_terms(const TfidfModel& model, std::span<const TokenList> docs,
                                       std::span<const std::size_t> members, std::size_t k);

/// Up to `count` members nearest the medoid (the member with the least summed distance to the
/// others), nearest first; ties by index.
std::vector<std::size_t> medoid_samples(const DenseMatrix& points, std::span<const std::size_t> members,
                                        std::size_t count);

struct ClusterSummary {
    int cluster_id = 0;
    std::vector<TermScore> top_terms;
    std::vector<std::string> sample_comments;
    std::size_t size = 0;
};

struct SummaryOptions {
    std::size_t top_terms = 10;
    std::size_t samples = 5;
};

/// One summary per cluster label 0..cluster_count-1. `docs`, `texts` and `points` are indexed
/// like the assignment.
std::vector<ClusterSummary> summarize_clusters(const ClusterAssignment& assignment, std::span<const TokenList> docs,
                                               std::span<const std::string> texts, const DenseMatrix& points,
                                               const SummaryOptions& opts = {});

/// Renders {categories}, {terms} and {samples}; the samples block is omitted when empty.
std::string build_prompt(const ClusterSummary& summary, const IssueTaxonomy& taxonomy, std::string_view tmpl);
std::string build_prompt(const ClusterSummary& summary, const IssueTaxonomy& taxonomy);

enum class LabelOutcome { Predefined, NewCategory, Unlabeled };
enum class LabelSource { Llm, Fallback };

std::string_view outcome_name(LabelOutcome o);
std::string_view source_name(LabelSource s);

struct LabelDecision {
    int cluster_id = 0;
    LabelOutcome outcome = LabelOutcome::Unlabeled;
    std::string name;  // issue name (as in the taxonomy) or new category name
    LabelSource source = LabelSource::Fallback;
    std::string raw_response;

    bool operator==(const LabelDecision&) const = default;
};

/// First nonempty line: a taxonomy issue (case-insensitive) or "NEW: <name>". nullopt otherwise.
std::optional<LabelDecision> parse_label_response(std::string_view response, const IssueTaxonomy& taxonomy,
                                                  int cluster_id);

/// Asks the client, retrying once with a format reminder. Throws ParseFailure after two bad
/// answers; transport errors propagate.
LabelDecision llm_label(ChatClient& client, const std::string& prompt, const IssueTaxonomy& taxonomy, int cluster_id);

/// Scores each issue by the summed scores of top terms among its keyword tokens. The best issue
/// wins when its score reaches theta * total score (ties by taxonomy order), else NEW "other".
LabelDecision fallback_label(const ClusterSummary& summary, const IssueTaxonomy& taxonomy, double theta = 0.25);

enum class LabelerMode { Llm, Fallback, LlmWithFallback };

std::optional<LabelerMode> parse_labeler_mode(std::string_view s);
std::string_view labeler_mode_name(LabelerMode m);

struct LabelerOptions {
    LabelerMode mode = LabelerMode::Fallback;
    double theta = 0.25;
    std::string prompt_template;  // empty: shipped template
};

/// Labels every summary. In Llm mode a ParseFailure yields Unlabeled; in LlmWithFallback mode
/// it yields the fallback decision. `client` may be null only in Fallback mode.
std::vector<LabelDecision> label_clusters(std::span<const ClusterSummary> summaries, const IssueTaxonomy& taxonomy,
                                          const LabelerOptions& opts, ChatClient* client);

struct Exclusion {
    std::size_t index = 0;  // into the assignment
    std::string reason;     // "noise", "new_category:<name>", "unlabeled"
};

struct FilteredAssignment {
    std::vector<int> issue;  // per point: taxonomy issue index, or -1 when excluded
    std::vector<Exclusion> excluded;

    std::size_t labeled_count() const;
};

/// Throws MissingDecision when a cluster has no decision.
FilteredAssignment filter_offtopic(const ClusterAssignment& assignment, std::span<const LabelDecision> decisions,
                                   const IssueTaxonomy& taxonomy);

}  // namespace salience
