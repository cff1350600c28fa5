#pragma once

// End-to-end run: configuration, stage orchestration over a persisted work directory, and the
// run manifest.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "salience/chat.hpp"
#include "salience/embed.hpp"
#include "salience/hdbscan.hpp"
#include "salience/keywords.hpp"
#include "salience/labeling.hpp"
#include "salience/reduce.hpp"
#include "salience/youtube.hpp"

namespace salience {

inline constexpr std::string_view kToolVersion = "salience 0.1.0";

enum class ProviderKind { Fallback, Precomputed, Remote };

std::optional<ProviderKind> parse_provider_kind(std::string_view s);
std::string_view provider_kind_name(ProviderKind k);

struct EmbeddingConfig {
    ProviderKind provider = ProviderKind::Fallback;
    FallbackConfig fallback;
    std::filesystem::path vectors_path;  // precomputed
    std::string url;                     // remote
    std::size_t dim = 0;
    std::size_t batch_size = 64;
};

struct LabelerConfig {
    LabelerOptions options;
    SummaryOptions summary;
    std::filesystem::path replay_dir;  // replay cache for llm modes
    std::string endpoint;              // chat-completions URL; empty means replay only
    std::string model;
    std::string api_key_env = "CHAT_API_KEY";
    std::filesystem::path prompt_path;  // empty: shipped template
};

struct RunConfig {
    std::optional<std::filesystem::path> corpus;  // stored corpus file, or
    std::optional<SearchConfig> search;           // live/fixture ingestion
    std::string author_salt = "salience";
    std::size_t max_concurrency = 4;
    std::optional<std::filesystem::path> fixture_dir;  // offline HTTP replay for ingestion
    std::optional<std::filesystem::path> taxonomy;     // empty: shipped taxonomy
    std::optional<std::filesystem::path> stopwords;    // empty: shipped list
    CountMode keyword_mode = CountMode::Occurrences;
    EmbeddingConfig embedding;
    ReducerConfig reduce_cluster;
    ReducerConfig reduce_plot;
    ClustererConfig clusterer;
    LabelerConfig labeler;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 42;

    RunConfig();

    /// Relative paths resolve against `base_dir`. Throws ConfigError.
    static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
    nlohmann::ordered_json to_json() const;

    /// Parameter checks and existence of every referenced input path. Throws ConfigError naming
    /// the offending path.
    void validate() const;
};

RunConfig load_run_config(const std::filesystem::path& path);

enum class Stage { Fetch, Dedupe, Keywords, Embed, Reduce, Cluster, Label, Stats, Report, Run };

std::optional<Stage> parse_stage(std::string_view s);
std::string_view stage_name(Stage s);
/// Pipeline stages in execution order (Run excluded).
std::vector<Stage> pipeline_stages();

struct StageCounts {
    std::size_t videos = 0;
    std::size_t raw_comments = 0;
    std::size_t deduped = 0;
    std::size_t out_of_window = 0;
    std::size_t embedded = 0;
    std::size_t degenerate = 0;
    std::size_t clustered = 0;
    std::size_t noise = 0;
    std::size_t clusters = 0;
    std::size_t labeled = 0;
    std::size_t excluded_new_category = 0;
    std::size_t excluded_unlabeled = 0;
    std::size_t excluded = 0;
};

struct RunManifest {
    nlohmann::ordered_json config;
    std::vector<std::pair<std::string, std::string>> checksums;  // name -> sha256
    StageCounts counts;
    std::vector<std::string> completed_stages;
    std::string status = "ok";  // "ok" or "FAILED"
    std::string failed_stage;
    std::string error;

    nlohmann::ordered_json to_json() const;
};

/// Work-directory file names.
namespace work {
inline constexpr std::string_view kRawCorpus = "corpus.raw.jsonl";
inline constexpr std::string_view kCorpus = "corpus.jsonl";
inline constexpr std::string_view kKeywordCounts = "counts_keyword.csv";
inline constexpr std::string_view kEmbeddings = "embeddings.emb";
inline constexpr std::string_view kLayout5d = "layout_5d.emb";
inline constexpr std::string_view kLayout2d = "layout_2d.emb";
inline constexpr std::string_view kAssignment = "assignment.csv";
inline constexpr std::string_view kLabels = "labels.json";
inline constexpr std::string_view kClusterCounts = "counts_cluster.csv";
inline constexpr std::string_view kExcluded = "excluded.csv";
}  // namespace work

/// Injection points for tests; null members are built from the config.
struct PipelineServices {
    std::shared_ptr<HttpTransport> transport;
    std::shared_ptr<EmbeddingProvider> embedder;
    std::shared_ptr<ChatClient> chat;
};

class Pipeline {
public:
    /// Validates the config and loads taxonomy and stopwords; creates no files.
    explicit Pipeline(RunConfig cfg, PipelineServices services = {});

    /// Runs one stage, or every stage for Stage::Run. With `resume`, stages whose outputs already
    /// exist are skipped. The manifest is written to <out>/manifest.json, including on failure
    /// (status FAILED); the stage error is then rethrown.
    RunManifest run(Stage stage = Stage::Run, bool resume = false);

    const RunConfig& config() const { return cfg_; }
    std::filesystem::path work_dir() const { return cfg_.output_dir / "work"; }
    std::filesystem::path work_file(std::string_view name) const { return work_dir() / name; }

private:
    void run_stage(Stage s);
    bool outputs_exist(Stage s) const;

    void stage_fetch();
    void stage_dedupe();
    void stage_keywords();
    void stage_embed();
    void stage_reduce();
    void stage_cluster();
    void stage_label();
    void stage_stats();
    void stage_report();

    ChatClient& chat_client();
    EmbeddingProvider& embedder();

    RunConfig cfg_;
    PipelineServices services_;
    StopwordSet stopwords_;
    IssueTaxonomy taxonomy_;
    RunManifest manifest_;
};

/// Convenience wrapper: Pipeline(cfg).run(Stage::Run).
RunManifest run_pipeline(const RunConfig& cfg);

}  // namespace salience
