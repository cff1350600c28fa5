#include "salience/pipeline.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "salience/analyze.hpp"
#include "salience/corpus.hpp"
#include "salience/errors.hpp"
#include "salience/hashing.hpp"
#include "salience/random.hpp"
#include "salience/report.hpp"
#include "salience/resources.hpp"
#include "salience/textprep.hpp"

namespace salience {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::optional<ProviderKind> parse_provider_kind(std::string_view s) {
    if (s == "fallback") return ProviderKind::Fallback;
    if (s == "precomputed") return ProviderKind::Precomputed;
    if (s == "remote") return ProviderKind::Remote;
    return std::nullopt;
}

std::string_view provider_kind_name(ProviderKind k) {
    switch (k) {
        case ProviderKind::Fallback: return "fallback";
        case ProviderKind::Precomputed: return "precomputed";
        case ProviderKind::Remote: return "remote";
    }
    return "fallback";
}

// ---- configuration ----

RunConfig::RunConfig() {
    reduce_cluster.n_components = 5;
    reduce_cluster.min_dist = 0.0;
    reduce_plot.n_components = 2;
    reduce_plot.min_dist = 0.1;
}

namespace {

template <typename T>
void read_opt(const json& j, std::string_view key, T& out) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("config field '{}': {}", key, e.what()));
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::optional<fs::path> read_path(const json& j, std::string_view key, const fs::path& base) {
    std::string s;
    read_opt(j, key, s);
    if (s.empty()) return std::nullopt;
    return resolve(base, s);
}

Metric parse_metric(const std::string& s) {
    if (s == "cosine") return Metric::Cosine;
    if (s == "euclidean") return Metric::Euclidean;
    throw ConfigError(fmt::format("unknown metric '{}'", s));
}

std::string_view metric_name(Metric m) { return m == Metric::Cosine ? "cosine" : "euclidean"; }

void read_reducer(const json& j, ReducerConfig& r) {
    read_opt(j, "n_neighbors", r.n_neighbors);
    read_opt(j, "n_components", r.n_components);
    read_opt(j, "min_dist", r.min_dist);
    read_opt(j, "spread", r.spread);
    read_opt(j, "n_epochs", r.n_epochs);
    read_opt(j, "negative_sample_rate", r.negative_sample_rate);
    read_opt(j, "learning_rate", r.learning_rate);
    std::string metric;
    read_opt(j, "metric", metric);
    if (!metric.empty()) r.metric = parse_metric(metric);
}

ordered_json reducer_json(const ReducerConfig& r) {
    return ordered_json{{"n_neighbors", r.n_neighbors},   {"n_components", r.n_components},
                        {"min_dist", r.min_dist},         {"spread", r.spread},
                        {"n_epochs", r.n_epochs},         {"negative_sample_rate", r.negative_sample_rate},
                        {"learning_rate", r.learning_rate}, {"metric", metric_name(r.metric)}};
}

std::string path_string(const std::optional<fs::path>& p) { return p ? p->generic_string() : std::string(); }

}  // namespace

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    RunConfig c;
    c.corpus = read_path(j, "corpus", base_dir);
    if (const auto it = j.find("search"); it != j.end() && !it->is_null()) {
        SearchConfig s;
        try {
            for (const auto& ch : it->at("channels"))
                s.channels.push_back({Channel{ch.at("channel").get<std::string>()}, ch.at("channel_id").get<std::string>()});
            s.query_terms = it->at("query_terms").get<std::vector<std::string>>();
            s.window.start = parse_date(it->at("window").at("start").get<std::string>());
            s.window.end = parse_date(it->at("window").at("end").get<std::string>());
        } catch (const json::exception& e) {
            throw ConfigError(fmt::format("config field 'search': {}", e.what()));
        } catch (const SchemaError& e) {
            throw ConfigError(fmt::format("config field 'search.window': {}", e.what()));
        }
        read_opt(*it, "api_key_env", s.api_key_env);
        read_opt(*it, "max_pages_per_query", s.max_pages_per_query);
        c.search = std::move(s);
    }
    read_opt(j, "author_salt", c.author_salt);
    read_opt(j, "max_concurrency", c.max_concurrency);
    c.fixture_dir = read_path(j, "fixture_dir", base_dir);
    c.taxonomy = read_path(j, "taxonomy", base_dir);
    c.stopwords = read_path(j, "stopwords", base_dir);
    std::string mode;
    read_opt(j, "keyword_count_mode", mode);
    if (mode == "comments") c.keyword_mode = CountMode::Comments;
    else if (!mode.empty() && mode != "occurrences") throw ConfigError(fmt::format("unknown keyword_count_mode '{}'", mode));

    if (const auto it = j.find("embedding"); it != j.end()) {
        std::string provider;
        read_opt(*it, "provider", provider);
        if (!provider.empty()) {
            const auto k = parse_provider_kind(provider);
            if (!k) throw ConfigError(fmt::format("unknown embedding provider '{}'", provider));
            c.embedding.provider = *k;
        }
        std::size_t dim = 0;
        read_opt(*it, "dim", dim);
        if (dim > 0) c.embedding.fallback.dim = c.embedding.dim = dim;
        read_opt(*it, "ngram_min", c.embedding.fallback.ngram_min);
        read_opt(*it, "ngram_max", c.embedding.fallback.ngram_max);
        read_opt(*it, "url", c.embedding.url);
        read_opt(*it, "batch_size", c.embedding.batch_size);
        if (auto p = read_path(*it, "vectors", base_dir)) c.embedding.vectors_path = *p;
    }
    if (const auto it = j.find("reduce_cluster"); it != j.end()) read_reducer(*it, c.reduce_cluster);
    if (const auto it = j.find("reduce_plot"); it != j.end()) read_reducer(*it, c.reduce_plot);
    if (const auto it = j.find("cluster"); it != j.end()) {
        read_opt(*it, "min_cluster_size", c.clusterer.min_cluster_size);
        read_opt(*it, "min_samples", c.clusterer.min_samples);
        std::string sel;
        read_opt(*it, "selection", sel);
        if (sel == "leaf") c.clusterer.selection = Selection::Leaf;
        else if (!sel.empty() && sel != "eom") throw ConfigError(fmt::format("unknown cluster selection '{}'", sel));
    }
    if (const auto it = j.find("labeler"); it != j.end()) {
        std::string m;
        read_opt(*it, "mode", m);
        if (!m.empty()) {
            const auto mode_kind = parse_labeler_mode(m);
            if (!mode_kind) throw ConfigError(fmt::format("unknown labeler '{}'", m));
            c.labeler.options.mode = *mode_kind;
        }
        read_opt(*it, "theta", c.labeler.options.theta);
        read_opt(*it, "top_terms", c.labeler.summary.top_terms);
        read_opt(*it, "samples", c.labeler.summary.samples);
        if (auto p = read_path(*it, "replay_dir", base_dir)) c.labeler.replay_dir = *p;
        read_opt(*it, "endpoint", c.labeler.endpoint);
        read_opt(*it, "model", c.labeler.model);
        read_opt(*it, "api_key_env", c.labeler.api_key_env);
        if (auto p = read_path(*it, "prompt", base_dir)) c.labeler.prompt_path = *p;
    }
    std::string out;
    read_opt(j, "output_dir", out);
    if (!out.empty()) c.output_dir = resolve(base_dir, out);
    read_opt(j, "seed", c.seed);
    return c;
}

ordered_json RunConfig::to_json() const {
    ordered_json j;
    j["corpus"] = path_string(corpus);
    if (search) {
        ordered_json s;
        ordered_json chans = ordered_json::array();
        for (const auto& ch : search->channels) chans.push_back({{"channel", ch.channel.name}, {"channel_id", ch.channel_id}});
        s["channels"] = std::move(chans);
        s["query_terms"] = search->query_terms;
        s["window"] = {{"start", format_date(search->window.start)}, {"end", format_date(search->window.end)}};
        s["api_key_env"] = search->api_key_env;
        s["max_pages_per_query"] = search->max_pages_per_query;
        j["search"] = std::move(s);
    }
    j["max_concurrency"] = max_concurrency;
    j["fixture_dir"] = path_string(fixture_dir);
    j["taxonomy"] = path_string(taxonomy);
    j["stopwords"] = path_string(stopwords);
    j["keyword_count_mode"] = keyword_mode == CountMode::Comments ? "comments" : "occurrences";
    j["embedding"] = {{"provider", provider_kind_name(embedding.provider)},
                      {"dim", embedding.fallback.dim},
                      {"ngram_min", embedding.fallback.ngram_min},
                      {"ngram_max", embedding.fallback.ngram_max},
                      {"vectors", embedding.vectors_path.generic_string()},
                      {"url", embedding.url},
                      {"batch_size", embedding.batch_size}};
    j["reduce_cluster"] = reducer_json(reduce_cluster);
    j["reduce_plot"] = reducer_json(reduce_plot);
    j["cluster"] = {{"min_cluster_size", clusterer.min_cluster_size},
                    {"min_samples", clusterer.effective_min_samples()},
                    {"selection", clusterer.selection == Selection::Leaf ? "leaf" : "eom"}};
    j["labeler"] = {{"mode", labeler_mode_name(labeler.options.mode)},
                    {"theta", labeler.options.theta},
                    {"top_terms", labeler.summary.top_terms},
                    {"samples", labeler.summary.samples},
                    {"replay_dir", labeler.replay_dir.generic_string()},
                    {"endpoint", labeler.endpoint},
                    {"model", labeler.model},
                    {"api_key_env", labeler.api_key_env},
                    {"prompt", labeler.prompt_path.generic_string()}};
    j["seed"] = seed;
    return j;
}

void RunConfig::validate() const {
    auto must_exist = [](const fs::path& p, std::string_view what) {
        if (!fs::exists(p)) throw ConfigError(fmt::format("{} not found: {}", what, p.string()));
    };
    if (corpus.has_value() == search.has_value())
        throw ConfigError("config must set exactly one of 'corpus' and 'search'");
    if (corpus) must_exist(*corpus, "corpus file");
    if (search) search->validate();
    if (fixture_dir) must_exist(*fixture_dir, "fixture directory");
    if (taxonomy) must_exist(*taxonomy, "taxonomy file");
    if (stopwords) must_exist(*stopwords, "stopword file");
    if (embedding.provider == ProviderKind::Precomputed) {
        if (embedding.vectors_path.empty()) throw ConfigError("precomputed provider needs 'embedding.vectors'");
        must_exist(embedding.vectors_path, "embedding vector file");
    }
    if (embedding.provider == ProviderKind::Remote && embedding.url.empty())
        throw ConfigError("remote provider needs 'embedding.url'");
    if (embedding.provider == ProviderKind::Fallback) embedding.fallback.validate();
    if (!labeler.prompt_path.empty()) must_exist(labeler.prompt_path, "prompt template");
    if (labeler.options.mode != LabelerMode::Fallback && labeler.replay_dir.empty() && labeler.endpoint.empty())
        throw ConfigError("llm labeling needs 'labeler.replay_dir' or 'labeler.endpoint'");
    if (!(labeler.options.theta >= 0.0 && labeler.options.theta <= 1.0))
        throw ConfigError(fmt::format("labeler theta must lie in [0, 1], got {}", labeler.options.theta));
    clusterer.validate();
    for (const auto* r : {&reduce_cluster, &reduce_plot}) {
        if (r->n_neighbors < 2) throw ConfigError("n_neighbors must be >= 2");
        if (r->n_components < 1) throw ConfigError("n_components must be >= 1");
        if (!(r->min_dist >= 0.0 && r->min_dist < r->spread)) throw ConfigError("need 0 <= min_dist < spread");
    }
    if (output_dir.empty()) throw ConfigError("output directory is empty");
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("config file not found: {}", path.string()));
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("config file {} is not valid JSON: {}", path.string(), e.what()));
    }
    return RunConfig::from_json(j, path.parent_path());
}

// ---- stages ----

std::optional<Stage> parse_stage(std::string_view s) {
    for (Stage st : {Stage::Fetch, Stage::Dedupe, Stage::Keywords, Stage::Embed, Stage::Reduce, Stage::Cluster,
                     Stage::Label, Stage::Stats, Stage::Report, Stage::Run})
        if (stage_name(st) == s) return st;
    return std::nullopt;
}

std::string_view stage_name(Stage s) {
    switch (s) {
        case Stage::Fetch: return "fetch";
        case Stage::Dedupe: return "dedupe";
        case Stage::Keywords: return "keywords";
        case Stage::Embed: return "embed";
        case Stage::Reduce: return "reduce";
        case Stage::Cluster: return "cluster";
        case Stage::Label: return "label";
        case Stage::Stats: return "stats";
        case Stage::Report: return "report";
        case Stage::Run: return "run";
    }
    return "run";
}

std::vector<Stage> pipeline_stages() {
    return {Stage::Fetch, Stage::Dedupe, Stage::Keywords, Stage::Embed, Stage::Reduce,
            Stage::Cluster, Stage::Label, Stage::Stats, Stage::Report};
}

ordered_json RunManifest::to_json() const {
    ordered_json j;
    j["tool_version"] = kToolVersion;
    j["status"] = status;
    if (!failed_stage.empty()) {
        j["failed_stage"] = failed_stage;
        j["error"] = error;
    }
    j["seed"] = config.contains("seed") ? config["seed"] : ordered_json(nullptr);
    j["completed_stages"] = completed_stages;
    const auto& c = counts;
    j["counts"] = {{"videos", c.videos},
                   {"raw_comments", c.raw_comments},
                   {"deduped", c.deduped},
                   {"out_of_window", c.out_of_window},
                   {"embedded", c.embedded},
                   {"degenerate", c.degenerate},
                   {"clustered", c.clustered},
                   {"noise", c.noise},
                   {"clusters", c.clusters},
                   {"labeled", c.labeled},
                   {"excluded_new_category", c.excluded_new_category},
                   {"excluded_unlabeled", c.excluded_unlabeled},
                   {"excluded", c.excluded}};
    ordered_json sums = ordered_json::object();
    for (const auto& [name, hash] : checksums) sums[name] = hash;
    j["input_checksums"] = std::move(sums);
    j["config"] = config;
    return j;
}

namespace {

struct AssignmentRecord {
    std::string comment_id;
    int label = kNoise;
    Channel channel;
    DayIndex day = 0;
    double x2d = 0.0;
    double y2d = 0.0;
};

std::string assignment_csv(const std::vector<AssignmentRecord>& rows) {
    std::string out = "comment_id,label,channel,day,x2d,y2d\n";
    for (const auto& r : rows)
        out += fmt::format("{},{},{},{},{:.6f},{:.6f}\n", csv_field(r.comment_id), r.label, csv_field(r.channel.name),
                           r.day, r.x2d, r.y2d);
    return out;
}

std::vector<AssignmentRecord> parse_assignment_csv(std::string_view text) {
    std::vector<AssignmentRecord> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 6) throw SchemaError("assignment row must have 6 fields", line_no);
        try {
            rows.push_back({f[0], std::stoi(f[1]), Channel{f[2]}, std::stoi(f[3]), std::stod(f[4]), std::stod(f[5])});
        } catch (const std::logic_error&) {
            throw SchemaError("malformed number in assignment row", line_no);
        }
    }
    return rows;
}

ordered_json decision_json(const LabelDecision& d, const ClusterSummary& s) {
    ordered_json terms = ordered_json::array();
    for (const auto& t : s.top_terms) terms.push_back({{"term", t.term}, {"score", std::stod(fmt::format("{:.6f}", t.score))}});
    return {{"cluster_id", d.cluster_id}, {"size", s.size},           {"outcome", outcome_name(d.outcome)},
            {"name", d.name},             {"source", source_name(d.source)}, {"raw_response", d.raw_response},
            {"top_terms", std::move(terms)}};
}

std::vector<LabelDecision> parse_decisions(std::string_view text) {
    std::vector<LabelDecision> out;
    try {
        const json j = json::parse(text);
        for (const auto& d : j.at("decisions")) {
            LabelDecision x;
            x.cluster_id = d.at("cluster_id").get<int>();
            const auto outcome = d.at("outcome").get<std::string>();
            x.outcome = outcome == "predefined"     ? LabelOutcome::Predefined
                        : outcome == "new_category" ? LabelOutcome::NewCategory
                                                    : LabelOutcome::Unlabeled;
            x.name = d.at("name").get<std::string>();
            x.source = d.at("source").get<std::string>() == "llm" ? LabelSource::Llm : LabelSource::Fallback;
            x.raw_response = d.at("raw_response").get<std::string>();
            out.push_back(std::move(x));
        }
    } catch (const json::exception& e) {
        throw SchemaError(fmt::format("labels file: {}", e.what()));
    }
    return out;
}

/// Deduplicated comments that are analyzed (in window), in corpus order.
std::vector<std::size_t> analyzed_comments(const Corpus& corpus) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < corpus.comments.size(); ++i)
        if (!corpus.comments[i].out_of_window) out.push_back(i);
    return out;
}

EmbeddingMatrix subset(const EmbeddingMatrix& m, const std::vector<std::size_t>& rows) {
    EmbeddingMatrix out;
    out.provider_name = m.provider_name;
    out.rows = DenseMatrix(rows.size(), m.dim());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.ids.push_back(m.ids[rows[r]]);
        std::copy(m.rows.row(rows[r]).begin(), m.rows.row(rows[r]).end(), out.rows.row(r).begin());
    }
    return out;
}

std::string read_optional_text(const std::optional<fs::path>& p, std::string_view fallback) {
    return p ? read_text_file(*p) : std::string(fallback);
}

}  // namespace

Pipeline::Pipeline(RunConfig cfg, PipelineServices services) : cfg_(std::move(cfg)), services_(std::move(services)) {
    cfg_.validate();
    const std::string stop_text = read_optional_text(cfg_.stopwords, resources::default_stopwords_text());
    stopwords_ = parse_stopwords(stop_text, cfg_.stopwords ? cfg_.stopwords->string() : "default");
    const std::string tax_text = read_optional_text(cfg_.taxonomy, resources::default_taxonomy_json());
    taxonomy_ = parse_taxonomy(tax_text, stopwords_);
    if (!cfg_.labeler.prompt_path.empty()) cfg_.labeler.options.prompt_template = read_text_file(cfg_.labeler.prompt_path);

    // Stage seeds derive from the global seed through named streams.
    cfg_.reduce_cluster.seed = stream_key(cfg_.seed, "reduce:cluster");
    cfg_.reduce_plot.seed = stream_key(cfg_.seed, "reduce:plot");

    manifest_.config = cfg_.to_json();
    manifest_.checksums.emplace_back("config", sha256_hex(manifest_.config.dump()));
    manifest_.checksums.emplace_back("taxonomy", sha256_hex(tax_text));
    manifest_.checksums.emplace_back("stopwords", sha256_hex(stop_text));
    if (cfg_.corpus) manifest_.checksums.emplace_back("corpus", sha256_hex(read_text_file(*cfg_.corpus)));
}

ChatClient& Pipeline::chat_client() {
    if (!services_.chat) {
        std::shared_ptr<ChatClient> live;
        if (!cfg_.labeler.endpoint.empty()) {
            const char* key = std::getenv(cfg_.labeler.api_key_env.c_str());
            live = std::make_shared<RemoteChatClient>(
                ChatEndpoint{cfg_.labeler.endpoint, cfg_.labeler.model, key ? key : ""});
        }
        if (!cfg_.labeler.replay_dir.empty())
            services_.chat = std::make_shared<ReplayChatClient>(cfg_.labeler.replay_dir, live);
        else
            services_.chat = live;
    }
    return *services_.chat;
}

EmbeddingProvider& Pipeline::embedder() {
    if (!services_.embedder) {
        switch (cfg_.embedding.provider) {
            case ProviderKind::Fallback:
                services_.embedder = std::make_shared<FallbackProvider>(cfg_.embedding.fallback);
                break;
            case ProviderKind::Precomputed:
                services_.embedder = std::make_shared<PrecomputedProvider>(cfg_.embedding.vectors_path);
                break;
            case ProviderKind::Remote:
                services_.embedder = std::make_shared<RemoteProvider>(cfg_.embedding.url, cfg_.embedding.dim,
                                                                      cfg_.embedding.batch_size);
                break;
        }
    }
    return *services_.embedder;
}

void Pipeline::stage_fetch() {
    Corpus corpus;
    if (cfg_.corpus) {
        corpus = load_corpus(*cfg_.corpus);
    } else {
        std::shared_ptr<HttpTransport> transport = services_.transport;
        if (!transport) {
            if (cfg_.fixture_dir) {
                transport = std::make_shared<FixtureTransport>(*cfg_.fixture_dir);
            } else {
                const char* key = std::getenv(cfg_.search->api_key_env.c_str());
                if (key == nullptr || *key == '\0')
                    throw ConfigError(fmt::format("environment variable {} is not set", cfg_.search->api_key_env));
                transport = std::make_shared<LiveTransport>(key);
            }
        }
        IngestOptions opts{cfg_.author_salt, cfg_.max_concurrency};
        auto result = ingest(*cfg_.search, *transport, opts);
        for (const auto& v : result.skipped_videos) spdlog::warn("skipped video {}: comments disabled", v);
        corpus = std::move(result.corpus);
    }
    flag_out_of_window(corpus);
    store_corpus(corpus, work_file(work::kRawCorpus));
}

void Pipeline::stage_dedupe() {
    Corpus corpus = load_corpus(work_file(work::kRawCorpus));
    corpus.comments = dedupe(std::move(corpus.comments));
    flag_out_of_window(corpus);
    validate_corpus(corpus);
    store_corpus(corpus, work_file(work::kCorpus));
}

void Pipeline::stage_keywords() {
    const Corpus corpus = load_corpus(work_file(work::kCorpus));
    const SalienceTable table = salience_table_keywords(corpus, taxonomy_, stopwords_, cfg_.keyword_mode);
    write_text_file(work_file(work::kKeywordCounts), counts_csv(table));
}

void Pipeline::stage_embed() {
    const Corpus corpus = load_corpus(work_file(work::kCorpus));
    std::vector<EmbedItem> items;
    for (const auto i : analyzed_comments(corpus)) items.push_back({corpus.comments[i].comment_id, corpus.comments[i].text});
    EmbeddingMatrix m = embed_batch(embedder(), items);
    quantize_to_float(m.rows);
    write_vector_file(work_file(work::kEmbeddings), m);
}

void Pipeline::stage_reduce() {
    const EmbeddingMatrix all = read_vector_file(work_file(work::kEmbeddings));
    const auto zero = zero_rows(all.rows);
    std::vector<std::size_t> keep;
    for (std::size_t r = 0, z = 0; r < all.size(); ++r) {
        if (z < zero.size() && zero[z] == r) {
            ++z;
            continue;
        }
        keep.push_back(r);
    }
    const EmbeddingMatrix input = subset(all, keep);
    for (const auto* rc : {&cfg_.reduce_cluster, &cfg_.reduce_plot}) {
        LayoutEmbedding layout = reduce(input, *rc);
        quantize_to_float(layout.coords);
        write_vector_file(work_file(rc == &cfg_.reduce_cluster ? work::kLayout5d : work::kLayout2d),
                          layout_as_matrix(layout));
    }
}

void Pipeline::stage_cluster() {
    const Corpus corpus = load_corpus(work_file(work::kCorpus));
    const EmbeddingMatrix space = read_vector_file(work_file(work::kLayout5d));
    const EmbeddingMatrix plot = read_vector_file(work_file(work::kLayout2d));
    if (plot.ids != space.ids || plot.dim() < 2) throw SchemaError("cluster and plot layouts disagree on their rows");
    const ClusterAssignment a = cluster(space.rows, space.ids, cfg_.clusterer);

    std::unordered_map<std::string_view, const Comment*> by_id;
    for (const auto& c : corpus.comments) by_id.emplace(c.comment_id, &c);
    std::vector<AssignmentRecord> rows;
    rows.reserve(a.ids.size());
    for (std::size_t i = 0; i < a.ids.size(); ++i) {
        const auto it = by_id.find(a.ids[i]);
        if (it == by_id.end()) throw SchemaError(fmt::format("layout row {} is not in the corpus", a.ids[i]));
        rows.push_back({a.ids[i], a.labels[i], it->second->channel, day_index(it->second->published_at, corpus.window),
                        plot.rows(i, 0), plot.rows(i, 1)});
    }
    write_text_file(work_file(work::kAssignment), assignment_csv(rows));
}

void Pipeline::stage_label() {
    const Corpus corpus = load_corpus(work_file(work::kCorpus));
    const EmbeddingMatrix space = read_vector_file(work_file(work::kLayout5d));
    const auto records = parse_assignment_csv(read_text_file(work_file(work::kAssignment)));
    if (records.size() != space.size()) throw SchemaError("assignment and layout differ in length");

    std::unordered_map<std::string_view, const Comment*> by_id;
    for (const auto& c : corpus.comments) by_id.emplace(c.comment_id, &c);
    ClusterAssignment a;
    a.config = cfg_.clusterer;
    std::vector<TokenList> docs;
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].comment_id != space.ids[i]) throw SchemaError("assignment and layout rows are out of order");
        const Comment& c = *by_id.at(records[i].comment_id);
        a.ids.push_back(records[i].comment_id);
        a.labels.push_back(records[i].label);
        a.cluster_count = std::max(a.cluster_count, records[i].label + 1);
        docs.push_back(normalize(c.text, stopwords_));
        texts.push_back(c.text);
    }
    const auto summaries = summarize_clusters(a, docs, texts, space.rows, cfg_.labeler.summary);
    ChatClient* client = cfg_.labeler.options.mode == LabelerMode::Fallback ? nullptr : &chat_client();
    const auto decisions = label_clusters(summaries, taxonomy_, cfg_.labeler.options, client);
    ordered_json out;
    out["labeler"] = labeler_mode_name(cfg_.labeler.options.mode);
    out["decisions"] = ordered_json::array();
    for (std::size_t k = 0; k < decisions.size(); ++k) out["decisions"].push_back(decision_json(decisions[k], summaries[k]));
    write_text_file(work_file(work::kLabels), out.dump(2) + "\n");
}

void Pipeline::stage_stats() {
    const Corpus corpus = load_corpus(work_file(work::kCorpus));
    const EmbeddingMatrix emb = read_vector_file(work_file(work::kEmbeddings));
    const auto records = parse_assignment_csv(read_text_file(work_file(work::kAssignment)));
    const auto decisions = parse_decisions(read_text_file(work_file(work::kLabels)));

    ClusterAssignment a;
    for (const auto& r : records) {
        a.ids.push_back(r.comment_id);
        a.labels.push_back(r.label);
        a.cluster_count = std::max(a.cluster_count, r.label + 1);
    }
    const FilteredAssignment filtered = filter_offtopic(a, decisions, taxonomy_);

    std::unordered_map<std::string_view, std::size_t> index_of;
    for (std::size_t i = 0; i < corpus.comments.size(); ++i) index_of.emplace(corpus.comments[i].comment_id, i);
    std::vector<std::size_t> comment_index;
    for (const auto& id : a.ids) comment_index.push_back(index_of.at(id));
    const SalienceTable table = salience_table_clusters(filtered.issue, comment_index, corpus, taxonomy_.issue_names());
    write_text_file(work_file(work::kClusterCounts), counts_csv(table));

    // Every deduplicated comment is either issue-labeled or excluded with exactly one reason.
    std::map<std::size_t, std::string> reasons;
    for (std::size_t i = 0; i < corpus.comments.size(); ++i)
        if (corpus.comments[i].out_of_window) reasons[i] = "out_of_window";
    for (const auto z : zero_rows(emb.rows)) reasons[index_of.at(emb.ids[z])] = "degenerate_text";
    for (const auto& e : filtered.excluded) reasons[comment_index[e.index]] = e.reason;
    std::vector<ExcludedRow> excluded;
    for (const auto& [i, reason] : reasons) excluded.push_back({corpus.comments[i].comment_id, reason});
    write_text_file(work_file(work::kExcluded), excluded_csv(excluded));
}

void Pipeline::stage_report() {
    const Corpus corpus = load_corpus(work_file(work::kCorpus));
    const auto issues = taxonomy_.issue_names();
    ReportData data;
    data.keyword = parse_counts_csv(read_text_file(work_file(work::kKeywordCounts)), Method::Keyword, issues);
    data.cluster = parse_counts_csv(read_text_file(work_file(work::kClusterCounts)), Method::Cluster, issues);
    data.stats = compute_stats(data.keyword, data.cluster);
    data.window_days = corpus.window.length_days();
    data.seed = cfg_.seed;

    const auto decisions = parse_decisions(read_text_file(work_file(work::kLabels)));
    std::map<int, const LabelDecision*> by_cluster;
    for (const auto& d : decisions) by_cluster[d.cluster_id] = &d;
    for (const auto& r : parse_assignment_csv(read_text_file(work_file(work::kAssignment)))) {
        std::string issue;
        if (const auto it = by_cluster.find(r.label);
            it != by_cluster.end() && it->second->outcome == LabelOutcome::Predefined)
            issue = it->second->name;
        data.clusters.push_back({r.comment_id, r.label, issue, r.channel, r.day, r.x2d, r.y2d});
    }
    std::istringstream ex(read_text_file(work_file(work::kExcluded)));
    std::string line;
    std::getline(ex, line);
    while (std::getline(ex, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 2) throw SchemaError("excluded row must have 2 fields");
        data.excluded.push_back({f[0], f[1]});
    }
    emit_reports(data, cfg_.output_dir);
}

bool Pipeline::outputs_exist(Stage s) const {
    auto has = [&](std::string_view f) { return fs::exists(work_file(f)); };
    switch (s) {
        case Stage::Fetch: return has(work::kRawCorpus);
        case Stage::Dedupe: return has(work::kCorpus);
        case Stage::Keywords: return has(work::kKeywordCounts);
        case Stage::Embed: return has(work::kEmbeddings);
        case Stage::Reduce: return has(work::kLayout5d) && has(work::kLayout2d);
        case Stage::Cluster: return has(work::kAssignment);
        case Stage::Label: return has(work::kLabels);
        case Stage::Stats: return has(work::kClusterCounts) && has(work::kExcluded);
        case Stage::Report: {
            for (const auto& f : report_files())
                if (!fs::exists(cfg_.output_dir / f)) return false;
            return true;
        }
        case Stage::Run: return false;
    }
    return false;
}

void Pipeline::run_stage(Stage s) {
    spdlog::info("stage {}", stage_name(s));
    switch (s) {
        case Stage::Fetch: stage_fetch(); break;
        case Stage::Dedupe: stage_dedupe(); break;
        case Stage::Keywords: stage_keywords(); break;
        case Stage::Embed: stage_embed(); break;
        case Stage::Reduce: stage_reduce(); break;
        case Stage::Cluster: stage_cluster(); break;
        case Stage::Label: stage_label(); break;
        case Stage::Stats: stage_stats(); break;
        case Stage::Report: stage_report(); break;
        case Stage::Run: break;
    }
}

namespace {

/// Stage counts derived from whatever work files exist.
StageCounts collect_counts(const fs::path& work_dir) {
    StageCounts c;
    auto has = [&](std::string_view f) { return fs::exists(work_dir / f); };
    if (has(work::kRawCorpus)) {
        const Corpus raw = load_corpus(work_dir / work::kRawCorpus);
        c.videos = raw.videos.size();
        c.raw_comments = raw.comments.size();
    }
    if (has(work::kCorpus)) {
        const Corpus corpus = load_corpus(work_dir / work::kCorpus);
        c.deduped = corpus.comments.size();
        c.out_of_window = count_corpus(corpus).out_of_window;
    }
    if (has(work::kEmbeddings)) {
        const EmbeddingMatrix m = read_vector_file(work_dir / work::kEmbeddings);
        c.degenerate = zero_rows(m.rows).size();
        c.embedded = m.size() - c.degenerate;
    }
    if (has(work::kAssignment)) {
        std::set<int> labels;
        for (const auto& r : parse_assignment_csv(read_text_file(work_dir / work::kAssignment))) {
            if (r.label == kNoise) {
                ++c.noise;
            } else {
                ++c.clustered;
                labels.insert(r.label);
            }
        }
        c.clusters = labels.size();
    }
    if (has(work::kExcluded)) {
        std::istringstream in(read_text_file(work_dir / work::kExcluded));
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto f = split_csv_line(line);
            ++c.excluded;
            if (f.size() == 2 && f[1].starts_with("new_category:")) ++c.excluded_new_category;
            if (f.size() == 2 && f[1] == "unlabeled") ++c.excluded_unlabeled;
        }
        c.labeled = c.deduped - c.excluded;
    }
    return c;
}

}  // namespace

RunManifest Pipeline::run(Stage stage, bool resume) {
    const std::vector<Stage> stages = stage == Stage::Run ? pipeline_stages() : std::vector<Stage>{stage};
    fs::create_directories(work_dir());
    manifest_.completed_stages.clear();
    manifest_.status = "ok";
    manifest_.failed_stage.clear();
    manifest_.error.clear();
    auto write_manifest = [&] {
        try {
            manifest_.counts = collect_counts(work_dir());
        } catch (const Error& e) {
            spdlog::warn("manifest counts incomplete: {}", e.what());
        }
        write_text_file(cfg_.output_dir / "manifest.json", manifest_.to_json().dump(2) + "\n");
    };
    for (Stage s : stages) {
        if (resume && outputs_exist(s)) {
            spdlog::info("stage {} already complete", stage_name(s));
            continue;
        }
        try {
            run_stage(s);
        } catch (const std::exception& e) {
            manifest_.status = "FAILED";
            manifest_.failed_stage = std::string(stage_name(s));
            manifest_.error = e.what();
            spdlog::error("stage {} failed: {}", stage_name(s), e.what());
            write_manifest();
            throw;
        }
        manifest_.completed_stages.emplace_back(stage_name(s));
    }
    write_manifest();
    return manifest_;
}

RunManifest run_pipeline(const RunConfig& cfg) { return Pipeline(cfg).run(Stage::Run); }

}  // namespace salience
