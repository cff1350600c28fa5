#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "salience/errors.hpp"
#include "salience/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;

int run(int argc, char** argv) {
    CLI::App app{"Issue salience from YouTube comments: keyword matching and embedding clusters."};
    std::string verb;
    std::string stage_flag;
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::string provider;
    std::string labeler;
    std::string fixture_dir;
    bool resume = false;
    bool verbose = false;

    app.add_option("verb", verb, "Stage to run: fetch, dedupe, keywords, embed, reduce, cluster, label, stats, report, run");
    app.add_option("--config", config_path, "Run configuration (JSON)")->required();
    app.add_option("--out", out_dir, "Output directory (overrides the config)");
    app.add_option("--seed", seed, "Global seed (overrides the config)");
    app.add_option("--provider", provider, "Embedding provider")->check(CLI::IsMember({"precomputed", "remote", "fallback"}));
    app.add_option("--labeler", labeler, "Cluster labeler")->check(CLI::IsMember({"llm", "fallback", "llm-with-fallback"}));
    app.add_option("--fixture-dir", fixture_dir, "Replay recorded YouTube responses from this directory");
    app.add_option("--stage", stage_flag, "Run one stage (same names as the verb)");
    app.add_flag("--resume", resume, "Skip stages whose outputs already exist");
    app.add_flag("-v,--verbose", verbose, "Log every stage");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }
    spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);
    spdlog::set_pattern("%l: %v");

    if (!verb.empty() && !stage_flag.empty() && verb != stage_flag) {
        std::cerr << "error: verb '" << verb << "' conflicts with --stage '" << stage_flag << "'\n";
        return kExitConfig;
    }
    const std::string stage_text = !stage_flag.empty() ? stage_flag : (verb.empty() ? "run" : verb);
    const auto stage = salience::parse_stage(stage_text);
    if (!stage) {
        std::cerr << "error: unknown stage '" << stage_text << "'\n";
        return kExitConfig;
    }

    try {
        salience::RunConfig cfg = salience::load_run_config(config_path);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed) cfg.seed = *seed;
        if (!provider.empty()) cfg.embedding.provider = *salience::parse_provider_kind(provider);
        if (!labeler.empty()) cfg.labeler.options.mode = *salience::parse_labeler_mode(labeler);
        if (!fixture_dir.empty()) cfg.fixture_dir = fixture_dir;

        salience::Pipeline pipeline(std::move(cfg));
        const auto manifest = pipeline.run(*stage, resume);
        const auto& c = manifest.counts;
        std::cout << "stages: ";
        for (std::size_t i = 0; i < manifest.completed_stages.size(); ++i)
            std::cout << (i ? "," : "") << manifest.completed_stages[i];
        std::cout << "\ncomments: raw " << c.raw_comments << ", deduped " << c.deduped << ", labeled " << c.labeled
                  << ", excluded " << c.excluded << "\noutputs: " << pipeline.config().output_dir.string() << "\n";
        return 0;
    } catch (const salience::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return salience::exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
