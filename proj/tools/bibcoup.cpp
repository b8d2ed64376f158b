#include "bibcoup/common.hpp"
#include "bibcoup/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> min_bcf;
    std::optional<std::size_t> top_k;
    std::optional<std::size_t> exclude_top;
    std::optional<bool> assume_broadcast;
    bool naive_sld = false;
    bool keep_isolates = false;
    std::optional<double> min_share;
    std::optional<double> resolution;
    std::optional<int> iterations;
    std::optional<std::string> out_dir;
};

void apply(const Overrides& o, bibcoup::PipelineConfig& cfg) {
    if (o.seed) cfg.seed = *o.seed;
    if (o.min_bcf) cfg.min_bcf = *o.min_bcf;
    if (o.top_k) cfg.top_k_channels = *o.top_k;
    if (o.exclude_top) cfg.exclude_top_sources = *o.exclude_top;
    if (o.assume_broadcast) cfg.assume_broadcast = *o.assume_broadcast;
    if (o.naive_sld) cfg.naive_sld = true;
    if (o.keep_isolates) cfg.keep_isolates = true;
    if (o.min_share) cfg.min_share = *o.min_share;
    if (o.resolution) cfg.resolution = *o.resolution;
    if (o.iterations) cfg.layout_iterations = *o.iterations;
    if (o.out_dir) cfg.out_dir = *o.out_dir;
}

int run(bibcoup::Stage stage, const std::string& config_path,
        const Overrides& overrides) {
    bibcoup::PipelineConfig cfg =
        bibcoup::PipelineConfig::from_file(config_path);
    apply(overrides, cfg);
    const auto outcomes = bibcoup::run_pipeline(cfg, stage);
    for (const auto& outcome : outcomes) {
        std::cerr << "[bibcoup] " << bibcoup::to_string(outcome.stage)
                  << (outcome.skipped ? " skipped" : " completed") << " in "
                  << outcome.elapsed_ms << " ms\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "bibcoup: mines coalitions of channels that cite shared knowledge "
        "sources from message-platform archives"};
    app.require_subcommand(1);

    std::string config_path = "pipeline.conf";
    Overrides overrides;
    app.add_option("-c,--config", config_path, "pipeline config file")
        ->capture_default_str();
    app.add_option("--seed", overrides.seed,
                   "seed for community detection and layout");
    app.add_option("--min-bcf", overrides.min_bcf,
                   "minimum coupling frequency for graph edges");
    app.add_option("--top-k", overrides.top_k,
                   "number of channels to select");
    app.add_option("--exclude-top", overrides.exclude_top,
                   "most-cited sources to drop from the matrix");
    app.add_option("--assume-broadcast", overrides.assume_broadcast,
                   "broadcast default when the dump has no such field");
    app.add_flag("--naive-sld", overrides.naive_sld,
                 "literal two-label domains instead of public-suffix rules");
    app.add_flag("--keep-isolates", overrides.keep_isolates,
                 "retain nodes with no edges after thresholding");
    app.add_option("--min-share", overrides.min_share,
                   "minimum node share for a main coalition");
    app.add_option("--resolution", overrides.resolution,
                   "modularity resolution");
    app.add_option("--iterations", overrides.iterations,
                   "layout iteration budget");
    app.add_option("-o,--out", overrides.out_dir, "output directory");

    for (bibcoup::Stage stage :
         {bibcoup::Stage::extract, bibcoup::Stage::expand,
          bibcoup::Stage::catalog, bibcoup::Stage::matrix,
          bibcoup::Stage::couple, bibcoup::Stage::communities,
          bibcoup::Stage::layout, bibcoup::Stage::report,
          bibcoup::Stage::all}) {
        app.add_subcommand(bibcoup::to_string(stage))->fallthrough();
    }

    CLI11_PARSE(app, argc, argv);

    const std::string stage_name = app.get_subcommands().front()->get_name();
    const auto stage = bibcoup::stage_from_string(stage_name);

    try {
        return run(*stage, config_path, overrides);
    } catch (const bibcoup::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const bibcoup::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 2;
    } catch (const bibcoup::NetworkError& e) {
        std::cerr << "network error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
