#pragma once

#include "bibcoup/catalog.hpp"
#include "bibcoup/expand.hpp"
#include "bibcoup/ingest.hpp"
#include "bibcoup/layout.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bibcoup {

enum class Stage {
    extract,
    expand,
    catalog,
    matrix,
    couple,
    communities,
    layout,
    report,
    all,
};

const char* to_string(Stage s);
std::optional<Stage> stage_from_string(const std::string& name);

/// Everything a pipeline run needs, loaded from a sectioned key=value config
/// file; CLI flags override individual keys after loading. Relative paths
/// resolve against the config file's directory.
struct PipelineConfig {
    // [inputs]
    std::string messages_path;
    std::string channels_path;
    std::string catalog_path;        // may be empty when harvesting
    std::string public_suffix_path;  // empty: built-in rule subset
    std::string shorteners_path;     // empty: built-in defaults
    std::string exceptions_path;     // empty: the five Google hostnames

    // [fields]
    FieldMapping mapping;

    // [params]
    std::size_t top_k_channels = 10000;
    std::size_t exclude_top_sources = 5;
    std::uint32_t min_bcf = 2;
    double min_share = 0.01;
    std::uint64_t seed = 42;
    double resolution = 1.0;
    int layout_iterations = 1000;
    bool assume_broadcast = true;
    bool naive_sld = false;
    bool catalog_only = true;
    bool keep_isolates = false;
    std::size_t per_source_cap = 0;
    std::size_t report_top_n = 50;
    double node_size_min = 4.0;
    double node_size_max = 24.0;
    LayoutParams layout;
    ExpansionPolicy expansion;
    HarvestPolicy harvest;

    // [output]
    std::string out_dir = "out";

    static PipelineConfig from_file(const std::string& path);
    void validate() const;  // throws ValidationError listing offending keys
};

/// Environment variable naming the catalog harvest endpoint base URL, used
/// by the catalog stage when no catalog input file is configured.
extern const char* kCatalogEndpointEnv;

struct StageOutcome {
    Stage stage;
    bool skipped = false;  // inputs and params unchanged, outputs present
    std::int64_t elapsed_ms = 0;
};

/// Runs one stage (or the whole chain for Stage::all) against the config's
/// output directory. Acquires the directory lock for the duration. Reruns
/// with unchanged inputs and parameters are hash-checked no-ops.
std::vector<StageOutcome> run_pipeline(const PipelineConfig& config,
                                       Stage stage);

}  // namespace bibcoup
