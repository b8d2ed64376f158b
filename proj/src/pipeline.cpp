#include "bibcoup/pipeline.hpp"

#include "bibcoup/common.hpp"
#include "bibcoup/communities.hpp"
#include "bibcoup/coupling.hpp"
#include "bibcoup/domain.hpp"
#include "bibcoup/matrix.hpp"
#include "bibcoup/reporting.hpp"
#include "bibcoup/url_extract.hpp"

#include <json.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace bibcoup {

namespace fs = std::filesystem;
using nlohmann::json;

const char* kCatalogEndpointEnv = "BIBCOUP_CATALOG_ENDPOINT";

const char* to_string(Stage s) {
    switch (s) {
        case Stage::extract: return "extract";
        case Stage::expand: return "expand";
        case Stage::catalog: return "catalog";
        case Stage::matrix: return "matrix";
        case Stage::couple: return "couple";
        case Stage::communities: return "communities";
        case Stage::layout: return "layout";
        case Stage::report: return "report";
        case Stage::all: return "all";
    }
    return "unknown";
}

std::optional<Stage> stage_from_string(const std::string& name) {
    for (Stage s : {Stage::extract, Stage::expand, Stage::catalog,
                    Stage::matrix, Stage::couple, Stage::communities,
                    Stage::layout, Stage::report, Stage::all}) {
        if (name == to_string(s)) return s;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Config file

namespace {

class IniReader {
public:
    static IniReader parse(const std::string& path) {
        IniReader r;
        std::string section;
        std::size_t line_no = 0;
        for (const std::string& raw : read_lines(path)) {
            ++line_no;
            std::string line = trim(raw);
            if (line.empty() || line[0] == '#' || line[0] == ';') continue;
            if (line.front() == '[') {
                if (line.back() != ']') {
                    throw ValidationError("config line " +
                                          std::to_string(line_no) +
                                          ": malformed section header");
                }
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ValidationError("config line " + std::to_string(line_no) +
                                      ": expected key = value");
            }
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty()) {
                throw ValidationError("config line " + std::to_string(line_no) +
                                      ": empty key");
            }
            r.values_[section.empty() ? key : section + "." + key] = value;
        }
        return r;
    }

    std::optional<std::string> take(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        consumed_.insert(key);
        return it->second;
    }

    std::vector<std::string> unconsumed() const {
        std::vector<std::string> out;
        for (const auto& [key, value] : values_) {
            if (!consumed_.count(key)) out.push_back(key);
        }
        return out;
    }

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

struct ConfigParser {
    IniReader ini;
    std::vector<std::string> errors;

    void get(const std::string& key, std::string& out) {
        if (auto v = ini.take(key)) out = *v;
    }
    template <typename T>
    void get_number(const std::string& key, T& out) {
        auto v = ini.take(key);
        if (!v) return;
        std::istringstream ss(*v);
        T parsed{};
        ss >> parsed;
        if (ss.fail() || !ss.eof()) {
            errors.push_back(key + " (not a number: '" + *v + "')");
            return;
        }
        out = parsed;
    }
    void get_bool(const std::string& key, bool& out) {
        auto v = ini.take(key);
        if (!v) return;
        const std::string s = ascii_lower(*v);
        if (s == "true" || s == "1" || s == "yes") out = true;
        else if (s == "false" || s == "0" || s == "no") out = false;
        else errors.push_back(key + " (not a boolean: '" + *v + "')");
    }
};

std::string resolve_path(const fs::path& base, const std::string& p) {
    if (p.empty()) return p;
    fs::path path(p);
    if (path.is_absolute()) return path.lexically_normal().string();
    return (base / path).lexically_normal().string();
}

}  // namespace

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    ConfigParser p{IniReader::parse(path), {}};
    PipelineConfig c;

    p.get("inputs.messages", c.messages_path);
    p.get("inputs.channels", c.channels_path);
    p.get("inputs.catalog", c.catalog_path);
    p.get("inputs.public_suffix", c.public_suffix_path);
    p.get("inputs.shorteners", c.shorteners_path);
    p.get("inputs.exceptions", c.exceptions_path);

    p.get("fields.message_id", c.mapping.message_id_field);
    p.get("fields.message_text", c.mapping.message_text_field);
    p.get("fields.message_channel", c.mapping.message_channel_field);
    p.get("fields.message_timestamp", c.mapping.message_timestamp_field);
    p.get("fields.channel_id", c.mapping.channel_id_field);
    p.get("fields.channel_title", c.mapping.channel_title_field);
    p.get("fields.channel_description", c.mapping.channel_description_field);
    p.get("fields.channel_broadcast", c.mapping.channel_broadcast_field);

    p.get_number("params.top_k_channels", c.top_k_channels);
    p.get_number("params.exclude_top_sources", c.exclude_top_sources);
    p.get_number("params.min_bcf", c.min_bcf);
    p.get_number("params.min_share", c.min_share);
    p.get_number("params.seed", c.seed);
    p.get_number("params.resolution", c.resolution);
    p.get_number("params.layout_iterations", c.layout_iterations);
    p.get_bool("params.assume_broadcast", c.assume_broadcast);
    p.get_bool("params.naive_sld", c.naive_sld);
    p.get_bool("params.catalog_only", c.catalog_only);
    p.get_bool("params.keep_isolates", c.keep_isolates);
    p.get_number("params.per_source_cap", c.per_source_cap);
    p.get_number("params.report_top_n", c.report_top_n);
    p.get_number("params.node_size_min", c.node_size_min);
    p.get_number("params.node_size_max", c.node_size_max);
    p.get_number("params.attraction", c.layout.attraction);
    p.get_number("params.repulsion", c.layout.repulsion);
    p.get_number("params.gravity", c.layout.gravity);
    p.get_bool("params.linlog", c.layout.linlog);
    p.get_number("params.expand_timeout_s", c.expansion.timeout_s);
    p.get_number("params.expand_max_hops", c.expansion.max_hops);
    p.get_number("params.expand_politeness_ms", c.expansion.politeness_delay_ms);
    p.get_number("params.expand_concurrency", c.expansion.concurrency);
    p.get_number("params.harvest_page_size", c.harvest.page_size);
    p.get("params.harvest_field", c.harvest.field);

    p.get("output.dir", c.out_dir);

    for (const std::string& key : p.ini.unconsumed()) {
        p.errors.push_back(key + " (unknown key)");
    }
    if (!p.errors.empty()) {
        std::string msg = "invalid config keys: ";
        for (std::size_t i = 0; i < p.errors.size(); ++i) {
            if (i) msg += ", ";
            msg += p.errors[i];
        }
        throw ValidationError(msg);
    }

    const fs::path base = fs::path(path).parent_path();
    for (std::string* field :
         {&c.messages_path, &c.channels_path, &c.catalog_path,
          &c.public_suffix_path, &c.shorteners_path, &c.exceptions_path,
          &c.out_dir}) {
        *field = resolve_path(base, *field);
    }
    c.validate();
    return c;
}

void PipelineConfig::validate() const {
    std::vector<std::string> bad;
    if (top_k_channels < 1) bad.push_back("params.top_k_channels (>= 1)");
    if (min_bcf < 1) bad.push_back("params.min_bcf (>= 1)");
    if (min_share < 0.0 || min_share >= 1.0) {
        bad.push_back("params.min_share (in [0, 1))");
    }
    if (resolution <= 0.0) bad.push_back("params.resolution (> 0)");
    if (layout_iterations < 1) bad.push_back("params.layout_iterations (>= 1)");
    if (report_top_n < 1) bad.push_back("params.report_top_n (>= 1)");
    if (node_size_min > node_size_max) {
        bad.push_back("params.node_size_min (<= node_size_max)");
    }
    if (expansion.max_hops < 1) bad.push_back("params.expand_max_hops (>= 1)");
    if (expansion.concurrency < 1) {
        bad.push_back("params.expand_concurrency (>= 1)");
    }
    if (harvest.page_size < 1) bad.push_back("params.harvest_page_size (>= 1)");
    if (out_dir.empty()) bad.push_back("output.dir (required)");
    if (!bad.empty()) {
        std::string msg = "invalid config values: ";
        for (std::size_t i = 0; i < bad.size(); ++i) {
            if (i) msg += ", ";
            msg += bad[i];
        }
        throw ValidationError(msg);
    }
}

// ---------------------------------------------------------------------------
// Pipeline runner

namespace {

/// Exclusive ownership of an output directory via an O_EXCL lock file.
class DirectoryLock {
public:
    explicit DirectoryLock(const fs::path& dir) : path_(dir / ".lock") {
        fs::create_directories(dir);
        const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0) {
            throw ValidationError(
                "output directory is locked by another run (" +
                path_.string() + " exists); remove the lock file if stale");
        }
        const std::string pid = std::to_string(::getpid()) + "\n";
        [[maybe_unused]] ssize_t n = ::write(fd, pid.data(), pid.size());
        ::close(fd);
    }
    ~DirectoryLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    fs::path path_;
};

class Pipeline {
public:
    explicit Pipeline(const PipelineConfig& config) : cfg_(config) {}

    StageOutcome run(Stage stage) {
        const auto start = std::chrono::steady_clock::now();
        StageOutcome outcome{stage, false, 0};
        switch (stage) {
            case Stage::extract: outcome.skipped = extract(); break;
            case Stage::expand: outcome.skipped = expand(); break;
            case Stage::catalog: outcome.skipped = catalog(); break;
            case Stage::matrix: outcome.skipped = matrix(); break;
            case Stage::couple: outcome.skipped = couple(); break;
            case Stage::communities: outcome.skipped = communities(); break;
            case Stage::layout: outcome.skipped = layout(); break;
            case Stage::report: outcome.skipped = report(); break;
            case Stage::all: break;
        }
        outcome.elapsed_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start)
                .count();
        return outcome;
    }

private:
    const PipelineConfig& cfg_;

    fs::path stage_dir(const char* stage) const {
        return fs::path(cfg_.out_dir) / stage;
    }
    std::string artifact(const char* stage, const char* file) const {
        return (stage_dir(stage) / file).string();
    }

    /// Upstream artifact lookup with an error that names the producer.
    std::string require(const char* producer, const char* file,
                        const char* consumer) const {
        std::string path = artifact(producer, file);
        if (!fs::exists(path)) {
            throw ValidationError(std::string("stage '") + consumer +
                                  "' needs artifact '" + file +
                                  "'; run stage '" + producer + "' first");
        }
        return path;
    }

    json hash_inputs(const std::vector<std::string>& paths) const {
        json inputs = json::object();
        for (const std::string& p : paths) {
            if (!p.empty()) inputs[p] = sha256_file(p);
        }
        return inputs;
    }

    bool up_to_date(const char* stage, const json& inputs, const json& params,
                    const std::vector<std::string>& outputs) const {
        const fs::path manifest_path =
            stage_dir(stage) / (std::string(stage) + ".manifest.json");
        if (!fs::exists(manifest_path)) return false;
        json manifest =
            json::parse(read_text_file(manifest_path.string()), nullptr, false);
        if (manifest.is_discarded()) return false;
        if (manifest.value("inputs", json::object()) != inputs) return false;
        if (manifest.value("params", json::object()) != params) return false;
        for (const std::string& f : outputs) {
            if (!fs::exists(stage_dir(stage) / f)) return false;
        }
        return true;
    }

    void write_manifest(const char* stage, const json& inputs,
                        const json& params,
                        const std::vector<std::string>& outputs,
                        std::int64_t elapsed_ms) const {
        json manifest;
        manifest["stage"] = stage;
        manifest["inputs"] = inputs;
        manifest["params"] = params;
        manifest["outputs"] = outputs;
        manifest["timings_ms"] = elapsed_ms;
        write_text_file(
            (stage_dir(stage) / (std::string(stage) + ".manifest.json"))
                .string(),
            manifest.dump(2) + "\n");
    }

    DomainNormalizer make_normalizer() const {
        PublicSuffixList psl = cfg_.public_suffix_path.empty()
                                   ? PublicSuffixList()
                                   : PublicSuffixList::from_file(
                                         cfg_.public_suffix_path);
        std::unordered_set<std::string> exceptions;
        if (cfg_.exceptions_path.empty()) {
            exceptions = DomainNormalizer::default_exceptions();
        } else {
            for (const std::string& line : read_lines(cfg_.exceptions_path)) {
                std::string host = ascii_lower(trim(line));
                if (!host.empty()) exceptions.insert(std::move(host));
            }
        }
        return DomainNormalizer(std::move(psl), std::move(exceptions),
                                cfg_.naive_sld);
    }

    std::unordered_set<std::string> load_shorteners() const {
        std::unordered_set<std::string> out;
        if (cfg_.shorteners_path.empty()) {
            out = {"bit.ly", "goo.gl", "goog.le", "t.co", "tinyurl.com",
                   "ow.ly", "is.gd", "buff.ly"};
        } else {
            for (const std::string& line : read_lines(cfg_.shorteners_path)) {
                std::string d = ascii_lower(trim(line));
                if (!d.empty()) out.insert(std::move(d));
            }
        }
        return out;
    }

    json normalizer_params() const {
        return json{{"naive_sld", cfg_.naive_sld}};
    }

    void write_stats_json(const char* stage, const char* file,
                          const json& doc) const {
        write_text_file((stage_dir(stage) / file).string(), doc.dump(2) + "\n");
    }

    json read_stats_json(const std::string& path) const {
        json doc = json::parse(read_text_file(path), nullptr, false);
        if (doc.is_discarded()) throw IoError("malformed stats file: " + path);
        return doc;
    }

    static void log_stage(const char* stage, bool skipped) {
        std::cerr << "[bibcoup] stage " << stage
                  << (skipped ? ": up to date, skipped" : ": done") << "\n";
    }

    // -- extract ----------------------------------------------------------
    bool extract() {
        if (cfg_.messages_path.empty() || cfg_.channels_path.empty()) {
            throw ValidationError(
                "extract stage needs inputs.messages and inputs.channels");
        }
        const json inputs =
            hash_inputs({cfg_.messages_path, cfg_.channels_path});
        json params;
        params["assume_broadcast"] = cfg_.assume_broadcast;
        params["fields"] = {cfg_.mapping.message_id_field,
                            cfg_.mapping.message_text_field,
                            cfg_.mapping.message_channel_field,
                            cfg_.mapping.message_timestamp_field,
                            cfg_.mapping.channel_id_field,
                            cfg_.mapping.channel_title_field,
                            cfg_.mapping.channel_description_field,
                            cfg_.mapping.channel_broadcast_field};
        const std::vector<std::string> outputs = {"urls.tsv",
                                                  "extract_stats.json"};
        if (up_to_date("extract", inputs, params, outputs)) {
            log_stage("extract", true);
            return true;
        }
        const auto start = std::chrono::steady_clock::now();
        fs::create_directories(stage_dir("extract"));

        ChannelLoadResult channels = load_channels(
            cfg_.channels_path, cfg_.mapping, cfg_.assume_broadcast);
        std::uint64_t broadcast_channels = 0;
        for (const auto& [id, rec] : channels.channels) {
            if (rec.is_broadcast) ++broadcast_channels;
        }

        MessageReader reader(cfg_.messages_path, cfg_.mapping);
        BroadcastFilter filter(channels.channels);
        std::ofstream urls_out(artifact("extract", "urls.tsv"),
                               std::ios::binary | std::ios::trunc);
        if (!urls_out) throw IoError("cannot write urls.tsv");

        std::uint64_t messages_with_url = 0, urls_extracted = 0;
        while (auto msg = reader.next()) {
            if (!filter.keep(*msg)) continue;
            const std::vector<std::string> urls = extract_urls(msg->text);
            if (!urls.empty()) ++messages_with_url;
            for (const std::string& url : urls) {
                urls_out << msg->message_id << '\t' << msg->channel_id << '\t'
                         << url << '\n';
                ++urls_extracted;
            }
        }
        urls_out.close();
        if (!urls_out) throw IoError("write failure on urls.tsv");

        json stats;
        stats["lines_read"] = reader.counters().lines_read;
        stats["messages_total"] = reader.counters().records_emitted;
        stats["records_skipped"] = reader.counters().records_skipped;
        stats["messages_broadcast"] = filter.counters().kept;
        stats["dropped_non_broadcast"] =
            filter.counters().dropped_non_broadcast;
        stats["dropped_unknown_channel"] =
            filter.counters().dropped_unknown_channel;
        stats["messages_with_url"] = messages_with_url;
        stats["urls_extracted"] = urls_extracted;
        stats["channels_total"] = channels.channels.size();
        stats["channels_broadcast"] = broadcast_channels;
        stats["channel_duplicates"] = channels.duplicates;
        stats["channel_lines_skipped"] = channels.skipped;
        write_stats_json("extract", "extract_stats.json", stats);

        write_manifest("extract", inputs, params, outputs,
                       std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count());
        log_stage("extract", false);
        return false;
    }

    // -- expand -----------------------------------------------------------
    bool expand() {
        const std::string urls_path = require("extract", "urls.tsv", "expand");
        const json inputs = hash_inputs({urls_path, cfg_.shorteners_path,
                                         cfg_.public_suffix_path,
                                         cfg_.exceptions_path});
        json params = normalizer_params();
        params["max_hops"] = cfg_.expansion.max_hops;
        params["timeout_s"] = cfg_.expansion.timeout_s;
        params["politeness_delay_ms"] = cfg_.expansion.politeness_delay_ms;
        const std::vector<std::string> outputs = {"urls_final.tsv"};
        if (up_to_date("expand", inputs, params, outputs)) {
            log_stage("expand", true);
            return true;
        }
        const auto start = std::chrono::steady_clock::now();
        fs::create_directories(stage_dir("expand"));

        DomainNormalizer normalizer = make_normalizer();
        UrlExpander expander(load_shorteners(), &normalizer, cfg_.expansion,
                             artifact("expand", "expansion_cache.tsv"));

        std::vector<RawUrl> raw;
        for (const std::string& line : read_lines(urls_path)) {
            if (line.empty()) continue;
            std::vector<std::string> parts = split(line, '\t');
            if (parts.size() != 3) {
                throw IoError("malformed urls.tsv line: " + line);
            }
            raw.push_back(RawUrl{parts[2], parts[0], parts[1]});
        }
        std::vector<ExpandedUrl> expanded = expander.expand_all(raw);

        std::string body;
        std::uint64_t n_expanded = 0, n_failures = 0;
        for (const ExpandedUrl& e : expanded) {
            if (e.expanded) ++n_expanded;
            if (e.failure != ExpandFailure::none &&
                e.failure != ExpandFailure::not_a_shortener) {
                ++n_failures;
            }
            body += e.original.message_id;
            body += '\t';
            body += e.original.channel_id;
            body += '\t';
            body += e.original.value;
            body += '\t';
            body += e.final_url;
            body += '\t';
            body += e.expanded ? '1' : '0';
            body += '\t';
            body += to_string(e.failure);
            body += '\n';
        }
        write_text_file(artifact("expand", "urls_final.tsv"), body);

        json stats;
        stats["urls_total"] = expanded.size();
        stats["urls_expanded"] = n_expanded;
        stats["expansion_failures"] = n_failures;
        write_stats_json("expand", "expand_stats.json", stats);

        write_manifest("expand", inputs, params, outputs,
                       std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count());
        log_stage("expand", false);
        return false;
    }

    // -- catalog ----------------------------------------------------------
    bool catalog() {
        std::string raw_path = cfg_.catalog_path;
        const char* endpoint = std::getenv(kCatalogEndpointEnv);
        const bool harvesting =
            (raw_path.empty() || !fs::exists(raw_path)) && endpoint;
        if (harvesting) {
            fs::create_directories(stage_dir("catalog"));
            raw_path = harvest_to_disk(endpoint);
        } else if (raw_path.empty() || !fs::exists(raw_path)) {
            throw ValidationError(
                std::string("catalog stage needs inputs.catalog or $") +
                kCatalogEndpointEnv);
        }

        const json inputs = hash_inputs(
            {raw_path, cfg_.public_suffix_path, cfg_.exceptions_path});
        const json params = normalizer_params();
        const std::vector<std::string> outputs = {"catalog.txt"};
        if (up_to_date("catalog", inputs, params, outputs)) {
            log_stage("catalog", true);
            return true;
        }
        const auto start = std::chrono::steady_clock::now();
        fs::create_directories(stage_dir("catalog"));

        DomainNormalizer normalizer = make_normalizer();
        SourceCatalog cat = build_catalog_from_file(raw_path, normalizer);
        cat.write(artifact("catalog", "catalog.txt"));

        json stats;
        stats["catalog_lines"] = cat.lines_read;
        stats["catalog_skipped"] = cat.skipped;
        stats["catalog_domains"] = cat.domains.size();
        write_stats_json("catalog", "catalog_stats.json", stats);

        write_manifest("catalog", inputs, params, outputs,
                       std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count());
        log_stage("catalog", false);
        return false;
    }

    std::string harvest_to_disk(const std::string& endpoint) {
        const std::string raw_path =
            artifact("catalog", "catalog_raw_urls.txt");
        const std::string state_path =
            artifact("catalog", "harvest_state.json");

        std::string cursor = "*";
        bool resume = false;
        if (fs::exists(state_path)) {
            json state = read_stats_json(state_path);
            if (state.value("completed", false) && fs::exists(raw_path)) {
                return raw_path;  // previous harvest finished
            }
            cursor = state.value("next_cursor", "*");
            resume = fs::exists(raw_path);
        }

        HarvestResult result = harvest_sources(endpoint, cfg_.harvest, cursor);

        std::ofstream out(raw_path, std::ios::binary |
                                        (resume ? std::ios::app
                                                : std::ios::trunc));
        if (!out) throw IoError("cannot write " + raw_path);
        for (const std::string& url : result.urls) out << url << '\n';
        out.close();

        json state;
        state["completed"] = result.completed;
        state["next_cursor"] = result.next_cursor;
        state["pages"] = result.pages;
        state["retries"] = result.retries;
        write_text_file(state_path, state.dump(2) + "\n");

        if (!result.completed) {
            throw NetworkError(
                "catalog harvest incomplete; partial results and resume "
                "cursor saved under " +
                stage_dir("catalog").string());
        }
        return raw_path;
    }

    // -- matrix -----------------------------------------------------------
    bool matrix() {
        const std::string urls_path =
            require("expand", "urls_final.tsv", "matrix");
        const std::string catalog_path =
            require("catalog", "catalog.txt", "matrix");
        const json inputs = hash_inputs({urls_path, catalog_path,
                                         cfg_.public_suffix_path,
                                         cfg_.exceptions_path});
        json params = normalizer_params();
        params["top_k_channels"] = cfg_.top_k_channels;
        params["exclude_top_sources"] = cfg_.exclude_top_sources;
        params["catalog_only"] = cfg_.catalog_only;
        const std::vector<std::string> outputs = {
            "profiles.tsv",          "selected_channels.txt",
            "citation_matrix.tsv",   "citation_matrix.rows",
            "citation_matrix.cols",  "excluded_sources.csv",
            "matrix_stats.json"};
        if (up_to_date("matrix", inputs, params, outputs)) {
            log_stage("matrix", true);
            return true;
        }
        const auto start = std::chrono::steady_clock::now();
        fs::create_directories(stage_dir("matrix"));

        DomainNormalizer normalizer = make_normalizer();
        SourceCatalog cat = build_catalog_from_file(catalog_path, normalizer);

        ProfileAggregator aggregator;
        std::uint64_t normalize_failures = 0;
        for (const std::string& line : read_lines(urls_path)) {
            if (line.empty()) continue;
            std::vector<std::string> parts = split(line, '\t');
            if (parts.size() != 6) {
                throw IoError("malformed urls_final.tsv line: " + line);
            }
            auto domain = normalizer.normalize(parts[3]);
            if (!domain) {
                ++normalize_failures;
                continue;
            }
            aggregator.add(parts[1], *domain, classify(*domain, cat));
        }
        const ProfileMap& profiles = aggregator.profiles();

        std::string profile_body;
        for (const auto& [channel_id, profile] : profiles) {
            for (const auto& [domain, count] : profile.domain_counts) {
                profile_body += channel_id;
                profile_body += '\t';
                profile_body += domain;
                profile_body += '\t';
                profile_body += std::to_string(count);
                profile_body += '\t';
                profile_body += classify(domain, cat) ? '1' : '0';
                profile_body += '\n';
            }
        }
        write_text_file(artifact("matrix", "profiles.tsv"), profile_body);

        std::vector<std::string> selected =
            select_top_channels(profiles, cfg_.top_k_channels);
        std::string selected_body;
        for (const std::string& id : selected) {
            selected_body += id;
            selected_body += '\n';
        }
        write_text_file(artifact("matrix", "selected_channels.txt"),
                        selected_body);

        CitationMatrix full = build_citation_matrix(
            selected, profiles, cfg_.catalog_only ? &cat : nullptr);
        auto [reduced, removed] =
            exclude_top_sources(full, cfg_.exclude_top_sources);
        reduced.save(artifact("matrix", "citation_matrix"));

        std::string excluded_body = "domain,citing_channels\n";
        for (const ExcludedSource& e : removed) {
            excluded_body += e.domain;
            excluded_body += ',';
            excluded_body += std::to_string(e.channel_count);
            excluded_body += '\n';
        }
        write_text_file(artifact("matrix", "excluded_sources.csv"),
                        excluded_body);

        std::set<std::string> distinct;
        for (const std::string& id : selected) {
            for (const auto& [domain, count] :
                 profiles.at(id).domain_counts) {
                distinct.insert(domain);
            }
        }
        json stats;
        stats["channels_with_urls"] = profiles.size();
        stats["selected_channels"] = selected.size();
        stats["distinct_sources"] = distinct.size();
        stats["normalize_failures"] = normalize_failures;
        stats["matrix_rows_before_exclusion"] = full.sources.size();
        stats["matrix_rows"] = reduced.sources.size();
        stats["matrix_cols"] = reduced.channels.size();
        stats["matrix_nnz"] = reduced.nnz();
        write_stats_json("matrix", "matrix_stats.json", stats);

        write_manifest("matrix", inputs, params, outputs,
                       std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count());
        log_stage("matrix", false);
        return false;
    }

    // -- couple -----------------------------------------------------------
    bool couple() {
        const std::string matrix_tsv =
            require("matrix", "citation_matrix.tsv", "couple");
        require("matrix", "citation_matrix.rows", "couple");
        require("matrix", "citation_matrix.cols", "couple");
        const json inputs = hash_inputs(
            {matrix_tsv, artifact("matrix", "citation_matrix.rows"),
             artifact("matrix", "citation_matrix.cols"), cfg_.channels_path});
        json params;
        params["min_bcf"] = cfg_.min_bcf;
        params["per_source_cap"] = cfg_.per_source_cap;
        params["keep_isolates"] = cfg_.keep_isolates;
        const std::vector<std::string> outputs = {
            "bcf_weights.tsv", "graph_nodes.tsv", "graph_edges.tsv"};
        if (up_to_date("couple", inputs, params, outputs)) {
            log_stage("couple", true);
            return true;
        }
        const auto start = std::chrono::steady_clock::now();
        fs::create_directories(stage_dir("couple"));

        CitationMatrix m =
            CitationMatrix::load(artifact("matrix", "citation_matrix"));
        WeightMap weights = bcf_all_pairs(m, cfg_.per_source_cap);
        write_weights(artifact("couple", "bcf_weights.tsv"), weights,
                      m.channels);

        std::unordered_map<std::string, std::string> titles;
        if (!cfg_.channels_path.empty() && fs::exists(cfg_.channels_path)) {
            ChannelLoadResult channels = load_channels(
                cfg_.channels_path, cfg_.mapping, cfg_.assume_broadcast);
            for (const auto& [id, rec] : channels.channels) {
                titles[id] = rec.title;
            }
        }
        CouplingGraph graph = build_graph(weights, m.channels, titles,
                                          cfg_.min_bcf, cfg_.keep_isolates);
        save_graph(graph, artifact("couple", "graph_nodes.tsv"),
                   artifact("couple", "graph_edges.tsv"));

        write_manifest("couple", inputs, params, outputs,
                       std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count());
        log_stage("couple", false);
        return false;
    }

    // -- communities ------------------------------------------------------
    bool communities() {
        const std::string nodes_path =
            require("couple", "graph_nodes.tsv", "communities");
        const std::string edges_path =
            require("couple", "graph_edges.tsv", "communities");
        const json inputs = hash_inputs({nodes_path, edges_path});
        json params;
        params["seed"] = cfg_.seed;
        params["resolution"] = cfg_.resolution;
        const std::vector<std::string> outputs = {"communities.tsv"};
        if (up_to_date("communities", inputs, params, outputs)) {
            log_stage("communities", true);
            return true;
        }
        const auto start = std::chrono::steady_clock::now();
        fs::create_directories(stage_dir("communities"));

        CouplingGraph graph = load_graph(nodes_path, edges_path);
        if (graph.nodes.empty()) {
            throw ValidationError(
                "communities stage: coupling graph is empty (threshold too "
                "high?)");
        }
        LouvainResult result = louvain(graph, cfg_.resolution, cfg_.seed);

        std::string body;
        body += "# seed=" + std::to_string(cfg_.seed) + "\n";
        body += "# resolution=" + format_double(cfg_.resolution) + "\n";
        body += "# modularity=" + format_double(result.assignment.modularity) +
                "\n";
        body += "# passes=" + std::to_string(result.passes) + "\n";
        body += "# levels=" + std::to_string(result.levels) + "\n";
        for (const auto& [node, comm] : result.assignment.membership) {
            body += node;
            body += '\t';
            body += std::to_string(comm);
            body += '\n';
        }
        write_text_file(artifact("communities", "communities.tsv"), body);

        write_manifest("communities", inputs, params, outputs,
                       std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count());
        log_stage("communities", false);
        return false;
    }

    // -- layout -----------------------------------------------------------
    bool layout() {
        const std::string nodes_path =
            require("couple", "graph_nodes.tsv", "layout");
        const std::string edges_path =
            require("couple", "graph_edges.tsv", "layout");
        const json inputs = hash_inputs({nodes_path, edges_path});
        json params;
        params["iterations"] = cfg_.layout_iterations;
        params["seed"] = cfg_.seed;
        params["attraction"] = cfg_.layout.attraction;
        params["repulsion"] = cfg_.layout.repulsion;
        params["gravity"] = cfg_.layout.gravity;
        params["linlog"] = cfg_.layout.linlog;
        const std::vector<std::string> outputs = {"positions.tsv"};
        if (up_to_date("layout", inputs, params, outputs)) {
            log_stage("layout", true);
            return true;
        }
        const auto start = std::chrono::steady_clock::now();
        fs::create_directories(stage_dir("layout"));

        CouplingGraph graph = load_graph(nodes_path, edges_path);
        if (graph.nodes.empty()) {
            throw ValidationError("layout stage: coupling graph is empty");
        }
        LayoutPositions positions = forceatlas2(
            graph, cfg_.layout_iterations, cfg_.layout, cfg_.seed);

        std::string body;
        body += "# seed=" + std::to_string(cfg_.seed) + "\n";
        body += "# iterations=" + std::to_string(cfg_.layout_iterations) + "\n";
        for (const auto& [node, xy] : positions.positions) {
            body += node;
            body += '\t';
            body += format_double(xy.first);
            body += '\t';
            body += format_double(xy.second);
            body += '\n';
        }
        write_text_file(artifact("layout", "positions.tsv"), body);

        write_manifest("layout", inputs, params, outputs,
                       std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count());
        log_stage("layout", false);
        return false;
    }

    // -- report -----------------------------------------------------------
    bool report() {
        const std::string profiles_path =
            require("matrix", "profiles.tsv", "report");
        const std::string selected_path =
            require("matrix", "selected_channels.txt", "report");
        const std::string catalog_path =
            require("catalog", "catalog.txt", "report");
        const std::string nodes_path =
            require("couple", "graph_nodes.tsv", "report");
        const std::string edges_path =
            require("couple", "graph_edges.tsv", "report");
        const std::string communities_path =
            require("communities", "communities.tsv", "report");
        const std::string positions_path =
            require("layout", "positions.tsv", "report");
        const std::string extract_stats_path =
            require("extract", "extract_stats.json", "report");
        const std::string matrix_stats_path =
            require("matrix", "matrix_stats.json", "report");

        const json inputs = hash_inputs(
            {profiles_path, selected_path, catalog_path, nodes_path,
             edges_path, communities_path, positions_path, extract_stats_path,
             matrix_stats_path});
        json params;
        params["report_top_n"] = cfg_.report_top_n;
        params["min_share"] = cfg_.min_share;
        params["node_size_min"] = cfg_.node_size_min;
        params["node_size_max"] = cfg_.node_size_max;
        const std::vector<std::string> outputs = {
            "frequency_combined.csv", "frequency_catalog.csv",
            "frequency_non_catalog.csv", "coalitions.csv", "graph.gexf",
            "run_stats.json", "frequency_chart.svg"};
        if (up_to_date("report", inputs, params, outputs)) {
            log_stage("report", true);
            return true;
        }
        const auto start = std::chrono::steady_clock::now();
        fs::create_directories(stage_dir("report"));

        // Profiles of the selected channels only (the reporting universe).
        std::set<std::string> selected;
        for (const std::string& line : read_lines(selected_path)) {
            if (!line.empty()) selected.insert(line);
        }
        ProfileMap profiles;
        for (const std::string& line : read_lines(profiles_path)) {
            if (line.empty()) continue;
            std::vector<std::string> parts = split(line, '\t');
            if (parts.size() != 4) {
                throw IoError("malformed profiles.tsv line: " + line);
            }
            if (!selected.count(parts[0])) continue;
            ChannelCitationProfile& p = profiles[parts[0]];
            p.channel_id = parts[0];
            const auto count =
                static_cast<std::uint32_t>(std::stoul(parts[2]));
            p.domain_counts[parts[1]] = count;
            if (parts[3] == "1") p.catalog_link_total += count;
        }

        SourceCatalog cat;
        for (const std::string& line : read_lines(catalog_path)) {
            if (!line.empty()) cat.domains.insert(line);
        }
        cat.provenance = catalog_path;

        for (Segment segment : {Segment::combined, Segment::catalog_only,
                                Segment::non_catalog_only}) {
            FrequencyReport rep =
                frequency_report(profiles, cat, segment, cfg_.report_top_n);
            const char* file =
                segment == Segment::combined ? "frequency_combined.csv"
                : segment == Segment::catalog_only
                    ? "frequency_catalog.csv"
                    : "frequency_non_catalog.csv";
            write_frequency_csv(rep, artifact("report", file));
            if (segment == Segment::combined) {
                write_frequency_svg(
                    rep, artifact("report", "frequency_chart.svg"));
            }
        }

        CouplingGraph graph = load_graph(nodes_path, edges_path);

        CommunityAssignment assignment;
        for (const std::string& line : read_lines(communities_path)) {
            if (line.empty()) continue;
            if (line[0] == '#') {
                if (line.rfind("# seed=", 0) == 0) {
                    assignment.seed = std::stoull(line.substr(7));
                }
                continue;
            }
            std::vector<std::string> parts = split(line, '\t');
            if (parts.size() != 2) {
                throw IoError("malformed communities.tsv line: " + line);
            }
            const int comm = std::stoi(parts[1]);
            assignment.membership[parts[0]] = comm;
            ++assignment.community_sizes[comm];
        }
        if (!graph.edges.empty()) {
            assignment.modularity =
                modularity(graph, assignment.membership, cfg_.resolution);
        }

        LayoutPositions positions;
        for (const std::string& line : read_lines(positions_path)) {
            if (line.empty() || line[0] == '#') continue;
            std::vector<std::string> parts = split(line, '\t');
            if (parts.size() != 3) {
                throw IoError("malformed positions.tsv line: " + line);
            }
            positions.positions[parts[0]] = {std::stod(parts[1]),
                                             std::stod(parts[2])};
        }

        export_gexf(graph, assignment, positions,
                    artifact("report", "graph.gexf"), cfg_.node_size_min,
                    cfg_.node_size_max);

        std::vector<CoalitionReport> coalitions =
            coalition_summary(assignment, graph, cfg_.min_share);
        write_coalitions_csv(coalitions,
                             artifact("report", "coalitions.csv"));

        const json extract_stats = read_stats_json(extract_stats_path);
        const json matrix_stats = read_stats_json(matrix_stats_path);
        RunStats stats;
        stats.messages_total = extract_stats.value("messages_total", 0ull);
        stats.messages_with_url =
            extract_stats.value("messages_with_url", 0ull);
        stats.channels_with_urls =
            matrix_stats.value("channels_with_urls", 0ull);
        stats.selected_channels =
            matrix_stats.value("selected_channels", 0ull);
        stats.distinct_sources = matrix_stats.value("distinct_sources", 0ull);
        stats.catalog_domains = cat.domains.size();
        for (const char* key :
             {"lines_read", "records_skipped", "dropped_non_broadcast",
              "dropped_unknown_channel", "urls_extracted", "channels_total",
              "channels_broadcast", "channel_duplicates"}) {
            if (extract_stats.contains(key)) {
                stats.extra[key] = extract_stats[key].get<std::uint64_t>();
            }
        }
        for (const char* key :
             {"normalize_failures", "matrix_rows", "matrix_cols",
              "matrix_nnz"}) {
            if (matrix_stats.contains(key)) {
                stats.extra[key] = matrix_stats[key].get<std::uint64_t>();
            }
        }
        stats.extra["graph_nodes"] = graph.nodes.size();
        stats.extra["graph_edges"] = graph.edges.size();
        stats.extra["communities"] = assignment.community_sizes.size();
        std::uint64_t main_count = 0;
        for (const CoalitionReport& rep : coalitions) {
            if (rep.main) ++main_count;
        }
        stats.extra["main_coalitions"] = main_count;
        write_run_stats(stats, artifact("report", "run_stats.json"));

        write_manifest("report", inputs, params, outputs,
                       std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count());
        log_stage("report", false);
        return false;
    }
};

}  // namespace

std::vector<StageOutcome> run_pipeline(const PipelineConfig& config,
                                       Stage stage) {
    config.validate();
    DirectoryLock lock(config.out_dir);
    Pipeline pipeline(config);

    std::vector<StageOutcome> outcomes;
    if (stage == Stage::all) {
        for (Stage s : {Stage::extract, Stage::expand, Stage::catalog,
                        Stage::matrix, Stage::couple, Stage::communities,
                        Stage::layout, Stage::report}) {
            outcomes.push_back(pipeline.run(s));
        }
    } else {
        outcomes.push_back(pipeline.run(stage));
    }
    return outcomes;
}

}  // namespace bibcoup
