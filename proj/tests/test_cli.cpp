#include "bibcoup/common.hpp"
#include "bibcoup/pipeline.hpp"

#include "support/mock_server.hpp"
#include "support/test_util.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>

using namespace bibcoup;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + BIBCOUP_CLI_PATH + "\" " +
                            args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cli exit codes distinguish validation from i/o errors") {
    testutil::TempDir tmp;

    // invalid config key -> validation (1)
    testutil::write_file(tmp.file("bad.conf"), "[params]\nmin_bcf = 0\n");
    CHECK(run_cli("extract -c " + tmp.file("bad.conf")) == 1);

    // unreadable input file -> i/o (2)
    testutil::write_file(tmp.file("io.conf"),
                         "[inputs]\nmessages = missing.ndjson\nchannels = "
                         "missing.ndjson\n[output]\ndir = out\n");
    CHECK(run_cli("extract -c " + tmp.file("io.conf")) == 2);

    // missing upstream artifact -> validation (1)
    PipelineConfig cfg =
        PipelineConfig::from_file(testutil::fixture_path("pipeline.conf"));
    CHECK(run_cli("couple -c " + testutil::fixture_path("pipeline.conf") +
                  " -o " + tmp.file("out")) == 1);

    // well-formed single stage -> success (0)
    CHECK(run_cli("extract -c " + testutil::fixture_path("pipeline.conf") +
                  " -o " + tmp.file("ok_out")) == 0);
}

TEST_CASE("cli flags override config keys") {
    testutil::TempDir tmp;
    const std::string conf = testutil::fixture_path("pipeline.conf");
    const std::string out = tmp.file("out");
    REQUIRE(run_cli("all -c " + conf + " -o " + out) == 0);

    // --min-bcf 3 reruns couple and keeps only the weight-3 edge
    REQUIRE(run_cli("couple --min-bcf 3 -c " + conf + " -o " + out) == 0);
    auto edges = read_lines((fs::path(out) / "couple/graph_edges.tsv").string());
    std::vector<std::string> nonempty;
    for (const auto& e : edges) {
        if (!e.empty()) nonempty.push_back(e);
    }
    REQUIRE(nonempty.size() == 1);
    CHECK(nonempty[0] == "ch05\tch07\t3");
}

TEST_CASE("catalog stage harvests when only the endpoint is configured") {
    testutil::MockServer server;
    server.handle().Get("/sources", [](const httplib::Request& req,
                                       httplib::Response& res) {
        nlohmann::json body;
        if (req.get_param_value("cursor") == "*") {
            body["results"] = {{{"homepage_url", "https://www.nature.com/x"}},
                               {{"homepage_url", "https://journals.plos.org/y"}}};
            body["meta"]["next_cursor"] = "p2";
        } else {
            body["results"] = {{{"homepage_url", "https://nature.com/dup"}}};
            body["meta"]["next_cursor"] = nullptr;
        }
        res.set_content(body.dump(), "application/json");
    });
    server.start();

    testutil::TempDir tmp;
    PipelineConfig cfg =
        PipelineConfig::from_file(testutil::fixture_path("pipeline.conf"));
    cfg.out_dir = tmp.file("out");
    cfg.catalog_path.clear();
    cfg.harvest.page_size = 2;

    setenv(kCatalogEndpointEnv, server.url("/sources").c_str(), 1);
    auto outcomes = run_pipeline(cfg, Stage::catalog);
    unsetenv(kCatalogEndpointEnv);
    REQUIRE(outcomes.size() == 1);
    CHECK_FALSE(outcomes[0].skipped);

    const fs::path dir = fs::path(cfg.out_dir) / "catalog";
    CHECK(read_text_file((dir / "catalog_raw_urls.txt").string()) ==
          "https://www.nature.com/x\nhttps://journals.plos.org/y\n"
          "https://nature.com/dup\n");
    CHECK(read_text_file((dir / "catalog.txt").string()) ==
          "nature.com\nplos.org\n");

    nlohmann::json state = nlohmann::json::parse(
        read_text_file((dir / "harvest_state.json").string()));
    CHECK(state["completed"] == true);
}

TEST_CASE("catalog stage without file or endpoint is a validation error") {
    testutil::TempDir tmp;
    PipelineConfig cfg =
        PipelineConfig::from_file(testutil::fixture_path("pipeline.conf"));
    cfg.out_dir = tmp.file("out");
    cfg.catalog_path.clear();
    unsetenv(kCatalogEndpointEnv);
    CHECK_THROWS_AS(run_pipeline(cfg, Stage::catalog), ValidationError);
}
