#include "bibcoup/catalog.hpp"
#include "bibcoup/common.hpp"
#include "bibcoup/net_util.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <thread>

namespace bibcoup {

namespace {

using nlohmann::json;

bool transient_status(int status) {
    return status >= 500 || status == 429;
}

}  // namespace

HarvestResult harvest_sources(const std::string& endpoint,
                              const HarvestPolicy& policy,
                              const std::string& resume_cursor) {
    auto parsed = parse_http_url(endpoint);
    if (!parsed) {
        throw ValidationError("harvest endpoint is not a valid http(s) URL: " +
                              endpoint);
    }

    HarvestResult result;
    result.next_cursor = resume_cursor.empty() ? "*" : resume_cursor;

    auto client = make_client(*parsed, policy.timeout_s);

    while (true) {
        std::string target = parsed->target;
        target += target.find('?') == std::string::npos ? '?' : '&';
        target += "per-page=" + std::to_string(policy.page_size);
        target += "&cursor=" + httplib::detail::encode_url(result.next_cursor);

        httplib::Result res;
        bool got = false;
        for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
            if (attempt > 0) {
                ++result.retries;
                std::this_thread::sleep_for(std::chrono::milliseconds(
                    policy.retry_base_ms * (1 << (attempt - 1))));
            }
            res = client->Get(target);
            if (res && !transient_status(res->status)) {
                got = true;
                break;
            }
        }
        if (!got || res->status != 200) {
            return result;  // partial; next_cursor marks the resume point
        }

        json body = json::parse(res->body, nullptr, false);
        if (body.is_discarded() || !body.is_object()) {
            return result;
        }

        auto results_it = body.find("results");
        if (results_it == body.end() || !results_it->is_array() ||
            results_it->empty()) {
            result.completed = true;
            return result;
        }
        ++result.pages;
        for (const json& item : *results_it) {
            auto f = item.find(policy.field);
            if (f != item.end() && f->is_string()) {
                result.urls.push_back(f->get<std::string>());
            } else {
                ++result.skipped_results;
            }
        }

        std::string next;
        if (auto meta = body.find("meta"); meta != body.end()) {
            if (auto c = meta->find("next_cursor");
                c != meta->end() && c->is_string()) {
                next = c->get<std::string>();
            }
        }
        if (next.empty()) {
            result.completed = true;
            result.next_cursor.clear();
            return result;
        }
        result.next_cursor = next;
    }
}

}  // namespace bibcoup
