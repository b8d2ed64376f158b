#include "bibcoup/ingest.hpp"

#include "bibcoup/common.hpp"

#include <json.hpp>

namespace bibcoup {

namespace {

using nlohmann::json;

/// Field as a string: strings verbatim, integers/bools stringified.
std::optional<std::string> field_as_string(const json& obj,
                                           const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) {
        return std::to_string(it->get<std::int64_t>());
    }
    if (it->is_number_unsigned()) {
        return std::to_string(it->get<std::uint64_t>());
    }
    if (it->is_boolean()) return it->get<bool>() ? "true" : "false";
    return std::nullopt;
}

std::optional<bool> field_as_bool(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (it->is_boolean()) return it->get<bool>();
    if (it->is_number()) return it->get<double>() != 0.0;
    if (it->is_string()) {
        std::string v = ascii_lower(it->get<std::string>());
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
    }
    return std::nullopt;
}

}  // namespace

void FieldMapping::validate() const {
    std::string missing;
    auto require = [&](const std::string& v, const char* name) {
        if (v.empty()) {
            if (!missing.empty()) missing += ", ";
            missing += name;
        }
    };
    require(message_text_field, "message_text_field");
    require(message_channel_field, "message_channel_field");
    require(channel_id_field, "channel_id_field");
    require(channel_title_field, "channel_title_field");
    if (!missing.empty()) {
        throw ValidationError("field mapping has empty mandatory fields: " +
                              missing);
    }
}

MessageReader::MessageReader(const std::string& path, FieldMapping mapping)
    : in_(path, std::ios::binary), mapping_(std::move(mapping)) {
    if (!in_) throw IoError("cannot open messages file: " + path);
    mapping_.validate();
}

std::optional<MessageRecord> MessageReader::next() {
    while (std::getline(in_, line_)) {
        if (!line_.empty() && line_.back() == '\r') line_.pop_back();
        ++counters_.lines_read;

        json obj = json::parse(line_, nullptr, /*allow_exceptions=*/false);
        if (obj.is_discarded() || !obj.is_object()) {
            ++counters_.records_skipped;
            continue;
        }
        auto channel = field_as_string(obj, mapping_.message_channel_field);
        if (!channel || channel->empty()) {
            ++counters_.records_skipped;
            continue;
        }

        MessageRecord rec;
        rec.channel_id = std::move(*channel);
        rec.message_id =
            field_as_string(obj, mapping_.message_id_field).value_or("");
        if (auto text = field_as_string(obj, mapping_.message_text_field)) {
            rec.text = std::move(*text);
        }
        if (!mapping_.message_timestamp_field.empty()) {
            auto it = obj.find(mapping_.message_timestamp_field);
            if (it != obj.end() && it->is_number()) {
                rec.timestamp = static_cast<std::int64_t>(it->get<double>());
            }
        }
        ++counters_.records_emitted;
        return rec;
    }
    if (in_.bad()) throw IoError("read failure on messages file");
    return std::nullopt;
}

ChannelLoadResult load_channels(const std::string& path,
                                const FieldMapping& mapping,
                                bool assume_broadcast) {
    mapping.validate();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open channels file: " + path);

    ChannelLoadResult result;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++result.lines_read;

        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            ++result.skipped;
            continue;
        }
        auto id = field_as_string(obj, mapping.channel_id_field);
        if (!id || id->empty()) {
            ++result.skipped;
            continue;
        }
        if (result.channels.count(*id)) {
            ++result.duplicates;  // first occurrence wins
            continue;
        }

        ChannelRecord rec;
        rec.channel_id = *id;
        rec.title =
            field_as_string(obj, mapping.channel_title_field).value_or("");
        if (!mapping.channel_description_field.empty()) {
            rec.description =
                field_as_string(obj, mapping.channel_description_field)
                    .value_or("");
        }
        rec.is_broadcast = assume_broadcast;
        if (!mapping.channel_broadcast_field.empty()) {
            if (auto b = field_as_bool(obj, mapping.channel_broadcast_field)) {
                rec.is_broadcast = *b;
            }
        }
        result.channels.emplace(std::move(*id), std::move(rec));
    }
    if (in.bad()) throw IoError("read failure on channels file: " + path);
    return result;
}

bool BroadcastFilter::keep(const MessageRecord& m) {
    auto it = channels_.find(m.channel_id);
    if (it == channels_.end()) {
        ++counters_.dropped_unknown_channel;
        return false;
    }
    if (!it->second.is_broadcast) {
        ++counters_.dropped_non_broadcast;
        return false;
    }
    ++counters_.kept;
    return true;
}

std::vector<MessageRecord> filter_broadcast(
    const std::vector<MessageRecord>& messages, const ChannelMap& channels,
    BroadcastFilterCounters* counters) {
    BroadcastFilter filter(channels);
    std::vector<MessageRecord> kept;
    for (const MessageRecord& m : messages) {
        if (filter.keep(m)) kept.push_back(m);
    }
    if (counters) *counters = filter.counters();
    return kept;
}

}  // namespace bibcoup
