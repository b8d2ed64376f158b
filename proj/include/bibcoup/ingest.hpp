#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bibcoup {

struct MessageRecord {
    std::string message_id;
    std::string channel_id;  // never empty
    std::optional<std::int64_t> timestamp;
    std::string text;  // verbatim, possibly empty
};

struct ChannelRecord {
    std::string channel_id;
    std::string title;
    std::string description;
    bool is_broadcast = false;
};

/// Names of the archive's fields; externalized so the toolkit stays
/// archive-agnostic. channel_broadcast_field may be empty when the dump has
/// no such field (the assume-broadcast default applies instead).
struct FieldMapping {
    std::string message_id_field = "id";
    std::string message_text_field = "message";
    std::string message_channel_field = "channel_id";
    std::string message_timestamp_field = "date";
    std::string channel_id_field = "id";
    std::string channel_title_field = "title";
    std::string channel_description_field = "about";
    std::string channel_broadcast_field = "broadcast";

    /// Throws ValidationError naming every empty mandatory field.
    void validate() const;
};

struct IngestCounters {
    std::uint64_t lines_read = 0;
    std::uint64_t records_emitted = 0;
    std::uint64_t records_skipped = 0;
};

/// Streams MessageRecords off an NDJSON file one line at a time; memory use
/// is independent of file length. Malformed lines are counted, never fatal.
class MessageReader {
public:
    MessageReader(const std::string& path, FieldMapping mapping);

    std::optional<MessageRecord> next();

    const IngestCounters& counters() const { return counters_; }

private:
    std::ifstream in_;
    FieldMapping mapping_;
    IngestCounters counters_;
    std::string line_;
};

using ChannelMap = std::map<std::string, ChannelRecord>;

struct ChannelLoadResult {
    ChannelMap channels;
    std::uint64_t lines_read = 0;
    std::uint64_t duplicates = 0;  // repeated channel_id, first kept
    std::uint64_t skipped = 0;     // malformed lines
};

/// assume_broadcast fills in is_broadcast when the record (or mapping) has
/// no broadcast field.
ChannelLoadResult load_channels(const std::string& path,
                                const FieldMapping& mapping,
                                bool assume_broadcast);

struct BroadcastFilterCounters {
    std::uint64_t kept = 0;
    std::uint64_t dropped_non_broadcast = 0;
    std::uint64_t dropped_unknown_channel = 0;
};

/// Streaming predicate form of the broadcast filter.
class BroadcastFilter {
public:
    explicit BroadcastFilter(const ChannelMap& channels) : channels_(channels) {}

    bool keep(const MessageRecord& m);

    const BroadcastFilterCounters& counters() const { return counters_; }

private:
    const ChannelMap& channels_;
    BroadcastFilterCounters counters_;
};

std::vector<MessageRecord> filter_broadcast(
    const std::vector<MessageRecord>& messages, const ChannelMap& channels,
    BroadcastFilterCounters* counters = nullptr);

}  // namespace bibcoup
