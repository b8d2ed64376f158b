#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bibcoup {

struct RawUrl {
    std::string value;
    std::string message_id;
    std::string channel_id;
};

/// Every maximal http(s) URL in `text`, in order of appearance.
///
/// Grammar: a case-insensitive `http://` or `https://` scheme not preceded
/// by a scheme character [A-Za-z0-9+.-]; the token runs until ASCII
/// whitespace, a control byte, `<`, `>` or `"`; trailing `.,;:)]}"'` are
/// stripped; the authority must be non-empty. Bytes >= 0x80 are kept so
/// internationalized hosts and paths survive.
std::vector<std::string> extract_urls(std::string_view text);

/// extract_urls with message/channel provenance attached.
std::vector<RawUrl> extract_urls(std::string_view text,
                                 const std::string& message_id,
                                 const std::string& channel_id);

}  // namespace bibcoup
