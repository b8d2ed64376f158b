#pragma once

// Small strict XML reader for validating exported documents in tests:
// balanced tags, quoted attributes, decoded entities. Not a general parser.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace testutil {

struct XmlNode {
    std::string name;
    std::map<std::string, std::string> attrs;
    std::vector<XmlNode> children;
    std::string text;

    const XmlNode& child(const std::string& tag) const {
        for (const XmlNode& c : children) {
            if (c.name == tag) return c;
        }
        throw std::runtime_error("xml: missing child <" + tag + ">");
    }
    std::vector<const XmlNode*> all(const std::string& tag) const {
        std::vector<const XmlNode*> out;
        for (const XmlNode& c : children) {
            if (c.name == tag) out.push_back(&c);
        }
        return out;
    }
    std::string attr(const std::string& key) const {
        auto it = attrs.find(key);
        if (it == attrs.end()) {
            throw std::runtime_error("xml: missing attribute " + key +
                                     " on <" + name + ">");
        }
        return it->second;
    }
};

class XmlParser {
public:
    explicit XmlParser(const std::string& text) : s_(text) {}

    XmlNode parse() {
        skip_prolog();
        XmlNode root = parse_element();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing content after root element");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw std::runtime_error("xml parse error at byte " +
                                 std::to_string(pos_) + ": " + why);
    }

    void skip_ws() {
        while (pos_ < s_.size() &&
               (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' ||
                s_[pos_] == '\r')) {
            ++pos_;
        }
    }

    void skip_prolog() {
        skip_ws();
        while (pos_ + 1 < s_.size() && s_[pos_] == '<' &&
               (s_[pos_ + 1] == '?' || s_[pos_ + 1] == '!')) {
            const auto end = s_.find('>', pos_);
            if (end == std::string::npos) fail("unterminated prolog");
            pos_ = end + 1;
            skip_ws();
        }
    }

    std::string parse_name() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                s_[pos_] == ':' || s_[pos_] == '-' || s_[pos_] == '_' ||
                s_[pos_] == '.')) {
            ++pos_;
        }
        if (pos_ == start) fail("expected a name");
        return s_.substr(start, pos_ - start);
    }

    std::string decode(const std::string& raw) {
        std::string out;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] != '&') {
                out += raw[i];
                continue;
            }
            const auto semi = raw.find(';', i);
            if (semi == std::string::npos) fail("unterminated entity");
            const std::string ent = raw.substr(i + 1, semi - i - 1);
            if (ent == "amp") out += '&';
            else if (ent == "lt") out += '<';
            else if (ent == "gt") out += '>';
            else if (ent == "quot") out += '"';
            else if (ent == "apos") out += '\'';
            else fail("unknown entity &" + ent + ";");
            i = semi;
        }
        return out;
    }

    XmlNode parse_element() {
        if (pos_ >= s_.size() || s_[pos_] != '<') fail("expected '<'");
        ++pos_;
        XmlNode node;
        node.name = parse_name();

        while (true) {
            skip_ws();
            if (pos_ >= s_.size()) fail("unterminated tag");
            if (s_[pos_] == '/') {
                if (pos_ + 1 >= s_.size() || s_[pos_ + 1] != '>') {
                    fail("malformed self-closing tag");
                }
                pos_ += 2;
                return node;
            }
            if (s_[pos_] == '>') {
                ++pos_;
                break;
            }
            std::string key = parse_name();
            skip_ws();
            if (pos_ >= s_.size() || s_[pos_] != '=') fail("expected '='");
            ++pos_;
            skip_ws();
            if (pos_ >= s_.size() || s_[pos_] != '"') {
                fail("attribute value must be double-quoted");
            }
            ++pos_;
            const auto end = s_.find('"', pos_);
            if (end == std::string::npos) fail("unterminated attribute");
            node.attrs[key] = decode(s_.substr(pos_, end - pos_));
            pos_ = end + 1;
        }

        // content
        while (true) {
            const auto lt = s_.find('<', pos_);
            if (lt == std::string::npos) fail("unterminated element content");
            node.text += decode(s_.substr(pos_, lt - pos_));
            pos_ = lt;
            if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '/') {
                pos_ += 2;
                const std::string closing = parse_name();
                if (closing != node.name) {
                    fail("mismatched closing tag </" + closing + "> for <" +
                         node.name + ">");
                }
                skip_ws();
                if (pos_ >= s_.size() || s_[pos_] != '>') fail("expected '>'");
                ++pos_;
                return node;
            }
            node.children.push_back(parse_element());
        }
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

inline XmlNode parse_xml(const std::string& text) {
    return XmlParser(text).parse();
}

}  // namespace testutil
