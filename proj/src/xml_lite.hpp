// Minimal XML pull parser covering the subset OSM extracts use: elements,
// attributes, self-closing tags, comments, processing instructions, CDATA
// and DOCTYPE blocks. Text content is skipped; only element boundaries are
// reported. Tracks line/column for error messages.
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mobisynth/errors.hpp"

namespace mobisynth::xml {

struct Attribute {
    std::string name;
    std::string value;
};

struct Element {
    std::string name;
    std::vector<Attribute> attrs;
    bool self_closing = false;
    std::size_t line = 0;

    // nullptr when the attribute is absent.
    const std::string* attr(std::string_view key) const {
        for (const Attribute& a : attrs)
            if (a.name == key) return &a.value;
        return nullptr;
    }
};

class Parser {
public:
    enum class Event { start, end, eof };

    explicit Parser(std::string_view text) : text_(text) {}

    // Advances to the next element boundary. Fills name/attrs/line for
    // Event::start; name/line for Event::end. Throws ParseError on
    // malformed input, including mismatched or unclosed tags.
    Event next(Element& out);

    std::size_t line() const { return line_; }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, line_, column());
    }

    std::size_t column() const;
    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    char take();
    void skip_until(std::string_view terminator, const char* what);
    void skip_ws();
    std::string read_name();
    std::string read_attr_value();
    std::string decode_entities(std::string_view raw) const;

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t line_start_ = 0;
    std::vector<std::string> open_;
};

inline char Parser::take() {
    char c = text_[pos_++];
    if (c == '\n') {
        ++line_;
        line_start_ = pos_;
    }
    return c;
}

inline std::size_t Parser::column() const {
    return pos_ - line_start_ + 1;
}

inline void Parser::skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r' || peek() == '\n'))
        take();
}

inline void Parser::skip_until(std::string_view terminator, const char* what) {
    while (pos_ + terminator.size() <= text_.size()) {
        if (text_.compare(pos_, terminator.size(), terminator) == 0) {
            for (std::size_t i = 0; i < terminator.size(); ++i) take();
            return;
        }
        take();
    }
    fail(std::string("unterminated ") + what);
}

inline std::string Parser::read_name() {
    std::size_t start = pos_;
    while (!eof()) {
        char c = peek();
        bool name_char = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                         (c >= '0' && c <= '9') || c == '_' || c == '-' ||
                         c == ':' || c == '.';
        if (!name_char) break;
        take();
    }
    if (pos_ == start) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
}

inline std::string Parser::decode_entities(std::string_view raw) const {
    if (raw.find('&') == std::string_view::npos) return std::string(raw);
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] != '&') {
            out.push_back(raw[i]);
            continue;
        }
        std::size_t semi = raw.find(';', i + 1);
        if (semi == std::string_view::npos)
            throw ParseError("unterminated entity reference", line_, column());
        std::string_view ent = raw.substr(i + 1, semi - i - 1);
        if (ent == "amp") out.push_back('&');
        else if (ent == "lt") out.push_back('<');
        else if (ent == "gt") out.push_back('>');
        else if (ent == "quot") out.push_back('"');
        else if (ent == "apos") out.push_back('\'');
        else if (!ent.empty() && ent[0] == '#') {
            int base = 10;
            std::string_view digits = ent.substr(1);
            if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
                base = 16;
                digits = digits.substr(1);
            }
            unsigned long code = 0;
            if (digits.empty())
                throw ParseError("empty character reference", line_, column());
            for (char c : digits) {
                int d;
                if (c >= '0' && c <= '9') d = c - '0';
                else if (base == 16 && c >= 'a' && c <= 'f') d = c - 'a' + 10;
                else if (base == 16 && c >= 'A' && c <= 'F') d = c - 'A' + 10;
                else throw ParseError("bad character reference", line_, column());
                code = code * base + static_cast<unsigned long>(d);
            }
            // UTF-8 encode.
            if (code < 0x80) {
                out.push_back(static_cast<char>(code));
            } else if (code < 0x800) {
                out.push_back(static_cast<char>(0xC0 | (code >> 6)));
                out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
            } else if (code < 0x10000) {
                out.push_back(static_cast<char>(0xE0 | (code >> 12)));
                out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
                out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
            } else if (code < 0x110000) {
                out.push_back(static_cast<char>(0xF0 | (code >> 18)));
                out.push_back(static_cast<char>(0x80 | ((code >> 12) & 0x3F)));
                out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
                out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
            } else {
                throw ParseError("character reference out of range", line_, column());
            }
        } else {
            throw ParseError("unknown entity &" + std::string(ent) + ";", line_, column());
        }
        i = semi;
    }
    return out;
}

inline std::string Parser::read_attr_value() {
    if (eof() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
    char quote = take();
    std::size_t start = pos_;
    while (!eof() && peek() != quote) {
        if (peek() == '<') fail("'<' inside attribute value");
        take();
    }
    if (eof()) fail("unterminated attribute value");
    std::string_view raw = text_.substr(start, pos_ - start);
    take();
    return decode_entities(raw);
}

inline Parser::Event Parser::next(Element& out) {
    for (;;) {
        // Skip character data between tags.
        while (!eof() && peek() != '<') take();
        if (eof()) {
            if (!open_.empty()) fail("unexpected end of document inside <" + open_.back() + ">");
            return Event::eof;
        }
        take();  // '<'
        if (eof()) fail("truncated tag");

        if (peek() == '?') {
            skip_until("?>", "processing instruction");
            continue;
        }
        if (peek() == '!') {
            take();
            if (text_.compare(pos_, 2, "--") == 0) {
                pos_ += 2;
                skip_until("-->", "comment");
            } else if (text_.compare(pos_, 7, "[CDATA[") == 0) {
                pos_ += 7;
                skip_until("]]>", "CDATA section");
            } else {
                skip_until(">", "declaration");
            }
            continue;
        }
        if (peek() == '/') {
            take();
            out = Element{};
            out.line = line_;
            out.name = read_name();
            skip_ws();
            if (eof() || peek() != '>') fail("malformed closing tag");
            take();
            if (open_.empty() || open_.back() != out.name)
                fail("closing tag </" + out.name + "> does not match open element");
            open_.pop_back();
            return Event::end;
        }

        out = Element{};
        out.line = line_;
        out.name = read_name();
        for (;;) {
            skip_ws();
            if (eof()) fail("unterminated tag <" + out.name + ">");
            if (peek() == '>') {
                take();
                open_.push_back(out.name);
                return Event::start;
            }
            if (peek() == '/') {
                take();
                if (eof() || peek() != '>') fail("malformed self-closing tag");
                take();
                out.self_closing = true;
                return Event::start;
            }
            Attribute a;
            a.name = read_name();
            skip_ws();
            if (eof() || peek() != '=') fail("expected '=' after attribute name");
            take();
            skip_ws();
            a.value = read_attr_value();
            out.attrs.push_back(std::move(a));
        }
    }
}

}  // namespace mobisynth::xml
