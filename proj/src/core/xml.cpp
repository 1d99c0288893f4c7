#include "core/xml.hpp"

#include "core/errors.hpp"

#include <cctype>

namespace archbench::xml {

namespace {

struct Parser {
    std::string_view text;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        raise(ErrorCode::MalformedXml, what + " at offset " + std::to_string(pos));
    }

    bool done() const { return pos >= text.size(); }
    char peek() const { return done() ? '\0' : text[pos]; }

    void skip_ws() {
        while (!done() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool consume(std::string_view token) {
        if (text.substr(pos, token.size()) == token) {
            pos += token.size();
            return true;
        }
        return false;
    }

    void skip_until(std::string_view token, const char* what) {
        std::size_t found = text.find(token, pos);
        if (found == std::string_view::npos) fail(std::string("unterminated ") + what);
        pos = found + token.size();
    }

    std::string read_name() {
        std::size_t start = pos;
        while (!done()) {
            char c = text[pos];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':' ||
                c == '.') {
                ++pos;
            } else {
                break;
            }
        }
        if (pos == start) fail("expected a name");
        return std::string(text.substr(start, pos - start));
    }

    std::string decode_entities(std::string_view raw) {
        std::string out;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] != '&') {
                out.push_back(raw[i]);
                continue;
            }
            std::size_t end = raw.find(';', i);
            if (end == std::string_view::npos) fail("unterminated entity");
            std::string_view entity = raw.substr(i + 1, end - i - 1);
            if (entity == "amp") out.push_back('&');
            else if (entity == "lt") out.push_back('<');
            else if (entity == "gt") out.push_back('>');
            else if (entity == "quot") out.push_back('"');
            else if (entity == "apos") out.push_back('\'');
            else fail("unknown entity '&" + std::string(entity) + ";'");
            i = end;
        }
        return out;
    }

    void read_attributes(Element& element) {
        while (true) {
            skip_ws();
            char c = peek();
            if (c == '>' || c == '/' || c == '?' || c == '\0') return;
            std::string name = read_name();
            skip_ws();
            if (!consume("=")) fail("expected '=' after attribute '" + name + "'");
            skip_ws();
            char quote = peek();
            if (quote != '"' && quote != '\'') fail("expected a quoted attribute value");
            ++pos;
            std::size_t start = pos;
            while (!done() && text[pos] != quote) ++pos;
            if (done()) fail("unterminated attribute value");
            std::string value = decode_entities(text.substr(start, pos - start));
            ++pos;
            element.attributes.emplace_back(std::move(name), std::move(value));
        }
    }

    // Consumes prolog junk: declaration, comments, whitespace.
    void skip_misc() {
        while (true) {
            skip_ws();
            if (consume("<?")) {
                skip_until("?>", "declaration");
            } else if (consume("<!--")) {
                skip_until("-->", "comment");
            } else if (text.substr(pos, 2) == "<!") {
                fail("doctype and CDATA are not supported");
            } else {
                return;
            }
        }
    }

    Element parse_element() {
        if (!consume("<")) fail("expected '<'");
        Element element;
        element.name = read_name();
        read_attributes(element);
        skip_ws();
        if (consume("/>")) return element;
        if (!consume(">")) fail("expected '>' in element '" + element.name + "'");

        while (true) {
            // Text content is skipped; only markup matters here.
            std::size_t next = text.find('<', pos);
            if (next == std::string_view::npos) fail("unterminated element '" + element.name + "'");
            pos = next;
            if (consume("<!--")) {
                skip_until("-->", "comment");
                continue;
            }
            if (text.substr(pos, 2) == "</") {
                pos += 2;
                std::string closing = read_name();
                if (closing != element.name)
                    fail("mismatched closing tag '" + closing + "' for '" + element.name + "'");
                skip_ws();
                if (!consume(">")) fail("expected '>' after closing tag");
                return element;
            }
            if (text.substr(pos, 2) == "<!") fail("doctype and CDATA are not supported");
            element.children.push_back(parse_element());
        }
    }
};

} // namespace

const std::string* Element::attribute(std::string_view key) const {
    for (const auto& [name, value] : attributes) {
        if (name == key) return &value;
    }
    return nullptr;
}

const Element* Element::child(std::string_view child_name) const {
    for (const Element& c : children) {
        if (c.name == child_name) return &c;
    }
    return nullptr;
}

std::vector<const Element*> Element::children_named(std::string_view child_name) const {
    std::vector<const Element*> out;
    for (const Element& c : children) {
        if (c.name == child_name) out.push_back(&c);
    }
    return out;
}

Element parse(std::string_view text) {
    Parser parser{text};
    parser.skip_misc();
    if (parser.done()) parser.fail("document has no root element");
    Element root = parser.parse_element();
    parser.skip_misc();
    if (!parser.done()) parser.fail("content after the root element");
    return root;
}

} // namespace archbench::xml
