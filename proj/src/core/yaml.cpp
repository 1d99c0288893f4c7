#include "core/yaml.hpp"

#include "core/errors.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <optional>

namespace archbench::yaml {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
    raise(ErrorCode::MalformedDocument, "line " + std::to_string(line_no) + ": " + what);
}

struct Line {
    std::size_t number; // 1-based in the source text
    std::size_t indent;
    std::string content; // comment-stripped, right-trimmed, non-empty
};

bool is_blank(std::string_view s) {
    return s.find_first_not_of(" \t\r") == std::string_view::npos;
}

// Strips a trailing comment ('#' at start of content or preceded by
// whitespace, outside quotes).
std::string strip_comment(std::string_view s, std::size_t line_no) {
    std::string out;
    char quote = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (quote != 0) {
            if (c == quote) quote = 0;
            out.push_back(c);
            continue;
        }
        if (c == '\'' || c == '"') {
            quote = c;
            out.push_back(c);
            continue;
        }
        if (c == '#' && (i == 0 || s[i - 1] == ' ' || s[i - 1] == '\t')) break;
        out.push_back(c);
    }
    if (quote != 0) fail(line_no, "unterminated quoted string");
    while (!out.empty() && (out.back() == ' ' || out.back() == '\t' || out.back() == '\r')) out.pop_back();
    return out;
}

std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> lines;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool saw_doc_marker = false;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (is_blank(raw)) continue;
        std::size_t indent = 0;
        while (indent < raw.size() && raw[indent] == ' ') ++indent;
        if (indent < raw.size() && raw[indent] == '\t') fail(line_no, "tab in indentation");
        std::string content = strip_comment(raw.substr(indent), line_no);
        if (content.empty()) continue;
        if (content[0] == '%') fail(line_no, "directives are not supported");
        if (content == "---") {
            if (saw_doc_marker || !lines.empty()) fail(line_no, "multi-document streams are not supported");
            saw_doc_marker = true;
            continue;
        }
        if (content == "...") fail(line_no, "document end markers are not supported");
        lines.push_back(Line{line_no, indent, std::move(content)});
    }
    return lines;
}

bool looks_numeric_start(char c) {
    return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
}

Node scalar_from_plain(std::string_view token, std::size_t line_no) {
    if (token.empty()) return Node::make_null();
    if (token[0] == '&' || token[0] == '*') fail(line_no, "anchors and aliases are not supported");
    if (token[0] == '!') fail(line_no, "tags are not supported");
    if (token == "~" || token == "null" || token == "Null" || token == "NULL" || token == "None")
        return Node::make_null();
    if (token == "true" || token == "True" || token == "TRUE") return Node::make_bool(true);
    if (token == "false" || token == "False" || token == "FALSE") return Node::make_bool(false);
    if (looks_numeric_start(token[0])) {
        std::int64_t iv = 0;
        auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), iv);
        if (ec == std::errc() && p == token.data() + token.size()) return Node::make_int(iv);
        std::string buf(token);
        char* end = nullptr;
        double dv = std::strtod(buf.c_str(), &end);
        if (end == buf.c_str() + buf.size()) return Node::make_float(dv);
    }
    return Node::make_string(std::string(token));
}

struct FlowParser {
    std::string_view s;
    std::size_t pos = 0;
    std::size_t line_no;

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }

    char peek() const { return pos < s.size() ? s[pos] : '\0'; }

    Node parse_value() {
        skip_ws();
        char c = peek();
        if (c == '[') return parse_seq();
        if (c == '{') return parse_map();
        if (c == '\'' || c == '"') return parse_quoted();
        return parse_plain();
    }

    Node parse_quoted() {
        char quote = s[pos++];
        std::string out;
        while (pos < s.size() && s[pos] != quote) out.push_back(s[pos++]);
        if (pos >= s.size()) fail(line_no, "unterminated quoted string");
        ++pos;
        return Node::make_string(std::move(out));
    }

    Node parse_plain() {
        std::size_t start = pos;
        while (pos < s.size()) {
            char c = s[pos];
            if (c == ',' || c == ']' || c == '}') break;
            ++pos;
        }
        std::string_view tok = s.substr(start, pos - start);
        while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.remove_suffix(1);
        while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
        return scalar_from_plain(tok, line_no);
    }

    Node parse_seq() {
        ++pos; // '['
        Node node = Node::make_sequence();
        skip_ws();
        if (peek() == ']') {
            ++pos;
            return node;
        }
        while (true) {
            node.items().push_back(parse_value());
            skip_ws();
            char c = peek();
            if (c == ',') {
                ++pos;
                continue;
            }
            if (c == ']') {
                ++pos;
                return node;
            }
            fail(line_no, "expected ',' or ']' in flow sequence");
        }
    }

    Node parse_map() {
        ++pos; // '{'
        Node node = Node::make_mapping();
        skip_ws();
        if (peek() == '}') {
            ++pos;
            return node;
        }
        while (true) {
            skip_ws();
            std::size_t start = pos;
            while (pos < s.size() && s[pos] != ':' && s[pos] != ',' && s[pos] != '}') ++pos;
            if (peek() != ':') fail(line_no, "expected ':' in flow mapping");
            std::string key(s.substr(start, pos - start));
            while (!key.empty() && key.back() == ' ') key.pop_back();
            ++pos; // ':'
            node.entries().emplace_back(std::move(key), parse_value());
            skip_ws();
            char c = peek();
            if (c == ',') {
                ++pos;
                continue;
            }
            if (c == '}') {
                ++pos;
                return node;
            }
            fail(line_no, "expected ',' or '}' in flow mapping");
        }
    }
};

Node parse_flow_or_scalar(std::string_view text, std::size_t line_no) {
    FlowParser fp{text, 0, line_no};
    Node node = fp.parse_value();
    fp.skip_ws();
    if (fp.pos != text.size()) fail(line_no, "trailing characters after value");
    return node;
}

// Splits "key: rest" at block level. Returns key and the remainder (may be
// empty when the value is a nested block).
std::optional<std::pair<std::string, std::string>> split_key(const std::string& content) {
    char quote = 0;
    int depth = 0;
    for (std::size_t i = 0; i < content.size(); ++i) {
        char c = content[i];
        if (quote != 0) {
            if (c == quote) quote = 0;
            continue;
        }
        if (c == '\'' || c == '"') {
            quote = c;
            continue;
        }
        if (c == '[' || c == '{') ++depth;
        if (c == ']' || c == '}') --depth;
        if (c == ':' && depth == 0 && (i + 1 == content.size() || content[i + 1] == ' ')) {
            std::string key = content.substr(0, i);
            while (!key.empty() && key.back() == ' ') key.pop_back();
            std::string rest = i + 1 < content.size() ? content.substr(i + 2) : std::string();
            std::size_t lead = rest.find_first_not_of(' ');
            rest = lead == std::string::npos ? std::string() : rest.substr(lead);
            if (key.empty()) return std::nullopt;
            return std::make_pair(std::move(key), std::move(rest));
        }
    }
    return std::nullopt;
}

struct BlockParser {
    const std::vector<Line>& lines;
    std::size_t cursor = 0;

    const Line* peek() const { return cursor < lines.size() ? &lines[cursor] : nullptr; }

    Node parse_block(std::size_t indent) {
        const Line* first = peek();
        if (first == nullptr || first->indent < indent) return Node::make_null();
        if (first->content[0] == '-' &&
            (first->content.size() == 1 || first->content[1] == ' ')) {
            return parse_sequence(first->indent);
        }
        if (split_key(first->content).has_value()) return parse_mapping(first->indent);
        Node value = parse_flow_or_scalar(first->content, first->number);
        ++cursor;
        return value;
    }

    Node parse_sequence(std::size_t indent) {
        Node node = Node::make_sequence();
        while (const Line* line = peek()) {
            if (line->indent != indent) {
                if (line->indent > indent) fail(line->number, "unexpected indentation");
                break;
            }
            if (line->content[0] != '-' ||
                (line->content.size() > 1 && line->content[1] != ' ')) {
                break;
            }
            std::string rest = line->content.size() > 1 ? line->content.substr(2) : std::string();
            std::size_t lead = rest.find_first_not_of(' ');
            rest = lead == std::string::npos ? std::string() : rest.substr(lead);
            std::size_t line_no = line->number;
            ++cursor;
            if (rest.empty()) {
                const Line* next = peek();
                if (next != nullptr && next->indent > indent) {
                    node.items().push_back(parse_block(next->indent));
                } else {
                    node.items().push_back(Node::make_null());
                }
            } else if (split_key(rest).has_value()) {
                fail(line_no, "inline mappings in sequence entries are not supported");
            } else {
                node.items().push_back(parse_flow_or_scalar(rest, line_no));
            }
        }
        return node;
    }

    Node parse_mapping(std::size_t indent) {
        Node node = Node::make_mapping();
        while (const Line* line = peek()) {
            if (line->indent != indent) {
                if (line->indent > indent) fail(line->number, "unexpected indentation");
                break;
            }
            auto kv = split_key(line->content);
            if (!kv.has_value()) fail(line->number, "expected 'key: value'");
            for (const auto& [existing, unused] : node.entries()) {
                (void)unused;
                if (existing == kv->first) fail(line->number, "duplicate key '" + kv->first + "'");
            }
            std::size_t line_no = line->number;
            ++cursor;
            if (kv->second.empty()) {
                const Line* next = peek();
                if (next != nullptr && next->indent > indent) {
                    node.entries().emplace_back(kv->first, parse_block(next->indent));
                } else {
                    node.entries().emplace_back(kv->first, Node::make_null());
                }
            } else {
                if (kv->second[0] == '&' || kv->second[0] == '*')
                    fail(line_no, "anchors and aliases are not supported");
                if (kv->second[0] == '!') fail(line_no, "tags are not supported");
                if (kv->second[0] == '|' || kv->second[0] == '>')
                    fail(line_no, "block scalars are not supported");
                node.entries().emplace_back(kv->first, parse_flow_or_scalar(kv->second, line_no));
            }
        }
        return node;
    }
};

} // namespace

Node Node::make_bool(bool v) {
    Node n;
    n.type_ = Type::Bool;
    n.bool_ = v;
    return n;
}

Node Node::make_int(std::int64_t v) {
    Node n;
    n.type_ = Type::Int;
    n.int_ = v;
    return n;
}

Node Node::make_float(double v) {
    Node n;
    n.type_ = Type::Float;
    n.float_ = v;
    return n;
}

Node Node::make_string(std::string v) {
    Node n;
    n.type_ = Type::String;
    n.str_ = std::move(v);
    return n;
}

Node Node::make_sequence() {
    Node n;
    n.type_ = Type::Sequence;
    return n;
}

Node Node::make_mapping() {
    Node n;
    n.type_ = Type::Mapping;
    return n;
}

bool Node::as_bool() const {
    if (type_ != Type::Bool) raise(ErrorCode::MalformedDocument, "expected a boolean");
    return bool_;
}

std::int64_t Node::as_int() const {
    if (type_ != Type::Int) raise(ErrorCode::MalformedDocument, "expected an integer");
    return int_;
}

double Node::as_float() const {
    if (type_ == Type::Int) return static_cast<double>(int_);
    if (type_ != Type::Float) raise(ErrorCode::MalformedDocument, "expected a number");
    return float_;
}

const std::string& Node::as_string() const {
    if (type_ != Type::String) raise(ErrorCode::MalformedDocument, "expected a string");
    return str_;
}

const std::vector<Node>& Node::items() const {
    if (type_ != Type::Sequence) raise(ErrorCode::MalformedDocument, "expected a sequence");
    return seq_;
}

std::vector<Node>& Node::items() {
    if (type_ != Type::Sequence) raise(ErrorCode::MalformedDocument, "expected a sequence");
    return seq_;
}

const std::vector<std::pair<std::string, Node>>& Node::entries() const {
    if (type_ != Type::Mapping) raise(ErrorCode::MalformedDocument, "expected a mapping");
    return map_;
}

std::vector<std::pair<std::string, Node>>& Node::entries() {
    if (type_ != Type::Mapping) raise(ErrorCode::MalformedDocument, "expected a mapping");
    return map_;
}

const Node* Node::find(std::string_view key) const {
    if (type_ != Type::Mapping) return nullptr;
    for (const auto& [k, v] : map_) {
        if (k == key) return &v;
    }
    return nullptr;
}

Node parse(std::string_view text) {
    std::vector<Line> lines = split_lines(text);
    if (lines.empty()) raise(ErrorCode::MalformedDocument, "empty document");
    BlockParser bp{lines};
    Node root = bp.parse_block(lines.front().indent);
    if (const Line* left = bp.peek()) fail(left->number, "content outside the root block");
    return root;
}

} // namespace archbench::yaml
