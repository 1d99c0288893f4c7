#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace archbench::yaml {

// Minimal YAML document tree covering the subset used by model configs:
// block mappings, block sequences, one-line flow collections, plain and
// quoted scalars, comments. Anchors, aliases, tags, block scalars and
// multi-document streams are rejected at parse time.
class Node {
public:
    enum class Type { Null, Bool, Int, Float, String, Sequence, Mapping };

    Node() : type_(Type::Null) {}

    static Node make_null() { return Node(); }
    static Node make_bool(bool v);
    static Node make_int(std::int64_t v);
    static Node make_float(double v);
    static Node make_string(std::string v);
    static Node make_sequence();
    static Node make_mapping();

    Type type() const { return type_; }
    bool is_scalar() const { return type_ != Type::Sequence && type_ != Type::Mapping; }

    bool as_bool() const;
    std::int64_t as_int() const;
    double as_float() const; // accepts Int nodes too
    const std::string& as_string() const;

    const std::vector<Node>& items() const;
    std::vector<Node>& items();
    const std::vector<std::pair<std::string, Node>>& entries() const;
    std::vector<std::pair<std::string, Node>>& entries();

    const Node* find(std::string_view key) const; // mapping lookup, nullptr if absent

private:
    Type type_;
    bool bool_ = false;
    std::int64_t int_ = 0;
    double float_ = 0.0;
    std::string str_;
    std::vector<Node> seq_;
    std::vector<std::pair<std::string, Node>> map_;
};

// Parses one document. Throws Error(MalformedDocument) on anything outside
// the supported subset.
Node parse(std::string_view text);

} // namespace archbench::yaml
