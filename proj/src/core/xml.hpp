#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace archbench::xml {

// Element tree for the XML subset used by annotation files: elements,
// attributes, text (discarded), comments, declarations and the five
// predefined entities. No namespaces, CDATA or DTDs.
struct Element {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<Element> children;

    const std::string* attribute(std::string_view key) const;
    const Element* child(std::string_view name) const;
    std::vector<const Element*> children_named(std::string_view name) const;
};

// Parses one document; throws Error(MalformedXml) on anything else.
Element parse(std::string_view text);

} // namespace archbench::xml
