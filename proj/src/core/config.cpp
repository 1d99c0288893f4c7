#include "core/config.hpp"

#include "core/catalog.hpp"
#include "core/errors.hpp"
#include "core/yaml.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace archbench::config {

namespace {

bool bare_string_ok(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '.' || c == '-';
    });
}

std::string scalar_to_flow(const yaml::Node& n) {
    switch (n.type()) {
        case yaml::Node::Type::Null: return "None";
        case yaml::Node::Type::Bool: return n.as_bool() ? "True" : "False";
        case yaml::Node::Type::Int: return std::to_string(n.as_int());
        case yaml::Node::Type::Float: return arg_to_string(Arg(n.as_float()));
        case yaml::Node::Type::String: {
            const std::string& s = n.as_string();
            return bare_string_ok(s) ? s : "'" + s + "'";
        }
        default: break;
    }
    return "";
}

std::string node_to_flow(const yaml::Node& n) {
    if (n.is_scalar()) return scalar_to_flow(n);
    std::string out;
    if (n.type() == yaml::Node::Type::Sequence) {
        out += "[";
        bool first = true;
        for (const auto& item : n.items()) {
            if (!first) out += ", ";
            first = false;
            out += node_to_flow(item);
        }
        out += "]";
    } else {
        out += "{";
        bool first = true;
        for (const auto& [k, v] : n.entries()) {
            if (!first) out += ", ";
            first = false;
            out += k + ": " + node_to_flow(v);
        }
        out += "}";
    }
    return out;
}

Arg arg_from_node(const yaml::Node& n, std::int64_t nc) {
    switch (n.type()) {
        case yaml::Node::Type::Null: return Arg(std::monostate{});
        case yaml::Node::Type::Bool: return Arg(n.as_bool());
        case yaml::Node::Type::Int: return Arg(n.as_int());
        case yaml::Node::Type::Float: return Arg(n.as_float());
        case yaml::Node::Type::String: {
            const std::string& s = n.as_string();
            if (s == "nc") return Arg(nc); // symbolic class count
            return Arg(s);
        }
        default:
            raise(ErrorCode::MalformedDocument, "nested collections are not valid layer arguments");
    }
}

LayerEntry parse_entry(const yaml::Node& node, std::int64_t nc, const char* section, std::size_t pos) {
    const std::string where = std::string(section) + "[" + std::to_string(pos) + "]";
    if (node.type() != yaml::Node::Type::Sequence || node.items().size() != 4)
        raise(ErrorCode::MalformedDocument, where + ": expected [from, number, module, args]");
    const auto& items = node.items();

    LayerEntry entry;
    if (items[0].type() == yaml::Node::Type::Int) {
        entry.from.push_back(static_cast<int>(items[0].as_int()));
        entry.from_is_scalar = true;
    } else if (items[0].type() == yaml::Node::Type::Sequence) {
        entry.from_is_scalar = false;
        for (const auto& f : items[0].items()) {
            if (f.type() != yaml::Node::Type::Int)
                raise(ErrorCode::MalformedDocument, where + ": 'from' entries must be integers");
            entry.from.push_back(static_cast<int>(f.as_int()));
        }
        if (entry.from.empty())
            raise(ErrorCode::MalformedDocument, where + ": 'from' list is empty");
    } else {
        raise(ErrorCode::MalformedDocument, where + ": 'from' must be an index or index list");
    }

    if (items[1].type() != yaml::Node::Type::Int || items[1].as_int() < 1)
        raise(ErrorCode::MalformedDocument, where + ": repeat count must be an integer >= 1");
    entry.number = static_cast<int>(items[1].as_int());

    if (items[2].type() != yaml::Node::Type::String)
        raise(ErrorCode::MalformedDocument, where + ": module name must be a string");
    const std::string& module_name = items[2].as_string();
    auto kind = module_kind_from_name(module_name);
    if (!kind.has_value())
        raise(ErrorCode::UnknownModule, where + ": '" + module_name + "' is not a known module");
    entry.kind = *kind;

    if (items[3].type() != yaml::Node::Type::Sequence)
        raise(ErrorCode::MalformedDocument, where + ": args must be a list");
    for (const auto& a : items[3].items()) entry.args.push_back(arg_from_node(a, nc));
    return entry;
}

void check_from_indices(const ModelSpec& spec) {
    const std::size_t total = spec.layer_count();
    for (std::size_t i = 0; i < total; ++i) {
        const LayerEntry& entry =
            i < spec.backbone.size() ? spec.backbone[i] : spec.head[i - spec.backbone.size()];
        for (int f : entry.from) {
            if (f == -1) continue;
            if (f < 0 || static_cast<std::size_t>(f) >= i)
                raise(ErrorCode::BadFromIndex,
                      "layer " + std::to_string(i) + " references layer " + std::to_string(f) +
                          ", which is not an earlier layer");
        }
    }
}

const LayerEntry& entry_at(const ModelSpec& spec, std::size_t i) {
    return i < spec.backbone.size() ? spec.backbone[i] : spec.head[i - spec.backbone.size()];
}

bool kind_has_channel_arg(ModuleKind kind) {
    switch (kind) {
        case ModuleKind::Conv:
        case ModuleKind::C2f:
        case ModuleKind::Bottleneck:
        case ModuleKind::SPPF:
        case ModuleKind::GhostConv:
        case ModuleKind::GhostBottleneck:
            return true;
        default:
            return false;
    }
}

std::string entry_to_flow(const LayerEntry& entry) {
    std::string out = "[";
    if (entry.from_is_scalar && entry.from.size() == 1) {
        out += std::to_string(entry.from[0]);
    } else {
        out += "[";
        for (std::size_t i = 0; i < entry.from.size(); ++i) {
            if (i > 0) out += ", ";
            out += std::to_string(entry.from[i]);
        }
        out += "]";
    }
    out += ", " + std::to_string(entry.number) + ", " + module_kind_name(entry.kind) + ", [";
    for (std::size_t i = 0; i < entry.args.size(); ++i) {
        if (i > 0) out += ", ";
        const Arg& a = entry.args[i];
        if (const std::string* s = std::get_if<std::string>(&a)) {
            out += bare_string_ok(*s) ? *s : "'" + *s + "'";
        } else {
            out += arg_to_string(a);
        }
    }
    out += "]]";
    return out;
}

} // namespace

std::int64_t round_channels(double value) {
    std::int64_t unit = 8;
    std::int64_t rounded = std::llround(value / static_cast<double>(unit)) * unit;
    return std::max<std::int64_t>(unit, rounded);
}

ModelSpec parse_model_config(const std::string& text) {
    yaml::Node root = yaml::parse(text);
    if (root.type() != yaml::Node::Type::Mapping)
        raise(ErrorCode::MalformedDocument, "top level must be a mapping");

    const yaml::Node* nc_node = root.find("nc");
    if (nc_node == nullptr) raise(ErrorCode::MissingField, "'nc' is required");
    if (nc_node->type() != yaml::Node::Type::Int || nc_node->as_int() < 1)
        raise(ErrorCode::MalformedDocument, "'nc' must be an integer >= 1");

    ModelSpec spec;
    spec.nc = nc_node->as_int();

    if (const yaml::Node* name_node = root.find("name")) {
        if (name_node->type() != yaml::Node::Type::String)
            raise(ErrorCode::MalformedDocument, "'name' must be a string");
        spec.name = name_node->as_string();
    }

    if (const yaml::Node* scales_node = root.find("scales")) {
        if (scales_node->type() != yaml::Node::Type::Mapping)
            raise(ErrorCode::MalformedDocument, "'scales' must be a mapping");
        for (const auto& [key, value] : scales_node->entries()) {
            if (value.type() != yaml::Node::Type::Sequence || value.items().size() != 3)
                raise(ErrorCode::MalformedDocument,
                      "scale '" + key + "' must be [depth, width, max_channels]");
            Scale s;
            s.depth = value.items()[0].as_float();
            s.width = value.items()[1].as_float();
            if (value.items()[2].type() != yaml::Node::Type::Int)
                raise(ErrorCode::MalformedDocument, "scale '" + key + "': max_channels must be an integer");
            s.max_channels = value.items()[2].as_int();
            if (s.depth <= 0 || s.width <= 0 || s.max_channels < 1)
                raise(ErrorCode::MalformedDocument, "scale '" + key + "': ratios must be positive");
            spec.scales.emplace_back(key, s);
        }
    }

    auto parse_section = [&](const char* key, std::vector<LayerEntry>& out) {
        const yaml::Node* section = root.find(key);
        if (section == nullptr || section->type() != yaml::Node::Type::Sequence ||
            section->items().empty())
            raise(ErrorCode::MissingField, std::string("'") + key + "' must be a non-empty list");
        for (std::size_t i = 0; i < section->items().size(); ++i)
            out.push_back(parse_entry(section->items()[i], spec.nc, key, i));
    };
    parse_section("backbone", spec.backbone);
    parse_section("head", spec.head);

    for (const auto& [key, value] : root.entries()) {
        if (key == "nc" || key == "name" || key == "scales" || key == "backbone" || key == "head")
            continue;
        spec.extras.push_back(ExtraKey{key, node_to_flow(value)});
    }

    check_from_indices(spec);
    return spec;
}

ScaledModelSpec resolve_scale(const ModelSpec& spec, const std::string& scale_key) {
    ScaledModelSpec scaled;
    scaled.spec = spec;

    if (spec.scales.empty()) {
        scaled.scale_key = scale_key;
        scaled.scale = Scale{}; // identity
    } else if (!scale_key.empty()) {
        auto it = std::find_if(spec.scales.begin(), spec.scales.end(),
                               [&](const auto& kv) { return kv.first == scale_key; });
        if (it == spec.scales.end())
            raise(ErrorCode::UnknownScale, "scale '" + scale_key + "' is not defined");
        scaled.scale_key = scale_key;
        scaled.scale = it->second;
    } else if (spec.scales.size() == 1) {
        scaled.scale_key = spec.scales.front().first;
        scaled.scale = spec.scales.front().second;
    } else {
        auto it = std::find_if(spec.scales.begin(), spec.scales.end(),
                               [](const auto& kv) { return kv.first == "n"; });
        if (it == spec.scales.end())
            raise(ErrorCode::UnknownScale, "no scale key given and several scales are defined");
        scaled.scale_key = it->first;
        scaled.scale = it->second;
    }

    const Scale& s = scaled.scale;
    auto apply = [&](LayerEntry& entry) {
        entry.number = static_cast<int>(
            std::max<std::int64_t>(1, std::llround(entry.number * s.depth)));
        if (kind_has_channel_arg(entry.kind) && !entry.args.empty()) {
            if (const std::int64_t* c = std::get_if<std::int64_t>(&entry.args[0])) {
                double target = static_cast<double>(std::min(*c, s.max_channels)) * s.width;
                entry.args[0] = Arg(round_channels(target));
            }
        }
    };
    for (LayerEntry& e : scaled.spec.backbone) apply(e);
    for (LayerEntry& e : scaled.spec.head) apply(e);
    return scaled;
}

ValidationReport validate_model_spec(const ScaledModelSpec& scaled) {
    const ModelSpec& spec = scaled.spec;
    ValidationReport report;
    const std::size_t total = spec.layer_count();
    if (total == 0) return report;

    std::vector<bool> referenced(total, false);
    for (std::size_t i = 0; i < total; ++i) {
        for (int f : entry_at(spec, i).from) {
            std::int64_t target = f == -1 ? static_cast<std::int64_t>(i) - 1 : f;
            if (target >= 0 && static_cast<std::size_t>(target) < total)
                referenced[static_cast<std::size_t>(target)] = true;
        }
    }
    for (std::size_t i = 0; i + 1 < total; ++i) {
        if (!referenced[i])
            report.findings.push_back(
                {"unreachable-layer", static_cast<int>(i),
                 "layer " + std::to_string(i) + " is never consumed"});
    }

    for (std::size_t i = 0; i < total; ++i) {
        const LayerEntry& entry = entry_at(spec, i);
        if (entry.kind == ModuleKind::Detect && i + 1 != total)
            report.findings.push_back({"detect-not-last", static_cast<int>(i),
                                       "Detect at layer " + std::to_string(i) + " is not final"});
        if (entry.kind == ModuleKind::Concat && entry.from.size() < 2)
            report.findings.push_back({"degenerate-concat", static_cast<int>(i),
                                       "Concat at layer " + std::to_string(i) +
                                           " has a single input"});
        if (entry.kind == ModuleKind::Index) {
            std::string problem;
            if (entry.from.size() != 1 || entry.args.size() != 2 ||
                !std::holds_alternative<std::int64_t>(entry.args[0]) ||
                !std::holds_alternative<std::int64_t>(entry.args[1])) {
                problem = "Index expects one producer and [channels, tap] args";
            } else {
                std::int64_t target =
                    entry.from[0] == -1 ? static_cast<std::int64_t>(i) - 1 : entry.from[0];
                if (target < 0 || entry_at(spec, static_cast<std::size_t>(target)).kind !=
                                      ModuleKind::TorchBackbone) {
                    problem = "Index producer is not a TorchBackbone layer";
                } else {
                    const LayerEntry& producer = entry_at(spec, static_cast<std::size_t>(target));
                    const std::string* tpl_name =
                        producer.args.size() >= 2 ? std::get_if<std::string>(&producer.args[1])
                                                  : nullptr;
                    if (tpl_name == nullptr) {
                        problem = "TorchBackbone producer is missing its template name";
                    } else {
                        try {
                            const catalog::BackboneTemplate& tpl =
                                catalog::backbone_template(*tpl_name);
                            std::int64_t tap = std::get<std::int64_t>(entry.args[1]);
                            const catalog::BackboneTap* found = tpl.find_tap(tap);
                            if (found == nullptr) {
                                problem = "tap " + std::to_string(tap) + " is not published by '" +
                                          *tpl_name + "'";
                            } else if (found->channels !=
                                       std::get<std::int64_t>(entry.args[0])) {
                                problem = "declared channels do not match tap " +
                                          std::to_string(tap) + " of '" + *tpl_name + "'";
                            }
                        } catch (const Error& e) {
                            problem = e.what();
                        }
                    }
                }
            }
            if (!problem.empty())
                report.findings.push_back({"bad-index-tap", static_cast<int>(i), problem});
        }
    }
    return report;
}

std::string serialize(const ModelSpec& spec) {
    std::ostringstream out;
    out << "nc: " << spec.nc << "\n";
    if (!spec.scales.empty()) {
        out << "scales:\n";
        for (const auto& [key, s] : spec.scales) {
            out << "  " << key << ": [" << arg_to_string(Arg(s.depth)) << ", "
                << arg_to_string(Arg(s.width)) << ", " << s.max_channels << "]\n";
        }
    }
    out << "backbone:\n";
    for (const LayerEntry& e : spec.backbone) out << "  - " << entry_to_flow(e) << "\n";
    out << "head:\n";
    for (const LayerEntry& e : spec.head) out << "  - " << entry_to_flow(e) << "\n";
    if (!spec.name.empty()) out << "name: " << spec.name << "\n";
    for (const ExtraKey& extra : spec.extras) out << extra.key << ": " << extra.raw_value << "\n";
    return out.str();
}

} // namespace archbench::config
