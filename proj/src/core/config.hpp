#pragma once

#include "core/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace archbench::config {

// One [from, number, module, args] entry of a model config.
struct LayerEntry {
    std::vector<int> from;  // -1 means previous layer (model input for layer 0)
    bool from_is_scalar = true;
    int number = 1;
    ModuleKind kind = ModuleKind::Conv;
    std::vector<Arg> args;

    bool operator==(const LayerEntry&) const = default;
};

struct Scale {
    double depth = 1.0;
    double width = 1.0;
    std::int64_t max_channels = 1 << 20;

    bool operator==(const Scale&) const = default;
};

// Unknown top-level keys are carried through parsing untouched so the
// canonical serialization round-trips.
struct ExtraKey {
    std::string key;
    std::string raw_value; // re-emitted verbatim (always a one-line scalar/flow form)

    bool operator==(const ExtraKey&) const = default;
};

struct ModelSpec {
    std::string name;
    std::int64_t nc = 0;
    std::vector<std::pair<std::string, Scale>> scales;
    std::vector<LayerEntry> backbone;
    std::vector<LayerEntry> head;
    std::vector<ExtraKey> extras;

    std::size_t layer_count() const { return backbone.size() + head.size(); }
    bool operator==(const ModelSpec&) const = default;
};

// A ModelSpec with one scale applied: channel args rounded to the unit,
// repeat counts scaled.
struct ScaledModelSpec {
    ModelSpec spec;
    std::string scale_key;
    Scale scale;
};

struct Finding {
    std::string code;   // unreachable-layer | detect-not-last | degenerate-concat | bad-index-tap
    int layer = -1;
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> findings;
    bool ok() const { return findings.empty(); }
};

ModelSpec parse_model_config(const std::string& text);

// Rounds a channel count to the nearest multiple of 8, never below 8.
std::int64_t round_channels(double value);

// Applies the named scale. An empty key resolves to the single defined
// scale, or to "n" when several are defined. Specs without a scales table
// resolve to the identity scale.
ScaledModelSpec resolve_scale(const ModelSpec& spec, const std::string& scale_key);

ValidationReport validate_model_spec(const ScaledModelSpec& scaled);

// Canonical serialization: nc, scales, backbone, head, then name and any
// retained unknown keys.
std::string serialize(const ModelSpec& spec);

} // namespace archbench::config
