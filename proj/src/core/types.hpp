#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace archbench {

// Heterogeneous layer argument: None, bool, integer, float or string.
// Declaration order matters for holds_alternative checks.
using Arg = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

bool arg_is_null(const Arg& a);
std::string arg_to_string(const Arg& a);

enum class ModuleKind {
    Conv,
    C2f,
    Bottleneck,
    SPPF,
    Upsample,
    Concat,
    Detect,
    GhostConv,
    GhostBottleneck,
    Index,
    TorchBackbone,
    MaxPool,
};

std::optional<ModuleKind> module_kind_from_name(std::string_view name);
const char* module_kind_name(ModuleKind kind);

// Channel-height-width shape of one feature map.
struct TensorShape {
    std::int64_t channels = 0;
    std::int64_t height = 0;
    std::int64_t width = 0;

    bool operator==(const TensorShape&) const = default;
    std::string to_string() const;
};

} // namespace archbench
