#include "core/types.hpp"

#include <array>
#include <charconv>

namespace archbench {

bool arg_is_null(const Arg& a) {
    return std::holds_alternative<std::monostate>(a);
}

std::string arg_to_string(const Arg& a) {
    if (std::holds_alternative<std::monostate>(a)) return "None";
    if (const bool* b = std::get_if<bool>(&a)) return *b ? "True" : "False";
    if (const std::int64_t* i = std::get_if<std::int64_t>(&a)) return std::to_string(*i);
    if (const double* d = std::get_if<double>(&a)) {
        std::array<char, 32> buf{};
        auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), *d);
        (void)ec;
        return std::string(buf.data(), p);
    }
    return std::get<std::string>(a);
}

namespace {

struct KindName {
    std::string_view name;
    ModuleKind kind;
};

// Aliases cover the spellings used by stock model configs.
constexpr std::array<KindName, 15> kKindNames{{
    {"Conv", ModuleKind::Conv},
    {"C2f", ModuleKind::C2f},
    {"Bottleneck", ModuleKind::Bottleneck},
    {"SPPF", ModuleKind::SPPF},
    {"Upsample", ModuleKind::Upsample},
    {"nn.Upsample", ModuleKind::Upsample},
    {"Concat", ModuleKind::Concat},
    {"Detect", ModuleKind::Detect},
    {"GhostConv", ModuleKind::GhostConv},
    {"GhostBottleneck", ModuleKind::GhostBottleneck},
    {"Index", ModuleKind::Index},
    {"TorchBackbone", ModuleKind::TorchBackbone},
    {"TorchVision", ModuleKind::TorchBackbone},
    {"MaxPool", ModuleKind::MaxPool},
    {"nn.MaxPool2d", ModuleKind::MaxPool},
}};

} // namespace

std::optional<ModuleKind> module_kind_from_name(std::string_view name) {
    for (const auto& kn : kKindNames) {
        if (kn.name == name) return kn.kind;
    }
    return std::nullopt;
}

const char* module_kind_name(ModuleKind kind) {
    switch (kind) {
        case ModuleKind::Conv: return "Conv";
        case ModuleKind::C2f: return "C2f";
        case ModuleKind::Bottleneck: return "Bottleneck";
        case ModuleKind::SPPF: return "SPPF";
        case ModuleKind::Upsample: return "Upsample";
        case ModuleKind::Concat: return "Concat";
        case ModuleKind::Detect: return "Detect";
        case ModuleKind::GhostConv: return "GhostConv";
        case ModuleKind::GhostBottleneck: return "GhostBottleneck";
        case ModuleKind::Index: return "Index";
        case ModuleKind::TorchBackbone: return "TorchBackbone";
        case ModuleKind::MaxPool: return "MaxPool";
    }
    return "?";
}

std::string TensorShape::to_string() const {
    return "(" + std::to_string(channels) + ", " + std::to_string(height) + ", " +
           std::to_string(width) + ")";
}

} // namespace archbench
