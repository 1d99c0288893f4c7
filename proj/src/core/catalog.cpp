#include "core/catalog.hpp"

#include "core/errors.hpp"

#include "backbone_tables_data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

namespace archbench::catalog {

namespace {

constexpr int kRegMax = 16;      // distribution-focal bins per box side
constexpr int kGhostRatio = 2;   // intrinsic-to-total channel ratio
constexpr int kGhostCheapK = 5;  // depthwise kernel of the cheap ghost op

void check_shape(const TensorShape& s, const char* what) {
    if (s.channels < 1 || s.height < 1 || s.width < 1)
        raise(ErrorCode::DegenerateShape, std::string(what) + " " + s.to_string());
}

std::int64_t spatial(const TensorShape& s) { return s.height * s.width; }

struct Cost {
    std::int64_t params = 0;
    std::int64_t macs = 0;
    std::int64_t leaves = 0;

    Cost& operator+=(const Cost& other) {
        params += other.params;
        macs += other.macs;
        leaves += other.leaves;
        return *this;
    }
};

// Convolution without bias followed by batch norm (2 * c_out scalars).
Cost conv_bn(std::int64_t c_in, std::int64_t c_out, int k, std::int64_t hw_out) {
    Cost c;
    c.params = c_in * k * k * c_out + 2 * c_out;
    c.macs = c_in * k * k * c_out * hw_out;
    c.leaves = 1;
    return c;
}

Cost conv_bias(std::int64_t c_in, std::int64_t c_out, int k, std::int64_t hw_out) {
    Cost c;
    c.params = c_in * k * k * c_out + c_out;
    c.macs = c_in * k * k * c_out * hw_out;
    c.leaves = 1;
    return c;
}

// Depthwise convolution with batch norm.
Cost dwconv_bn(std::int64_t channels, int k, std::int64_t hw_out) {
    Cost c;
    c.params = channels * k * k + 2 * channels;
    c.macs = channels * k * k * hw_out;
    c.leaves = 1;
    return c;
}

// Squeeze-and-excitation pair of biased 1x1 convolutions. Operates on a
// globally pooled map, so its FLOPs fall under the zero-cost convention.
Cost se_block(std::int64_t channels, std::int64_t squeeze) {
    Cost c;
    c.params = channels * squeeze + squeeze + squeeze * channels + channels;
    c.macs = 0;
    c.leaves = 2;
    return c;
}

std::int64_t arg_int(const std::vector<Arg>& args, std::size_t i, const char* what) {
    if (i >= args.size() || !std::holds_alternative<std::int64_t>(args[i]))
        raise(ErrorCode::ArityMismatch, std::string(what) + ": integer argument " +
                                            std::to_string(i) + " is required");
    return std::get<std::int64_t>(args[i]);
}

std::int64_t arg_int_or(const std::vector<Arg>& args, std::size_t i, std::int64_t fallback) {
    if (i >= args.size()) return fallback;
    if (const std::int64_t* v = std::get_if<std::int64_t>(&args[i])) return *v;
    return fallback;
}

TensorShape pool_output_shape(const TensorShape& in, int k, int s) {
    int p = (k % 2 == 1) ? k / 2 : 0;
    std::int64_t h = (in.height + 2 * p - k) / s + 1;
    std::int64_t w = (in.width + 2 * p - k) / s + 1;
    TensorShape out{in.channels, h, w};
    check_shape(out, "pooled shape");
    return out;
}

ModuleStats ghost_conv_stats(std::int64_t c_in, std::int64_t c_out, int k, int s,
                             const TensorShape& in) {
    if (c_out % kGhostRatio != 0)
        raise(ErrorCode::IndivisibleChannels,
              "GhostConv output channels " + std::to_string(c_out) + " not divisible by " +
                  std::to_string(kGhostRatio));
    TensorShape out = conv_output_shape(in, c_out, k, s);
    std::int64_t m = c_out / kGhostRatio;
    std::int64_t hw = spatial(out);

    ModuleStats stats;
    Cost primary = conv_bn(c_in, m, k, hw);
    Cost cheap = dwconv_bn(m, kGhostCheapK, hw);
    // The ghost half carries (c_out - m) = m maps, each from one cheap op.
    cheap.params = (kGhostRatio - 1) * m * kGhostCheapK * kGhostCheapK + 2 * (c_out - m);
    cheap.macs = (kGhostRatio - 1) * m * kGhostCheapK * kGhostCheapK * hw;
    stats.params = primary.params + cheap.params;
    stats.flops = 2 * (primary.macs + cheap.macs);
    stats.out_shapes = {out};
    stats.leaf_modules = 3; // primary conv, cheap op, stacking concat
    return stats;
}

ModuleStats ghost_bottleneck_stats(std::int64_t c_in, std::int64_t c_out, int k, int s,
                                   const TensorShape& in) {
    std::int64_t mid = c_out / 2;
    if (c_out % 2 != 0 || mid % 2 != 0)
        raise(ErrorCode::IndivisibleChannels,
              "GhostBottleneck output channels " + std::to_string(c_out) +
                  " must be divisible by 4");

    ModuleStats g1 = ghost_conv_stats(c_in, mid, 1, 1, in);
    TensorShape after = g1.out();
    Cost dw;
    if (s == 2) {
        after = conv_output_shape(after, mid, k, 2);
        dw = dwconv_bn(mid, k, spatial(after));
    }
    ModuleStats g2 = ghost_conv_stats(mid, c_out, 1, 1, after);
    TensorShape out = g2.out();

    Cost shortcut;
    if (s != 1 || c_in != c_out) {
        shortcut += dwconv_bn(c_in, k, spatial(out));
        shortcut += conv_bn(c_in, c_out, 1, spatial(out));
    }

    ModuleStats stats;
    stats.params = g1.params + dw.params + g2.params + shortcut.params;
    stats.flops = g1.flops + 2 * dw.macs + g2.flops + 2 * shortcut.macs;
    stats.out_shapes = {out};
    stats.leaf_modules = g1.leaf_modules + g2.leaf_modules + dw.leaves + shortcut.leaves;
    return stats;
}

ModuleStats detect_stats(std::int64_t nc, const std::vector<TensorShape>& ins) {
    if (ins.empty()) raise(ErrorCode::ArityMismatch, "Detect requires at least one input");
    std::int64_t ch0 = ins[0].channels;
    std::int64_t box_width = std::max<std::int64_t>({16, ch0 / 4, 4 * kRegMax});
    std::int64_t cls_width = std::max<std::int64_t>(ch0, std::min<std::int64_t>(nc, 100));

    ModuleStats stats;
    for (const TensorShape& in : ins) {
        std::int64_t hw = spatial(in);
        Cost scale;
        scale += conv_bn(in.channels, box_width, 3, hw);
        scale += conv_bn(box_width, box_width, 3, hw);
        scale += conv_bias(box_width, 4 * kRegMax, 1, hw);
        scale += conv_bn(in.channels, cls_width, 3, hw);
        scale += conv_bn(cls_width, cls_width, 3, hw);
        scale += conv_bias(cls_width, nc, 1, hw);
        stats.params += scale.params;
        stats.flops += 2 * scale.macs;
        stats.leaf_modules += scale.leaves;
        stats.out_shapes.push_back(in);
    }
    stats.params += kRegMax; // fixed distribution-integral weights
    stats.leaf_modules += 1;
    return stats;
}

// --- backbone template blocks ----------------------------------------------

struct BlockResult {
    Cost cost;
    TensorShape out;
};

BlockResult basic_block(const TensorShape& in, std::int64_t out_ch, int stride) {
    TensorShape out = conv_output_shape(in, out_ch, 3, stride);
    std::int64_t hw = spatial(out);
    BlockResult r;
    r.cost += conv_bn(in.channels, out_ch, 3, hw);
    r.cost += conv_bn(out_ch, out_ch, 3, hw);
    if (stride != 1 || in.channels != out_ch) r.cost += conv_bn(in.channels, out_ch, 1, hw);
    r.out = out;
    return r;
}

BlockResult fused_mbconv(const TensorShape& in, std::int64_t out_ch, int stride, int expand) {
    BlockResult r;
    if (expand == 1) {
        r.out = conv_output_shape(in, out_ch, 3, stride);
        r.cost += conv_bn(in.channels, out_ch, 3, spatial(r.out));
        return r;
    }
    std::int64_t mid = in.channels * expand;
    r.out = conv_output_shape(in, out_ch, 3, stride);
    std::int64_t hw = spatial(r.out);
    r.cost += conv_bn(in.channels, mid, 3, hw); // expansion conv carries the stride
    r.cost += conv_bn(mid, out_ch, 1, hw);
    return r;
}

BlockResult mbconv(const TensorShape& in, std::int64_t out_ch, int stride, int expand) {
    std::int64_t mid = in.channels * expand;
    std::int64_t squeeze = std::max<std::int64_t>(1, in.channels / 4);
    TensorShape out = conv_output_shape(in, out_ch, 3, stride);
    BlockResult r;
    r.cost += conv_bn(in.channels, mid, 1, spatial(in)); // expand before the stride
    r.cost += dwconv_bn(mid, 3, spatial(out));
    r.cost += se_block(mid, squeeze);
    r.cost += conv_bn(mid, out_ch, 1, spatial(out));
    r.out = out;
    return r;
}

BlockResult template_block(const std::string& block, const TensorShape& in, std::int64_t out_ch,
                           int stride) {
    BlockResult r;
    if (block == "conv7x7_bn") {
        r.out = conv_output_shape(in, out_ch, 7, stride);
        r.cost += conv_bn(in.channels, out_ch, 7, spatial(r.out));
    } else if (block == "conv3x3_bn") {
        r.out = conv_output_shape(in, out_ch, 3, stride);
        r.cost += conv_bn(in.channels, out_ch, 3, spatial(r.out));
    } else if (block == "conv3x3_bias") {
        r.out = conv_output_shape(in, out_ch, 3, stride);
        r.cost += conv_bias(in.channels, out_ch, 3, spatial(r.out));
    } else if (block == "maxpool3x3") {
        r.out = pool_output_shape(in, 3, stride);
        r.cost.leaves = 1;
    } else if (block == "maxpool2x2") {
        r.out = pool_output_shape(in, 2, stride);
        r.cost.leaves = 1;
    } else if (block == "basic_block") {
        r = basic_block(in, out_ch, stride);
    } else if (block == "fused_mbconv_e1") {
        r = fused_mbconv(in, out_ch, stride, 1);
    } else if (block == "fused_mbconv_e4") {
        r = fused_mbconv(in, out_ch, stride, 4);
    } else if (block == "mbconv_e4") {
        r = mbconv(in, out_ch, stride, 4);
    } else if (block == "mbconv_e6") {
        r = mbconv(in, out_ch, stride, 6);
    } else {
        raise(ErrorCode::UnknownBackbone, "unknown template block '" + block + "'");
    }
    return r;
}

struct TemplateWalk {
    Cost cost;
    TensorShape shape;
};

// Walks stages up to and including `stop_stage` (npos = all).
TemplateWalk walk_template(const BackboneTemplate& tpl, const TensorShape& in,
                           std::size_t stop_stage) {
    TemplateWalk w;
    w.shape = in;
    check_shape(in, "template input");
    for (std::size_t i = 0; i < tpl.stages.size() && i <= stop_stage; ++i) {
        const BackboneStage& stage = tpl.stages[i];
        for (int r = 0; r < stage.repeats; ++r) {
            int stride = r == 0 ? stage.stride : 1;
            BlockResult block = template_block(stage.block, w.shape, stage.channels, stride);
            w.cost += block.cost;
            w.shape = block.out;
        }
    }
    return w;
}

std::map<std::string, BackboneTemplate>& registry() {
    static std::map<std::string, BackboneTemplate> tables;
    static std::once_flag init;
    std::call_once(init, [] {
        tables.emplace("resnet18", parse_backbone_table("resnet18", embedded::kResnet18));
        tables.emplace("vgg16", parse_backbone_table("vgg16", embedded::kVgg16));
        tables.emplace("efficientnetv2_s",
                       parse_backbone_table("efficientnetv2_s", embedded::kEfficientNetV2S));
    });
    return tables;
}

std::mutex registry_mutex;

} // namespace

TensorShape conv_output_shape(const TensorShape& in, std::int64_t out_channels, int k, int s) {
    check_shape(in, "input shape");
    if (k < 1 || k % 2 == 0)
        raise(ErrorCode::ArityMismatch, "kernel size must be odd, got " + std::to_string(k));
    if (s != 1 && s != 2)
        raise(ErrorCode::ArityMismatch, "stride must be 1 or 2, got " + std::to_string(s));
    int p = k / 2;
    TensorShape out;
    out.channels = out_channels;
    out.height = (in.height + 2 * p - k) / s + 1;
    out.width = (in.width + 2 * p - k) / s + 1;
    check_shape(out, "convolution output");
    return out;
}

ModuleStats ghost_module_stats(std::int64_t c_in, std::int64_t n_out, int k, int d, int s_ratio,
                               const TensorShape& in) {
    if (s_ratio < 2) raise(ErrorCode::ArityMismatch, "ghost ratio must be >= 2");
    if (n_out % s_ratio != 0)
        raise(ErrorCode::IndivisibleChannels, "n_out " + std::to_string(n_out) +
                                                  " not divisible by ratio " +
                                                  std::to_string(s_ratio));
    check_shape(in, "ghost input");
    std::int64_t m = n_out / s_ratio;
    std::int64_t hw = spatial(in);

    ModuleStats stats;
    std::int64_t primary = c_in * k * k * m;
    std::int64_t cheap = static_cast<std::int64_t>(s_ratio - 1) * m * d * d;
    stats.params = primary + 2 * m + cheap + 2 * (n_out - m);
    stats.flops = 2 * (primary + cheap) * hw;
    stats.out_shapes = {TensorShape{n_out, in.height, in.width}};
    stats.leaf_modules = 1 + (s_ratio - 1) + 1;
    return stats;
}

ModuleStats module_stats(ModuleKind kind, const std::vector<Arg>& args,
                         const std::vector<TensorShape>& in_shapes, int repeat) {
    if (kind != ModuleKind::Concat && kind != ModuleKind::Detect && in_shapes.size() != 1)
        raise(ErrorCode::ArityMismatch, std::string(module_kind_name(kind)) +
                                            " takes exactly one input, got " +
                                            std::to_string(in_shapes.size()));
    for (const TensorShape& s : in_shapes) check_shape(s, "input shape");

    switch (kind) {
        case ModuleKind::Conv: {
            std::int64_t c2 = arg_int(args, 0, "Conv");
            int k = static_cast<int>(arg_int_or(args, 1, 1));
            int s = static_cast<int>(arg_int_or(args, 2, 1));
            TensorShape out = conv_output_shape(in_shapes[0], c2, k, s);
            Cost cost = conv_bn(in_shapes[0].channels, c2, k, spatial(out));
            return ModuleStats{cost.params, 2 * cost.macs, {out}, cost.leaves};
        }
        case ModuleKind::C2f: {
            std::int64_t c2 = arg_int(args, 0, "C2f");
            std::int64_t hidden = c2 / 2;
            if (hidden < 1) raise(ErrorCode::ArityMismatch, "C2f output channels too small");
            const TensorShape& in = in_shapes[0];
            std::int64_t hw = spatial(in);
            int n = std::max(1, repeat);
            Cost cost = conv_bn(in.channels, 2 * hidden, 1, hw);
            for (int i = 0; i < n; ++i) {
                cost += conv_bn(hidden, hidden, 3, hw);
                cost += conv_bn(hidden, hidden, 3, hw);
            }
            cost += conv_bn((2 + n) * hidden, c2, 1, hw);
            cost.leaves += 1; // gathering concat
            TensorShape out{c2, in.height, in.width};
            return ModuleStats{cost.params, 2 * cost.macs, {out}, cost.leaves};
        }
        case ModuleKind::Bottleneck: {
            std::int64_t c2 = arg_int(args, 0, "Bottleneck");
            std::int64_t hidden = std::max<std::int64_t>(1, c2 / 2);
            const TensorShape& in = in_shapes[0];
            std::int64_t hw = spatial(in);
            Cost cost = conv_bn(in.channels, hidden, 3, hw);
            cost += conv_bn(hidden, c2, 3, hw);
            TensorShape out{c2, in.height, in.width};
            return ModuleStats{cost.params, 2 * cost.macs, {out}, cost.leaves};
        }
        case ModuleKind::SPPF: {
            std::int64_t c2 = arg_int(args, 0, "SPPF");
            const TensorShape& in = in_shapes[0];
            std::int64_t hidden = in.channels / 2;
            if (hidden < 1) raise(ErrorCode::ArityMismatch, "SPPF input channels too small");
            std::int64_t hw = spatial(in);
            Cost cost = conv_bn(in.channels, hidden, 1, hw);
            cost += conv_bn(4 * hidden, c2, 1, hw);
            cost.leaves += 4; // three chained pools and the gathering concat
            TensorShape out{c2, in.height, in.width};
            return ModuleStats{cost.params, 2 * cost.macs, {out}, cost.leaves};
        }
        case ModuleKind::Upsample: {
            std::int64_t factor = 0;
            for (const Arg& a : args) {
                if (const std::int64_t* v = std::get_if<std::int64_t>(&a)) {
                    factor = *v;
                    break;
                }
                if (const double* v = std::get_if<double>(&a)) {
                    factor = static_cast<std::int64_t>(*v);
                    break;
                }
            }
            if (factor < 1) raise(ErrorCode::ArityMismatch, "Upsample needs a scale factor >= 1");
            const TensorShape& in = in_shapes[0];
            TensorShape out{in.channels, in.height * factor, in.width * factor};
            return ModuleStats{0, 0, {out}, 1};
        }
        case ModuleKind::Concat: {
            if (in_shapes.size() < 2)
                raise(ErrorCode::ArityMismatch, "Concat takes at least two inputs");
            TensorShape out = in_shapes[0];
            for (std::size_t i = 1; i < in_shapes.size(); ++i) {
                if (in_shapes[i].height != out.height || in_shapes[i].width != out.width)
                    raise(ErrorCode::ChannelMismatch,
                          "Concat inputs " + out.to_string() + " and " +
                              in_shapes[i].to_string() + " have unequal extents");
                out.channels += in_shapes[i].channels;
            }
            return ModuleStats{0, 0, {out}, 1};
        }
        case ModuleKind::Detect: {
            std::int64_t nc = arg_int(args, 0, "Detect");
            return detect_stats(nc, in_shapes);
        }
        case ModuleKind::GhostConv: {
            std::int64_t c2 = arg_int(args, 0, "GhostConv");
            int k = static_cast<int>(arg_int_or(args, 1, 1));
            int s = static_cast<int>(arg_int_or(args, 2, 1));
            return ghost_conv_stats(in_shapes[0].channels, c2, k, s, in_shapes[0]);
        }
        case ModuleKind::GhostBottleneck: {
            std::int64_t c2 = arg_int(args, 0, "GhostBottleneck");
            int k = static_cast<int>(arg_int_or(args, 1, 3));
            int s = static_cast<int>(arg_int_or(args, 2, 1));
            return ghost_bottleneck_stats(in_shapes[0].channels, c2, k, s, in_shapes[0]);
        }
        case ModuleKind::MaxPool: {
            int k = static_cast<int>(arg_int(args, 0, "MaxPool"));
            int s = static_cast<int>(arg_int_or(args, 1, k));
            TensorShape out = pool_output_shape(in_shapes[0], k, s);
            return ModuleStats{0, 0, {out}, 1};
        }
        case ModuleKind::Index:
        case ModuleKind::TorchBackbone:
            raise(ErrorCode::ArityMismatch, std::string(module_kind_name(kind)) +
                                                " is resolved by the graph builder");
    }
    raise(ErrorCode::ArityMismatch, "unhandled module kind");
}

const BackboneTap* BackboneTemplate::find_tap(std::int64_t label) const {
    for (const BackboneTap& tap : taps) {
        if (tap.label == label) return &tap;
    }
    return nullptr;
}

BackboneTemplate parse_backbone_table(const std::string& name, const std::string& text) {
    BackboneTemplate tpl;
    tpl.name = name;
    std::istringstream in(text);
    std::string line;
    int total_stride = 1;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream fields(line);
        BackboneStage stage;
        std::string tap;
        if (!(fields >> stage.block)) continue; // blank line
        if (!(fields >> stage.repeats >> stage.channels >> stage.stride >> tap))
            raise(ErrorCode::UnknownBackbone,
                  name + " table line " + std::to_string(line_no) + ": expected 5 columns");
        if (stage.repeats < 1 || stage.channels < 1 || (stage.stride != 1 && stage.stride != 2))
            raise(ErrorCode::UnknownBackbone,
                  name + " table line " + std::to_string(line_no) + ": bad stage values");
        stage.tap = tap == "-" ? -1 : std::stoll(tap);
        total_stride *= stage.stride;
        if (stage.tap >= 0) {
            tpl.taps.push_back(BackboneTap{stage.tap, stage.channels, total_stride,
                                           tpl.stages.size()});
        }
        tpl.stages.push_back(stage);
    }
    if (tpl.stages.empty())
        raise(ErrorCode::UnknownBackbone, name + " table has no stages");
    return tpl;
}

const BackboneTemplate& backbone_template(const std::string& name) {
    std::lock_guard<std::mutex> lock(registry_mutex);
    auto& tables = registry();
    auto it = tables.find(name);
    if (it == tables.end())
        raise(ErrorCode::UnknownBackbone, "'" + name + "' is not a known backbone template");
    return it->second;
}

std::vector<std::string> backbone_names() {
    std::lock_guard<std::mutex> lock(registry_mutex);
    std::vector<std::string> names;
    for (const auto& [name, tpl] : registry()) names.push_back(name);
    return names;
}

void load_backbone_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    std::lock_guard<std::mutex> lock(registry_mutex);
    auto& tables = registry();
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path());
        std::stringstream buf;
        buf << in.rdbuf();
        std::string name = entry.path().stem().string();
        tables.insert_or_assign(name, parse_backbone_table(name, buf.str()));
    }
    if (ec) raise(ErrorCode::IoFailure, "cannot read backbone directory '" + dir + "'");
}

ModuleStats template_stats(const BackboneTemplate& tpl, std::int64_t upto_tap,
                           const TensorShape& in) {
    const BackboneTap* tap = tpl.find_tap(upto_tap);
    if (tap == nullptr)
        raise(ErrorCode::UnknownTap, tpl.name + " has no tap " + std::to_string(upto_tap));
    TemplateWalk w = walk_template(tpl, in, tap->stage_index);
    return ModuleStats{w.cost.params, 2 * w.cost.macs, {w.shape}, w.cost.leaves};
}

ModuleStats template_full_stats(const BackboneTemplate& tpl, const TensorShape& in) {
    TemplateWalk w = walk_template(tpl, in, tpl.stages.size());
    return ModuleStats{w.cost.params, 2 * w.cost.macs, {w.shape}, w.cost.leaves};
}

TensorShape template_tap_shape(const BackboneTemplate& tpl, std::int64_t tap,
                               const TensorShape& in) {
    return template_stats(tpl, tap, in).out();
}

} // namespace archbench::catalog
