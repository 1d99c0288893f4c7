#pragma once

#include "core/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace archbench::catalog {

// Cost and shape of one module instance at a fixed input shape. FLOPs follow
// the 2-per-MAC convention; pooling, upsampling, concatenation and
// globally-pooled SE branches count zero.
struct ModuleStats {
    std::int64_t params = 0;
    std::int64_t flops = 0;
    std::vector<TensorShape> out_shapes;
    std::int64_t leaf_modules = 0;

    const TensorShape& out() const { return out_shapes.front(); }
};

// "Same" padding p = k div 2; stride limited to 1 or 2.
TensorShape conv_output_shape(const TensorShape& in, std::int64_t out_channels, int k, int s);

// Stats for one module instance. `repeat` is the internal block count and is
// only meaningful for C2f; sequential stacking of other kinds is the graph
// builder's job. Index and TorchBackbone are resolved by the graph builder.
ModuleStats module_stats(ModuleKind kind, const std::vector<Arg>& args,
                         const std::vector<TensorShape>& in_shapes, int repeat = 1);

// Ghost module: m = n_out / s_ratio intrinsic maps from a k x k primary
// convolution plus (s_ratio - 1) * m ghost maps from d x d depthwise ops.
ModuleStats ghost_module_stats(std::int64_t c_in, std::int64_t n_out, int k, int d, int s_ratio,
                               const TensorShape& in);

struct BackboneStage {
    std::string block;
    int repeats = 1;
    std::int64_t channels = 0;
    int stride = 1;
    std::int64_t tap = -1; // published tap label, -1 when the stage is untapped
};

struct BackboneTap {
    std::int64_t label = 0;
    std::int64_t channels = 0;
    int total_stride = 1;
    std::size_t stage_index = 0;
};

struct BackboneTemplate {
    std::string name;
    std::vector<BackboneStage> stages;
    std::vector<BackboneTap> taps;

    const BackboneTap* find_tap(std::int64_t label) const;
};

// Parses the 5-column stage table: block repeats channels stride tap.
BackboneTemplate parse_backbone_table(const std::string& name, const std::string& text);

// Registry of known trunks (resnet18, vgg16, efficientnetv2_s). Tables are
// embedded at build time from data/backbones/ and can be overridden from a
// directory of *.txt files at runtime.
const BackboneTemplate& backbone_template(const std::string& name);
std::vector<std::string> backbone_names();
void load_backbone_dir(const std::string& dir);

// Cumulative cost of the trunk up to (and including) the tapped stage.
ModuleStats template_stats(const BackboneTemplate& tpl, std::int64_t upto_tap,
                           const TensorShape& in);

// Cost of the whole trunk; out shape is the deepest stage output.
ModuleStats template_full_stats(const BackboneTemplate& tpl, const TensorShape& in);

// Shape of one tap output for a given input image shape.
TensorShape template_tap_shape(const BackboneTemplate& tpl, std::int64_t tap,
                               const TensorShape& in);

} // namespace archbench::catalog
