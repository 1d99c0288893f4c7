#pragma once

#include "core/config.hpp"
#include "core/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace archbench::graph {

struct LayerNode {
    int index = 0;
    ModuleKind kind = ModuleKind::Conv;
    std::vector<Arg> args;
    int repeats = 1;
    std::vector<int> inputs; // producer indices; empty means the model input
    std::vector<TensorShape> out_shapes;
    std::int64_t params = 0;
    std::int64_t flops = 0;
    std::int64_t leaf_modules = 0;

    const TensorShape& out() const { return out_shapes.front(); }
};

struct ComputeGraph {
    std::string model_name;
    TensorShape input_shape;
    std::vector<LayerNode> nodes;
    std::vector<int> detect_taps; // producer indices feeding the Detect node
    int detect_index = -1;
};

// Resolves -1 references, binds Index taps, propagates shapes and stats.
ComputeGraph build_graph(const config::ScaledModelSpec& scaled, const TensorShape& input_shape);

// Recomputes every node annotation in place; idempotent.
ComputeGraph& propagate_shapes(ComputeGraph& graph);

struct LayerSummary {
    int index = 0;
    std::string kind;
    std::int64_t params = 0;
    std::int64_t flops = 0;
    std::string out_shape;
};

struct ModelSummary {
    std::string name;
    std::int64_t layer_count = 0; // leaf modules after expanding composite blocks
    std::int64_t total_params = 0;
    std::int64_t total_flops = 0;
    std::vector<LayerSummary> per_layer;

    double params_millions() const { return static_cast<double>(total_params) / 1e6; }
    double gflops() const { return static_cast<double>(total_flops) / 1e9; }
};

ModelSummary summarize(const ComputeGraph& graph, const std::string& name);

struct ComparisonTable {
    std::vector<ModelSummary> rows;

    std::string to_csv() const;      // model,params_m,layers,gflops
    std::string to_markdown() const; // Model | Params (M) | Layers | GFLOPs
    std::string to_json() const;
};

ComparisonTable compare_models(std::vector<ModelSummary> summaries);

} // namespace archbench::graph
