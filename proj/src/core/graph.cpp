#include "core/graph.hpp"

#include "core/catalog.hpp"
#include "core/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace archbench::graph {

namespace {

std::string fmt_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

const config::LayerEntry& entry_at(const config::ModelSpec& spec, std::size_t i) {
    return i < spec.backbone.size() ? spec.backbone[i] : spec.head[i - spec.backbone.size()];
}

// Shapes available to a node: its producers' outputs (first shape of each),
// or the model input when it has no producer.
std::vector<TensorShape> gather_inputs(const ComputeGraph& graph, const LayerNode& node) {
    std::vector<TensorShape> shapes;
    if (node.inputs.empty()) {
        shapes.push_back(graph.input_shape);
        return shapes;
    }
    for (int producer : node.inputs) {
        const LayerNode& p = graph.nodes[static_cast<std::size_t>(producer)];
        if (p.out_shapes.empty())
            raise(ErrorCode::ShapeConflict,
                  "node " + std::to_string(node.index) + " consumes unannotated node " +
                      std::to_string(producer));
        shapes.push_back(p.out());
    }
    return shapes;
}

void annotate_node(ComputeGraph& graph, LayerNode& node) {
    const std::string where = "layer " + std::to_string(node.index);

    if (node.kind == ModuleKind::TorchBackbone) {
        if (node.args.size() != 2 || !std::holds_alternative<std::string>(node.args[1]))
            raise(ErrorCode::ArityMismatch, where + ": TorchBackbone expects [channels, name]");
        const catalog::BackboneTemplate& tpl =
            catalog::backbone_template(std::get<std::string>(node.args[1]));
        std::vector<TensorShape> ins = gather_inputs(graph, node);
        catalog::ModuleStats stats = catalog::template_full_stats(tpl, ins[0]);
        node.out_shapes = stats.out_shapes;
        node.params = stats.params;
        node.flops = stats.flops;
        node.leaf_modules = stats.leaf_modules;
        return;
    }

    if (node.kind == ModuleKind::Index) {
        if (node.inputs.size() != 1)
            raise(ErrorCode::UnknownTap, where + ": Index expects exactly one producer");
        const LayerNode& producer = graph.nodes[static_cast<std::size_t>(node.inputs[0])];
        if (producer.kind != ModuleKind::TorchBackbone)
            raise(ErrorCode::UnknownTap, where + ": Index producer is not a TorchBackbone");
        if (node.args.size() != 2 || !std::holds_alternative<std::int64_t>(node.args[1]))
            raise(ErrorCode::ArityMismatch, where + ": Index expects [channels, tap]");
        const catalog::BackboneTemplate& tpl =
            catalog::backbone_template(std::get<std::string>(producer.args[1]));
        std::vector<TensorShape> trunk_in = gather_inputs(graph, producer);
        TensorShape tap_shape =
            catalog::template_tap_shape(tpl, std::get<std::int64_t>(node.args[1]), trunk_in[0]);
        node.out_shapes = {tap_shape};
        node.params = 0;
        node.flops = 0;
        node.leaf_modules = 0;
        return;
    }

    std::vector<TensorShape> ins = gather_inputs(graph, node);

    if (node.kind == ModuleKind::Concat) {
        for (std::size_t i = 1; i < ins.size(); ++i) {
            if (ins[i].height != ins[0].height || ins[i].width != ins[0].width)
                raise(ErrorCode::ShapeConflict,
                      where + ": Concat extents differ, " + ins[0].to_string() + " vs " +
                          ins[i].to_string());
        }
    }

    if (node.kind == ModuleKind::C2f) {
        catalog::ModuleStats stats = catalog::module_stats(node.kind, node.args, ins, node.repeats);
        node.out_shapes = stats.out_shapes;
        node.params = stats.params;
        node.flops = stats.flops;
        node.leaf_modules = stats.leaf_modules;
        return;
    }

    // Other kinds stack sequentially when the repeat count exceeds one.
    node.params = 0;
    node.flops = 0;
    node.leaf_modules = 0;
    std::vector<TensorShape> current = ins;
    for (int r = 0; r < node.repeats; ++r) {
        catalog::ModuleStats stats = catalog::module_stats(node.kind, node.args, current);
        node.params += stats.params;
        node.flops += stats.flops;
        node.leaf_modules += stats.leaf_modules;
        node.out_shapes = stats.out_shapes;
        current = {stats.out_shapes.front()};
    }
}

} // namespace

ComputeGraph build_graph(const config::ScaledModelSpec& scaled, const TensorShape& input_shape) {
    const config::ModelSpec& spec = scaled.spec;
    const std::size_t total = spec.layer_count();

    ComputeGraph graph;
    graph.model_name = spec.name;
    graph.input_shape = input_shape;
    graph.nodes.reserve(total);

    for (std::size_t i = 0; i < total; ++i) {
        const config::LayerEntry& entry = entry_at(spec, i);
        LayerNode node;
        node.index = static_cast<int>(i);
        node.kind = entry.kind;
        node.args = entry.args;
        node.repeats = entry.number;
        for (int f : entry.from) {
            int resolved = f == -1 ? static_cast<int>(i) - 1 : f;
            if (resolved >= 0) node.inputs.push_back(resolved);
            else if (i > 0 || f != -1)
                raise(ErrorCode::BadFromIndex,
                      "layer " + std::to_string(i) + " cannot reference " + std::to_string(f));
        }
        graph.nodes.push_back(std::move(node));
    }

    int detect = -1;
    for (const LayerNode& node : graph.nodes) {
        if (node.kind != ModuleKind::Detect) continue;
        if (detect >= 0)
            raise(ErrorCode::MultipleDetect, "Detect nodes at layers " + std::to_string(detect) +
                                                 " and " + std::to_string(node.index));
        detect = node.index;
    }
    if (detect < 0) raise(ErrorCode::MissingDetect, "model has no Detect layer");
    if (static_cast<std::size_t>(detect) + 1 != total)
        raise(ErrorCode::MissingDetect, "Detect must be the final layer");
    graph.detect_index = detect;
    graph.detect_taps = graph.nodes[static_cast<std::size_t>(detect)].inputs;
    if (graph.detect_taps.empty()) graph.detect_taps = {detect - 1};

    propagate_shapes(graph);

    // Detection scales must shrink monotonically from the finest tap.
    const LayerNode& head = graph.nodes.back();
    for (std::size_t i = 1; i < head.out_shapes.size(); ++i) {
        if (head.out_shapes[i].height >= head.out_shapes[i - 1].height)
            raise(ErrorCode::ShapeConflict, "detection scales are not strictly decreasing");
    }
    return graph;
}

ComputeGraph& propagate_shapes(ComputeGraph& graph) {
    for (LayerNode& node : graph.nodes) annotate_node(graph, node);
    return graph;
}

ModelSummary summarize(const ComputeGraph& graph, const std::string& name) {
    ModelSummary summary;
    summary.name = name.empty() ? graph.model_name : name;
    for (const LayerNode& node : graph.nodes) {
        summary.total_params += node.params;
        summary.total_flops += node.flops;
        summary.layer_count += node.leaf_modules;
        LayerSummary layer;
        layer.index = node.index;
        layer.kind = module_kind_name(node.kind);
        layer.params = node.params;
        layer.flops = node.flops;
        if (node.out_shapes.size() == 1) {
            layer.out_shape = node.out().to_string();
        } else {
            std::string joined;
            for (const TensorShape& s : node.out_shapes) {
                if (!joined.empty()) joined += " ";
                joined += s.to_string();
            }
            layer.out_shape = joined;
        }
        summary.per_layer.push_back(std::move(layer));
    }
    return summary;
}

ComparisonTable compare_models(std::vector<ModelSummary> summaries) {
    ComparisonTable table;
    table.rows = std::move(summaries);
    return table;
}

std::string ComparisonTable::to_csv() const {
    std::ostringstream out;
    out << "model,params_m,layers,gflops\n";
    for (const ModelSummary& row : rows) {
        out << row.name << "," << fmt_fixed(row.params_millions(), 2) << "," << row.layer_count
            << "," << fmt_fixed(row.gflops(), 1) << "\n";
    }
    return out.str();
}

std::string ComparisonTable::to_markdown() const {
    std::ostringstream out;
    out << "| Model | Params (M) | Layers | GFLOPs |\n";
    out << "| --- | --- | --- | --- |\n";
    for (const ModelSummary& row : rows) {
        out << "| " << row.name << " | " << fmt_fixed(row.params_millions(), 2) << " | "
            << row.layer_count << " | " << fmt_fixed(row.gflops(), 1) << " |\n";
    }
    return out.str();
}

std::string ComparisonTable::to_json() const {
    nlohmann::ordered_json doc;
    doc["schema_version"] = 1;
    doc["models"] = nlohmann::ordered_json::array();
    for (const ModelSummary& row : rows) {
        nlohmann::ordered_json entry;
        entry["model"] = row.name;
        entry["params"] = row.total_params;
        entry["params_m"] = fmt_fixed(row.params_millions(), 2);
        entry["layers"] = row.layer_count;
        entry["flops"] = row.total_flops;
        entry["gflops"] = fmt_fixed(row.gflops(), 1);
        doc["models"].push_back(std::move(entry));
    }
    return doc.dump(2) + "\n";
}

} // namespace archbench::graph
