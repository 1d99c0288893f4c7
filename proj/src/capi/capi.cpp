#include "archbench.h"

#include "core/annot.hpp"
#include "core/catalog.hpp"
#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/graph.hpp"
#include "core/metrics.hpp"
#include "core/report.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

using archbench::Error;
using archbench::ErrorCode;

struct ab_model {
    archbench::config::ModelSpec spec;
};

struct ab_graph {
    archbench::graph::ComputeGraph graph;
};

struct ab_summary {
    archbench::graph::ModelSummary summary;
};

struct ab_eval {
    archbench::metrics::GroundTruthMap ground_truth;
    std::vector<archbench::metrics::DetectionRecord> detections;
    archbench::annot::ImageSize image_size;
};

struct ab_report {
    archbench::metrics::EvalReport report;
};

namespace {

thread_local std::string g_last_error;

ab_status status_from_code(ErrorCode code) {
    return static_cast<ab_status>(static_cast<int>(code));
}

char* copy_string(const std::string& s) {
    char* out = static_cast<char*>(::operator new(s.size() + 1, std::nothrow));
    if (out == nullptr) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ab_status set_error(ab_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

// Runs fn, translating exceptions to status codes.
template <typename Fn>
ab_status guarded(Fn&& fn) {
    try {
        fn();
        return AB_OK;
    } catch (const Error& e) {
        return set_error(status_from_code(e.code()), e.what());
    } catch (const std::exception& e) {
        return set_error(AB_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(AB_ERR_INTERNAL, "unknown failure");
    }
}

ab_status require(bool condition, const char* what) {
    if (condition) return AB_OK;
    return set_error(AB_ERR_INVALID_ARGUMENT, what);
}

ab_status out_string(const std::string& value, char** out) {
    *out = copy_string(value);
    if (*out == nullptr) return set_error(AB_ERR_INTERNAL, "allocation failed");
    return AB_OK;
}

} // namespace

extern "C" {

const char* ab_version(void) { return "0.1.0"; }

const char* ab_status_name(ab_status status) {
    if (status == AB_ERR_INVALID_ARGUMENT) return "InvalidArgument";
    if (status == AB_ERR_INTERNAL) return "Internal";
    return archbench::error_code_name(static_cast<ErrorCode>(static_cast<int>(status)));
}

const char* ab_last_error(void) { return g_last_error.c_str(); }

void ab_string_free(char* s) { ::operator delete(s); }

ab_status ab_model_parse(const char* yaml_text, ab_model** out) {
    if (require(yaml_text != nullptr && out != nullptr, "null argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    *out = nullptr;
    return guarded([&] {
        auto model = std::make_unique<ab_model>();
        model->spec = archbench::config::parse_model_config(yaml_text);
        *out = model.release();
    });
}

void ab_model_free(ab_model* model) { delete model; }

ab_status ab_model_name(const ab_model* model, char** out) {
    if (require(model != nullptr && out != nullptr, "null argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    return out_string(model->spec.name, out);
}

ab_status ab_model_set_name(ab_model* model, const char* name) {
    if (require(model != nullptr && name != nullptr, "null argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    model->spec.name = name;
    return AB_OK;
}

int ab_model_nc(const ab_model* model) {
    return model == nullptr ? -1 : static_cast<int>(model->spec.nc);
}

int ab_model_layer_entries(const ab_model* model) {
    return model == nullptr ? -1 : static_cast<int>(model->spec.layer_count());
}

ab_status ab_model_canonical_yaml(const ab_model* model, char** out) {
    if (require(model != nullptr && out != nullptr, "null argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    return guarded([&] {
        std::string text = archbench::config::serialize(model->spec);
        if (out_string(text, out) != AB_OK) throw std::bad_alloc();
    });
}

ab_status ab_model_validate(const ab_model* model, const char* scale_key, char** out) {
    if (require(model != nullptr && out != nullptr, "null argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    return guarded([&] {
        auto scaled = archbench::config::resolve_scale(model->spec,
                                                       scale_key == nullptr ? "" : scale_key);
        auto report = archbench::config::validate_model_spec(scaled);
        nlohmann::ordered_json doc = nlohmann::ordered_json::array();
        for (const auto& finding : report.findings) {
            doc.push_back({{"code", finding.code},
                           {"layer", finding.layer},
                           {"message", finding.message}});
        }
        if (out_string(doc.dump(2) + "\n", out) != AB_OK) throw std::bad_alloc();
    });
}

ab_status ab_graph_build(const ab_model* model, const char* scale_key, int image_size,
                         ab_graph** out) {
    if (require(model != nullptr && out != nullptr && image_size > 0, "bad argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    *out = nullptr;
    return guarded([&] {
        auto scaled = archbench::config::resolve_scale(model->spec,
                                                       scale_key == nullptr ? "" : scale_key);
        auto graph = std::make_unique<ab_graph>();
        graph->graph = archbench::graph::build_graph(
            scaled, archbench::TensorShape{3, image_size, image_size});
        *out = graph.release();
    });
}

void ab_graph_free(ab_graph* graph) { delete graph; }

ab_status ab_graph_summarize(const ab_graph* graph, const char* name, ab_summary** out) {
    if (require(graph != nullptr && out != nullptr, "null argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    *out = nullptr;
    return guarded([&] {
        auto summary = std::make_unique<ab_summary>();
        summary->summary =
            archbench::graph::summarize(graph->graph, name == nullptr ? "" : name);
        *out = summary.release();
    });
}

void ab_summary_free(ab_summary* summary) { delete summary; }

uint64_t ab_summary_total_params(const ab_summary* summary) {
    return summary == nullptr ? 0 : static_cast<uint64_t>(summary->summary.total_params);
}

uint64_t ab_summary_total_flops(const ab_summary* summary) {
    return summary == nullptr ? 0 : static_cast<uint64_t>(summary->summary.total_flops);
}

int64_t ab_summary_layer_count(const ab_summary* summary) {
    return summary == nullptr ? -1 : summary->summary.layer_count;
}

int ab_summary_node_count(const ab_summary* summary) {
    return summary == nullptr ? -1 : static_cast<int>(summary->summary.per_layer.size());
}

ab_status ab_summary_layer(const ab_summary* summary, int index, ab_layer_info* out) {
    if (require(summary != nullptr && out != nullptr, "null argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    if (index < 0 || static_cast<std::size_t>(index) >= summary->summary.per_layer.size())
        return set_error(AB_ERR_INVALID_ARGUMENT, "layer index out of range");
    const auto& layer = summary->summary.per_layer[static_cast<std::size_t>(index)];
    out->index = layer.index;
    out->kind = layer.kind.c_str();
    out->out_shape = layer.out_shape.c_str();
    out->params = static_cast<uint64_t>(layer.params);
    out->flops = static_cast<uint64_t>(layer.flops);
    return AB_OK;
}

ab_status ab_comparison_render(const ab_summary* const* summaries, size_t count, ab_format format,
                               char** out) {
    if (require(summaries != nullptr && count > 0 && out != nullptr, "bad argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    return guarded([&] {
        std::vector<archbench::graph::ModelSummary> rows;
        rows.reserve(count);
        for (size_t i = 0; i < count; ++i) {
            if (summaries[i] == nullptr)
                archbench::raise(ErrorCode::SchemaMismatch, "null summary in comparison");
            rows.push_back(summaries[i]->summary);
        }
        archbench::graph::ComparisonTable table =
            archbench::graph::compare_models(std::move(rows));
        std::string text;
        switch (format) {
            case AB_FORMAT_CSV: text = table.to_csv(); break;
            case AB_FORMAT_MARKDOWN: text = table.to_markdown(); break;
            case AB_FORMAT_JSON: text = table.to_json(); break;
        }
        if (out_string(text, out) != AB_OK) throw std::bad_alloc();
    });
}

ab_status ab_backbones_load_dir(const char* dir) {
    if (require(dir != nullptr, "null argument") != AB_OK) return AB_ERR_INVALID_ARGUMENT;
    return guarded([&] { archbench::catalog::load_backbone_dir(dir); });
}

ab_status ab_pklot_xml_to_yolo_txt(const char* xml_text, char** txt_out, int* box_count) {
    if (require(xml_text != nullptr && txt_out != nullptr, "null argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    return guarded([&] {
        archbench::annot::ImageAnnotation annotation =
            archbench::annot::parse_pklot_xml(xml_text);
        std::vector<archbench::annot::YoloRecord> records;
        records.reserve(annotation.boxes.size());
        for (const auto& box : annotation.boxes)
            records.push_back(archbench::annot::to_yolo_record(box, annotation.image_size));
        if (box_count != nullptr) *box_count = static_cast<int>(records.size());
        if (out_string(archbench::annot::format_yolo_txt(records), txt_out) != AB_OK)
            throw std::bad_alloc();
    });
}

ab_status ab_yolo_txt_normalize(const char* txt, char** out) {
    if (require(txt != nullptr && out != nullptr, "null argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    return guarded([&] {
        auto records = archbench::annot::parse_yolo_txt(txt);
        if (out_string(archbench::annot::format_yolo_txt(records), out) != AB_OK)
            throw std::bad_alloc();
    });
}

ab_status ab_split_ids(const char* const* ids, size_t count, double train_ratio, double val_ratio,
                       double test_ratio, uint64_t seed, int* assignment, size_t sizes[3]) {
    if (require(ids != nullptr && count > 0 && assignment != nullptr, "bad argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    return guarded([&] {
        for (size_t i = 0; i < count; ++i) {
            if (ids[i] == nullptr) archbench::raise(ErrorCode::BadRatios, "null id");
        }
        std::vector<int> labels = archbench::annot::split_assignment(
            count, {train_ratio, val_ratio, test_ratio}, seed);
        size_t totals[3] = {0, 0, 0};
        for (size_t i = 0; i < count; ++i) {
            assignment[i] = labels[i];
            ++totals[static_cast<size_t>(labels[i])];
        }
        if (sizes != nullptr) {
            sizes[0] = totals[0];
            sizes[1] = totals[1];
            sizes[2] = totals[2];
        }
    });
}

ab_status ab_eval_new(ab_eval** out) {
    if (require(out != nullptr, "null argument") != AB_OK) return AB_ERR_INVALID_ARGUMENT;
    *out = new (std::nothrow) ab_eval();
    if (*out == nullptr) return set_error(AB_ERR_INTERNAL, "allocation failed");
    return AB_OK;
}

void ab_eval_free(ab_eval* eval) { delete eval; }

ab_status ab_eval_add_ground_truth(ab_eval* eval, const char* image_id, const char* yolo_txt) {
    if (require(eval != nullptr && image_id != nullptr && yolo_txt != nullptr, "null argument") !=
        AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    return guarded([&] {
        auto records = archbench::annot::parse_yolo_txt(yolo_txt);
        std::vector<archbench::annot::PixelBox>& boxes = eval->ground_truth[image_id];
        for (const auto& rec : records) {
            archbench::annot::PixelBox box =
                archbench::annot::from_yolo_record(rec, eval->image_size);
            box.class_id = rec.class_id;
            boxes.push_back(box);
        }
    });
}

ab_status ab_eval_add_predictions(ab_eval* eval, const char* predictions_text) {
    if (require(eval != nullptr && predictions_text != nullptr, "null argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    return guarded([&] {
        auto dets = archbench::metrics::parse_predictions(predictions_text, eval->image_size);
        eval->detections.insert(eval->detections.end(), dets.begin(), dets.end());
    });
}

ab_status ab_eval_run(ab_eval* eval, const char* model_name, double match_iou,
                      double conf_threshold, ab_report** out) {
    if (require(eval != nullptr && out != nullptr, "null argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    if (match_iou <= 0.0 || match_iou > 1.0 || conf_threshold < 0.0 || conf_threshold > 1.0)
        return set_error(AB_ERR_INVALID_ARGUMENT, "thresholds out of range");
    *out = nullptr;
    return guarded([&] {
        archbench::metrics::EvalOptions options;
        options.match_iou = match_iou;
        options.conf_threshold = conf_threshold;
        auto report = std::make_unique<ab_report>();
        report->report = archbench::metrics::evaluate(eval->detections, eval->ground_truth,
                                                      options);
        report->report.model = model_name == nullptr ? "" : model_name;
        *out = report.release();
    });
}

void ab_report_free(ab_report* report) { delete report; }

ab_status ab_report_value(const ab_report* report, const char* key, double* out) {
    if (require(report != nullptr && key != nullptr && out != nullptr, "null argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    const archbench::metrics::EvalReport& r = report->report;
    const std::string k = key;
    if (k == "Precision") *out = r.precision;
    else if (k == "Recall") *out = r.recall;
    else if (k == "mAP50") *out = r.map50;
    else if (k == "mAP50:95") *out = r.map5095;
    else if (k == "precision_maxf1") *out = r.precision_maxf1;
    else if (k == "recall_maxf1") *out = r.recall_maxf1;
    else if (k == "tp") *out = static_cast<double>(r.confusion.tp);
    else if (k == "tn") *out = static_cast<double>(r.confusion.tn);
    else if (k == "fp") *out = static_cast<double>(r.confusion.fp);
    else if (k == "fn") *out = static_cast<double>(r.confusion.fn);
    else if (k == "undetected") *out = static_cast<double>(r.confusion.undetected);
    else if (k == "unmatched_detections") *out = static_cast<double>(r.unmatched_detections);
    else if (k == "images") *out = static_cast<double>(r.images);
    else if (k == "gt_boxes") *out = static_cast<double>(r.gt_boxes);
    else if (k == "detections") *out = static_cast<double>(r.detections);
    else return set_error(AB_ERR_INVALID_ARGUMENT, "unknown report key '" + k + "'");
    return AB_OK;
}

ab_status ab_report_render(const ab_report* report, ab_format format, char** out) {
    if (require(report != nullptr && out != nullptr, "null argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    return guarded([&] {
        archbench::metrics::ReportFormat f = archbench::metrics::ReportFormat::Json;
        if (format == AB_FORMAT_CSV) f = archbench::metrics::ReportFormat::Csv;
        if (format == AB_FORMAT_MARKDOWN) f = archbench::metrics::ReportFormat::Markdown;
        if (out_string(archbench::metrics::render_report(report->report, f), out) != AB_OK)
            throw std::bad_alloc();
    });
}

ab_status ab_combined_report(const char* const* eval_jsons, size_t count, const char* analyze_csv,
                             char** out) {
    if (require(eval_jsons != nullptr && count > 0 && out != nullptr, "bad argument") != AB_OK)
        return AB_ERR_INVALID_ARGUMENT;
    return guarded([&] {
        std::vector<std::string> docs;
        docs.reserve(count);
        for (size_t i = 0; i < count; ++i) {
            if (eval_jsons[i] == nullptr)
                archbench::raise(ErrorCode::SchemaMismatch, "null eval document");
            docs.emplace_back(eval_jsons[i]);
        }
        std::string text = archbench::report::combined_report(
            docs, analyze_csv == nullptr ? "" : analyze_csv);
        if (out_string(text, out) != AB_OK) throw std::bad_alloc();
    });
}

double ab_box_iou(double ax_min, double ay_min, double ax_max, double ay_max, double bx_min,
                  double by_min, double bx_max, double by_max) {
    archbench::annot::PixelBox a{ax_min, ay_min, ax_max, ay_max, 0};
    archbench::annot::PixelBox b{bx_min, by_min, bx_max, by_max, 0};
    return archbench::metrics::iou(a, b);
}

} // extern "C"
