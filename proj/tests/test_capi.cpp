// Exercises the shared-library surface exactly as an external consumer
// would: opaque handles, status codes, caller-owned strings.

#include "archbench.h"

#include "test_util.hpp"

#include <doctest.h>

#include <cstring>
#include <string>
#include <vector>

namespace {

struct Owned {
    char* ptr = nullptr;
    ~Owned() { ab_string_free(ptr); }
    std::string str() const { return ptr == nullptr ? std::string() : std::string(ptr); }
};

} // namespace

TEST_CASE("version and status names") {
    CHECK(ab_version() != nullptr);
    CHECK(std::string(ab_status_name(AB_OK)) == "Ok");
    CHECK(std::string(ab_status_name(AB_ERR_BAD_FROM_INDEX)) == "BadFromIndex");
}

TEST_CASE("model parse, analyze and render through the C ABI") {
    std::string yaml = read_source_file("models/yolov8n.yaml");
    ab_model* model = nullptr;
    REQUIRE(ab_model_parse(yaml.c_str(), &model) == AB_OK);
    CHECK(ab_model_nc(model) == 2);
    CHECK(ab_model_layer_entries(model) == 23);

    Owned name;
    REQUIRE(ab_model_name(model, &name.ptr) == AB_OK);
    CHECK(name.str() == "yolov8n");

    ab_graph* graph = nullptr;
    REQUIRE(ab_graph_build(model, "n", 640, &graph) == AB_OK);
    ab_summary* summary = nullptr;
    REQUIRE(ab_graph_summarize(graph, "yolov8n", &summary) == AB_OK);
    CHECK(ab_summary_total_params(summary) == 3'011'238ULL);
    CHECK(ab_summary_total_flops(summary) == 8'082'739'200ULL);
    CHECK(ab_summary_node_count(summary) == 23);

    ab_layer_info info{};
    REQUIRE(ab_summary_layer(summary, 0, &info) == AB_OK);
    CHECK(std::string(info.kind) == "Conv");
    CHECK(info.params == 464);
    CHECK(std::string(info.out_shape) == "(16, 320, 320)");

    const ab_summary* rows[] = {summary};
    Owned csv;
    REQUIRE(ab_comparison_render(rows, 1, AB_FORMAT_CSV, &csv.ptr) == AB_OK);
    CHECK(csv.str().find("model,params_m,layers,gflops\n") == 0);
    CHECK(csv.str().find("yolov8n,3.01,") != std::string::npos);

    ab_summary_free(summary);
    ab_graph_free(graph);
    ab_model_free(model);
}

TEST_CASE("parse failures set a status and message") {
    ab_model* model = nullptr;
    ab_status status = ab_model_parse("nc: 2\nbackbone:\n  - [9, 1, Conv, [64]]\nhead:\n"
                                      "  - [-1, 1, Detect, [nc]]\n",
                                      &model);
    CHECK(status == AB_ERR_BAD_FROM_INDEX);
    CHECK(model == nullptr);
    CHECK(std::strlen(ab_last_error()) > 0);
}

TEST_CASE("canonical serialization round-trips") {
    std::string yaml = read_source_file("models/yolov8-ghost-p2.yaml");
    ab_model* model = nullptr;
    REQUIRE(ab_model_parse(yaml.c_str(), &model) == AB_OK);
    Owned canonical;
    REQUIRE(ab_model_canonical_yaml(model, &canonical.ptr) == AB_OK);
    ab_model* reparsed = nullptr;
    REQUIRE(ab_model_parse(canonical.ptr, &reparsed) == AB_OK);
    CHECK(ab_model_layer_entries(reparsed) == ab_model_layer_entries(model));
    ab_model_free(reparsed);
    ab_model_free(model);
}

TEST_CASE("validation reports findings as JSON") {
    ab_model* model = nullptr;
    REQUIRE(ab_model_parse("nc: 2\nbackbone:\n  - [-1, 1, Conv, [64, 3, 2]]\nhead:\n"
                           "  - [[-1], 1, Concat, [1]]\n  - [-1, 1, Detect, [nc]]\n",
                           &model) == AB_OK);
    Owned findings;
    REQUIRE(ab_model_validate(model, nullptr, &findings.ptr) == AB_OK);
    CHECK(findings.str().find("degenerate-concat") != std::string::npos);
    ab_model_free(model);
}

TEST_CASE("xml conversion through the C ABI") {
    const char* xml =
        "<parking id=\"p\">"
        "<space id=\"1\" occupied=\"1\"><contour>"
        "<point x=\"100\" y=\"100\" /><point x=\"300\" y=\"100\" />"
        "<point x=\"300\" y=\"200\" /><point x=\"100\" y=\"200\" />"
        "</contour></space></parking>";
    Owned txt;
    int boxes = 0;
    REQUIRE(ab_pklot_xml_to_yolo_txt(xml, &txt.ptr, &boxes) == AB_OK);
    CHECK(boxes == 1);
    CHECK(txt.str() == "1 0.156250 0.208333 0.156250 0.138889\n");

    Owned normalized;
    REQUIRE(ab_yolo_txt_normalize(txt.ptr, &normalized.ptr) == AB_OK);
    CHECK(normalized.str() == txt.str());
}

TEST_CASE("split through the C ABI") {
    std::vector<std::string> ids;
    std::vector<const char*> ptrs;
    for (int i = 0; i < 10; ++i) ids.push_back("img" + std::to_string(i));
    for (const std::string& id : ids) ptrs.push_back(id.c_str());
    std::vector<int> assignment(ids.size(), -1);
    size_t sizes[3] = {0, 0, 0};
    REQUIRE(ab_split_ids(ptrs.data(), ptrs.size(), 0.7, 0.2, 0.1, 0, assignment.data(), sizes) ==
            AB_OK);
    CHECK(sizes[0] == 7);
    CHECK(sizes[1] == 2);
    CHECK(sizes[2] == 1);
    CHECK(ab_split_ids(ptrs.data(), ptrs.size(), 0.5, 0.4, 0.2, 0, assignment.data(), sizes) ==
          AB_ERR_BAD_RATIOS);
}

TEST_CASE("evaluation through the C ABI") {
    ab_eval* eval = nullptr;
    REQUIRE(ab_eval_new(&eval) == AB_OK);
    REQUIRE(ab_eval_add_ground_truth(eval, "img1",
                                     "1 0.2 0.2 0.1 0.1\n0 0.7 0.7 0.1 0.1\n") == AB_OK);
    REQUIRE(ab_eval_add_predictions(eval,
                                    "img1 1 1.0 0.2 0.2 0.1 0.1\n"
                                    "img1 0 1.0 0.7 0.7 0.1 0.1\n") == AB_OK);
    ab_report* report = nullptr;
    REQUIRE(ab_eval_run(eval, "self", 0.5, 0.25, &report) == AB_OK);

    double value = 0;
    REQUIRE(ab_report_value(report, "Precision", &value) == AB_OK);
    CHECK(value == 1.0);
    REQUIRE(ab_report_value(report, "mAP50:95", &value) == AB_OK);
    CHECK(value == 1.0);
    REQUIRE(ab_report_value(report, "tp", &value) == AB_OK);
    CHECK(value == 1.0);
    REQUIRE(ab_report_value(report, "tn", &value) == AB_OK);
    CHECK(value == 1.0);
    CHECK(ab_report_value(report, "nope", &value) == AB_ERR_INVALID_ARGUMENT);

    Owned json;
    REQUIRE(ab_report_render(report, AB_FORMAT_JSON, &json.ptr) == AB_OK);
    CHECK(json.str().find("\"mAP50:95\": 1.0") != std::string::npos);

    ab_report_free(report);
    ab_eval_free(eval);
}

TEST_CASE("empty ground truth maps to the dedicated status") {
    ab_eval* eval = nullptr;
    REQUIRE(ab_eval_new(&eval) == AB_OK);
    REQUIRE(ab_eval_add_predictions(eval, "img1 1 0.9 0.5 0.5 0.1 0.1\n") == AB_OK);
    ab_report* report = nullptr;
    CHECK(ab_eval_run(eval, "x", 0.5, 0.25, &report) == AB_ERR_NO_GROUND_TRUTH);
    ab_eval_free(eval);
}

TEST_CASE("combined report through the C ABI") {
    const char* eval_json =
        "{\"model\": \"YOLOv8n\", \"Precision\": 0.996, \"Recall\": 0.996, "
        "\"mAP50\": 0.994, \"mAP50:95\": 0.97}";
    const char* docs[] = {eval_json};
    Owned md;
    REQUIRE(ab_combined_report(docs, 1, "model,params_m,layers,gflops\nyolov8n,3.01,82,8.1\n",
                               &md.ptr) == AB_OK);
    CHECK(md.str().find("| YOLOv8n | 0.996 | 0.996 | 0.994 | 0.97 |") != std::string::npos);
}

TEST_CASE("iou helper") {
    CHECK(ab_box_iou(0, 0, 2, 2, 1, 1, 3, 3) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    CHECK(ab_box_iou(0, 0, 1, 1, 5, 5, 6, 6) == 0.0);
}

TEST_CASE("null arguments are rejected, not crashed on") {
    CHECK(ab_model_parse(nullptr, nullptr) == AB_ERR_INVALID_ARGUMENT);
    CHECK(ab_model_nc(nullptr) == -1);
    ab_model_free(nullptr);
    ab_string_free(nullptr);
}
