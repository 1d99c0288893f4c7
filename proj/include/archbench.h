/*
 * archbench — static model-architecture analysis and detection-metric
 * evaluation behind a C ABI.
 *
 * Every function returns an ab_status; AB_OK is 0. On failure a
 * human-readable message is available from ab_last_error() until the next
 * call on the same thread. Strings returned through char** out-parameters
 * are owned by the caller and released with ab_string_free().
 */

#ifndef ARCHBENCH_H
#define ARCHBENCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define AB_API __declspec(dllexport)
#else
#define AB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ab_status {
    AB_OK = 0,
    AB_ERR_MALFORMED_DOCUMENT = 1,
    AB_ERR_MISSING_FIELD = 2,
    AB_ERR_UNKNOWN_MODULE = 3,
    AB_ERR_BAD_FROM_INDEX = 4,
    AB_ERR_UNKNOWN_SCALE = 5,
    AB_ERR_DEGENERATE_SHAPE = 10,
    AB_ERR_ARITY_MISMATCH = 11,
    AB_ERR_CHANNEL_MISMATCH = 12,
    AB_ERR_INDIVISIBLE_CHANNELS = 13,
    AB_ERR_UNKNOWN_BACKBONE = 14,
    AB_ERR_UNKNOWN_TAP = 15,
    AB_ERR_SHAPE_CONFLICT = 20,
    AB_ERR_MISSING_DETECT = 21,
    AB_ERR_MULTIPLE_DETECT = 22,
    AB_ERR_MALFORMED_XML = 30,
    AB_ERR_MISSING_GEOMETRY = 31,
    AB_ERR_BAD_OCCUPIED_FLAG = 32,
    AB_ERR_OUT_OF_BOUNDS = 33,
    AB_ERR_DENORMALIZED_INPUT = 34,
    AB_ERR_BAD_FIELD_COUNT = 35,
    AB_ERR_NON_NUMERIC_FIELD = 36,
    AB_ERR_RANGE_VIOLATION = 37,
    AB_ERR_BAD_RATIOS = 38,
    AB_ERR_EMPTY_CLASS = 40,
    AB_ERR_NO_GROUND_TRUTH = 41,
    AB_ERR_IO_FAILURE = 50,
    AB_ERR_SCHEMA_MISMATCH = 51,
    AB_ERR_INVALID_ARGUMENT = 90,
    AB_ERR_INTERNAL = 99
} ab_status;

typedef enum ab_format {
    AB_FORMAT_CSV = 0,
    AB_FORMAT_MARKDOWN = 1,
    AB_FORMAT_JSON = 2
} ab_format;

AB_API const char* ab_version(void);
AB_API const char* ab_status_name(ab_status status);

/* Thread-local message describing the most recent failure on this thread. */
AB_API const char* ab_last_error(void);

AB_API void ab_string_free(char* s);

/* ---- model configs and architecture analysis --------------------------- */

typedef struct ab_model ab_model;
typedef struct ab_graph ab_graph;
typedef struct ab_summary ab_summary;

AB_API ab_status ab_model_parse(const char* yaml_text, ab_model** out);
AB_API void ab_model_free(ab_model* model);

AB_API ab_status ab_model_name(const ab_model* model, char** out);
AB_API ab_status ab_model_set_name(ab_model* model, const char* name);
AB_API int ab_model_nc(const ab_model* model);
AB_API int ab_model_layer_entries(const ab_model* model);

/* Canonical serialization: nc, scales, backbone, head. */
AB_API ab_status ab_model_canonical_yaml(const ab_model* model, char** out);

/* Structural findings (unreachable layers, misplaced Detect, degenerate
 * concats, bad Index taps) as a JSON array; empty array means clean. */
AB_API ab_status ab_model_validate(const ab_model* model, const char* scale_key, char** out);

/* scale_key may be NULL or "" to use the single/default scale. */
AB_API ab_status ab_graph_build(const ab_model* model, const char* scale_key, int image_size,
                                ab_graph** out);
AB_API void ab_graph_free(ab_graph* graph);

AB_API ab_status ab_graph_summarize(const ab_graph* graph, const char* name, ab_summary** out);
AB_API void ab_summary_free(ab_summary* summary);

AB_API uint64_t ab_summary_total_params(const ab_summary* summary);
AB_API uint64_t ab_summary_total_flops(const ab_summary* summary);
AB_API int64_t ab_summary_layer_count(const ab_summary* summary);
AB_API int ab_summary_node_count(const ab_summary* summary);

typedef struct ab_layer_info {
    int index;
    const char* kind;      /* borrowed, valid while the summary lives */
    const char* out_shape; /* borrowed */
    uint64_t params;
    uint64_t flops;
} ab_layer_info;

AB_API ab_status ab_summary_layer(const ab_summary* summary, int index, ab_layer_info* out);

/* Comparison table over one or more summaries, in the given order. */
AB_API ab_status ab_comparison_render(const ab_summary* const* summaries, size_t count,
                                      ab_format format, char** out);

/* Overrides or extends the built-in backbone templates from *.txt tables. */
AB_API ab_status ab_backbones_load_dir(const char* dir);

/* ---- annotations -------------------------------------------------------- */

/* Converts one PKLot-style XML document to YOLO TXT. box_count may be NULL. */
AB_API ab_status ab_pklot_xml_to_yolo_txt(const char* xml_text, char** txt_out, int* box_count);

/* Normalizes a YOLO TXT document: validates and re-emits it in the canonical
 * 6-decimal form. */
AB_API ab_status ab_yolo_txt_normalize(const char* txt, char** out);

/* Deterministic seeded split. assignment[i] receives 0 (train), 1 (val) or
 * 2 (test); sizes (may be NULL) receives the three part sizes. */
AB_API ab_status ab_split_ids(const char* const* ids, size_t count, double train_ratio,
                              double val_ratio, double test_ratio, uint64_t seed, int* assignment,
                              size_t sizes[3]);

/* ---- evaluation ---------------------------------------------------------- */

typedef struct ab_eval ab_eval;
typedef struct ab_report ab_report;

AB_API ab_status ab_eval_new(ab_eval** out);
AB_API void ab_eval_free(ab_eval* eval);

/* Ground truth for one image as YOLO TXT lines. */
AB_API ab_status ab_eval_add_ground_truth(ab_eval* eval, const char* image_id,
                                          const char* yolo_txt);

/* Predictions, one per line: image_id class_id confidence xc yc w h. */
AB_API ab_status ab_eval_add_predictions(ab_eval* eval, const char* predictions_text);

AB_API ab_status ab_eval_run(ab_eval* eval, const char* model_name, double match_iou,
                             double conf_threshold, ab_report** out);
AB_API void ab_report_free(ab_report* report);

/* Scalar lookup: "Precision", "Recall", "mAP50", "mAP50:95",
 * "precision_maxf1", "recall_maxf1", "tp", "tn", "fp", "fn", "undetected",
 * "unmatched_detections", "images", "gt_boxes", "detections". */
AB_API ab_status ab_report_value(const ab_report* report, const char* key, double* out);

AB_API ab_status ab_report_render(const ab_report* report, ab_format format, char** out);

/* ---- combined reporting -------------------------------------------------- */

AB_API ab_status ab_combined_report(const char* const* eval_jsons, size_t count,
                                    const char* analyze_csv, char** out);

/* ---- small geometry helper ----------------------------------------------- */

AB_API double ab_box_iou(double ax_min, double ay_min, double ax_max, double ay_max,
                         double bx_min, double by_min, double bx_max, double by_max);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ARCHBENCH_H */
