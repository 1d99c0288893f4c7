#pragma once

#include "core/annot.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace archbench::metrics {

using annot::PixelBox;

struct DetectionRecord {
    std::string image_id;
    PixelBox box;
    int class_id = 0;
    double confidence = 0;
};

double iou(const PixelBox& a, const PixelBox& b);

// Greedy per-class suppression: descending confidence, drop a detection iff
// its same-class IoU with an already kept one exceeds the threshold. Ties in
// confidence keep input order.
std::vector<DetectionRecord> nms(const std::vector<DetectionRecord>& dets, double iou_thresh);

struct MatchResult {
    // TP flag per detection, in the order of the `dets` argument.
    std::vector<bool> detection_is_tp;
    std::vector<int> matched_gt; // -1 for false positives
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
};

// Single image, single class. Detections are taken in descending confidence;
// each grabs the unmatched ground-truth box with maximal IoU >= threshold
// (lowest index on IoU ties).
MatchResult match_detections(const std::vector<DetectionRecord>& dets,
                             const std::vector<PixelBox>& gts, double iou_thresh);

struct PRPoint {
    double recall = 0;
    double precision = 0;
};

struct PRCurve {
    int class_id = 0;
    std::int64_t gt_count = 0;
    std::vector<PRPoint> points; // one per unique confidence, descending sweep
};

struct ScoredDetection {
    double confidence = 0;
    bool tp = false;
    std::string image_id;
    int det_index = 0;
};

// Dataset-level sweep over unique confidences in descending order.
PRCurve pr_curve(std::vector<ScoredDetection> flags, std::int64_t gt_count, int class_id);

enum class ApMethod { AllPoint, Interp101 };

double average_precision(const PRCurve& curve, ApMethod method);

struct IoUThresholdSet {
    std::vector<double> thresholds;

    static IoUThresholdSet map50();   // {0.50}
    static IoUThresholdSet map5095(); // {0.50, 0.55, ..., 0.95}
};

using GroundTruthMap = std::map<std::string, std::vector<PixelBox>>;

struct MeanApResult {
    double map50 = 0;
    double map5095 = 0;
    std::map<int, double> per_class_ap50;
    std::map<int, double> per_class_ap5095;
};

// AP per class (classes with at least one ground-truth instance) averaged
// over the threshold set. map50 is the class mean at the first threshold.
MeanApResult mean_ap(const std::vector<DetectionRecord>& dets, const GroundTruthMap& gts,
                     const IoUThresholdSet& thresholds, ApMethod method);

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
};

// 0/0 is defined as 1.0 on both axes.
std::pair<double, double> precision_recall(const ConfusionCounts& counts);

struct SlotOutcome {
    bool gt_occupied = false;
    bool matched = false;
    bool pred_occupied = false;
};

struct OccupancyConfusion {
    std::int64_t tp = 0; // occupied predicted occupied
    std::int64_t tn = 0; // empty predicted empty
    std::int64_t fp = 0; // empty predicted occupied
    std::int64_t fn = 0; // occupied predicted empty
    std::int64_t undetected = 0;
};

OccupancyConfusion occupancy_confusion(const std::vector<SlotOutcome>& slots);

// Class-agnostic greedy geometric matching of detections onto slots; the
// predicted class of the matched detection becomes the slot prediction.
// Returns one outcome per ground-truth slot.
std::vector<SlotOutcome> match_slots(const std::vector<DetectionRecord>& dets,
                                     const std::vector<PixelBox>& gts, double iou_thresh);

struct EvalOptions {
    double match_iou = 0.5;
    double conf_threshold = 0.25;
    ApMethod method = ApMethod::Interp101;
};

struct EvalReport {
    std::string model;
    double precision = 0; // operating point: conf >= conf_threshold
    double recall = 0;
    double precision_maxf1 = 0;
    double recall_maxf1 = 0;
    double map50 = 0;
    double map5095 = 0;
    std::map<int, double> per_class_ap50;
    std::map<int, double> per_class_ap5095;
    OccupancyConfusion confusion;
    std::int64_t unmatched_detections = 0;
    std::int64_t images = 0;
    std::int64_t gt_boxes = 0;
    std::int64_t detections = 0;
    EvalOptions options;
};

// Full pipeline; throws Error(NoGroundTruth) when the ground truth is empty.
EvalReport evaluate(const std::vector<DetectionRecord>& dets, const GroundTruthMap& gts,
                    const EvalOptions& options);

enum class ReportFormat { Csv, Markdown, Json };

std::string render_report(const EvalReport& report, ReportFormat format);

// One detection per line: image_id class_id confidence xc yc w h (normalized).
std::vector<DetectionRecord> parse_predictions(const std::string& text,
                                               const annot::ImageSize& size);

} // namespace archbench::metrics
