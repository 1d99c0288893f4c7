#include "core/metrics.hpp"

#include "core/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

namespace archbench::metrics {

namespace {

// Indices sorted by confidence descending; stable, so ties keep input order.
std::vector<std::size_t> by_confidence(const std::vector<DetectionRecord>& dets) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].confidence > dets[b].confidence;
    });
    return order;
}

std::string fmt_metric(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", value);
    std::string s = buf;
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

} // namespace

double iou(const PixelBox& a, const PixelBox& b) {
    double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (ix <= 0 || iy <= 0) return 0.0;
    double inter = ix * iy;
    double uni = a.area() + b.area() - inter;
    if (uni <= 0) return 0.0;
    return inter / uni;
}

std::vector<DetectionRecord> nms(const std::vector<DetectionRecord>& dets, double iou_thresh) {
    std::vector<std::size_t> order = by_confidence(dets);
    std::vector<std::size_t> kept_indices;
    for (std::size_t candidate : order) {
        bool suppressed = false;
        for (std::size_t kept : kept_indices) {
            if (dets[kept].class_id != dets[candidate].class_id) continue;
            if (iou(dets[kept].box, dets[candidate].box) > iou_thresh) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept_indices.push_back(candidate);
    }
    std::sort(kept_indices.begin(), kept_indices.end());
    std::vector<DetectionRecord> kept;
    kept.reserve(kept_indices.size());
    for (std::size_t i : kept_indices) kept.push_back(dets[i]);
    return kept;
}

MatchResult match_detections(const std::vector<DetectionRecord>& dets,
                             const std::vector<PixelBox>& gts, double iou_thresh) {
    MatchResult result;
    result.detection_is_tp.assign(dets.size(), false);
    result.matched_gt.assign(dets.size(), -1);
    std::vector<bool> gt_taken(gts.size(), false);

    for (std::size_t det : by_confidence(dets)) {
        double best_iou = 0;
        int best_gt = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (gt_taken[g]) continue;
            double overlap = iou(dets[det].box, gts[g]);
            if (overlap >= iou_thresh && overlap > best_iou) {
                best_iou = overlap;
                best_gt = static_cast<int>(g);
            }
        }
        if (best_gt >= 0) {
            gt_taken[static_cast<std::size_t>(best_gt)] = true;
            result.detection_is_tp[det] = true;
            result.matched_gt[det] = best_gt;
        }
    }
    result.tp = static_cast<std::int64_t>(
        std::count(result.detection_is_tp.begin(), result.detection_is_tp.end(), true));
    result.fp = static_cast<std::int64_t>(dets.size()) - result.tp;
    result.fn = static_cast<std::int64_t>(gts.size()) - result.tp;
    return result;
}

PRCurve pr_curve(std::vector<ScoredDetection> flags, std::int64_t gt_count, int class_id) {
    if (gt_count <= 0)
        raise(ErrorCode::EmptyClass, "class " + std::to_string(class_id) + " has no ground truth");

    PRCurve curve;
    curve.class_id = class_id;
    curve.gt_count = gt_count;
    if (flags.empty()) return curve;

    // Deterministic ordered reduction.
    std::sort(flags.begin(), flags.end(), [](const ScoredDetection& a, const ScoredDetection& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.image_id != b.image_id) return a.image_id < b.image_id;
        return a.det_index < b.det_index;
    });

    std::int64_t tp = 0;
    std::int64_t fp = 0;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (flags[i].tp) ++tp;
        else ++fp;
        bool last_of_threshold = i + 1 == flags.size() ||
                                 flags[i + 1].confidence != flags[i].confidence;
        if (!last_of_threshold) continue;
        PRPoint point;
        point.recall = static_cast<double>(tp) / static_cast<double>(gt_count);
        point.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        curve.points.push_back(point);
    }
    return curve;
}

double average_precision(const PRCurve& curve, ApMethod method) {
    if (curve.points.empty()) return 0.0;

    // Precision envelope: running maximum from high recall backwards.
    std::vector<double> envelope(curve.points.size());
    double running = 0;
    for (std::size_t i = curve.points.size(); i-- > 0;) {
        running = std::max(running, curve.points[i].precision);
        envelope[i] = running;
    }

    if (method == ApMethod::AllPoint) {
        double area = 0;
        double prev_recall = 0;
        for (std::size_t i = 0; i < curve.points.size(); ++i) {
            area += (curve.points[i].recall - prev_recall) * envelope[i];
            prev_recall = curve.points[i].recall;
        }
        return area;
    }

    double total = 0;
    for (int g = 0; g <= 100; ++g) {
        double target = static_cast<double>(g) / 100.0;
        double value = 0;
        for (std::size_t i = 0; i < curve.points.size(); ++i) {
            if (curve.points[i].recall >= target) {
                value = envelope[i];
                break;
            }
        }
        total += value;
    }
    return total / 101.0;
}

IoUThresholdSet IoUThresholdSet::map50() { return IoUThresholdSet{{0.5}}; }

IoUThresholdSet IoUThresholdSet::map5095() {
    IoUThresholdSet set;
    for (int k = 0; k < 10; ++k) set.thresholds.push_back(static_cast<double>(50 + 5 * k) / 100.0);
    return set;
}

MeanApResult mean_ap(const std::vector<DetectionRecord>& dets, const GroundTruthMap& gts,
                     const IoUThresholdSet& thresholds, ApMethod method) {
    if (thresholds.thresholds.empty())
        raise(ErrorCode::ArityMismatch, "threshold set is empty");

    // Classes that own at least one ground-truth instance.
    std::map<int, std::int64_t> gt_per_class;
    for (const auto& [image, boxes] : gts) {
        for (const PixelBox& b : boxes) ++gt_per_class[b.class_id];
    }
    if (gt_per_class.empty()) raise(ErrorCode::NoGroundTruth, "ground truth is empty");

    MeanApResult result;
    std::map<int, double> class_threshold_mean;

    for (const auto& [class_id, gt_count] : gt_per_class) {
        double sum_over_thresholds = 0;
        for (std::size_t t = 0; t < thresholds.thresholds.size(); ++t) {
            double threshold = thresholds.thresholds[t];
            std::vector<ScoredDetection> flags;
            for (const auto& [image, gt_boxes] : gts) {
                std::vector<DetectionRecord> image_dets;
                std::vector<int> original_index;
                for (std::size_t i = 0; i < dets.size(); ++i) {
                    if (dets[i].image_id == image && dets[i].class_id == class_id) {
                        image_dets.push_back(dets[i]);
                        original_index.push_back(static_cast<int>(i));
                    }
                }
                std::vector<PixelBox> class_gts;
                for (const PixelBox& b : gt_boxes) {
                    if (b.class_id == class_id) class_gts.push_back(b);
                }
                if (image_dets.empty()) continue;
                MatchResult match = match_detections(image_dets, class_gts, threshold);
                for (std::size_t i = 0; i < image_dets.size(); ++i) {
                    flags.push_back(ScoredDetection{image_dets[i].confidence,
                                                    match.detection_is_tp[i], image,
                                                    original_index[i]});
                }
            }
            PRCurve curve = pr_curve(std::move(flags), gt_count, class_id);
            double ap = average_precision(curve, method);
            sum_over_thresholds += ap;
            if (t == 0) result.per_class_ap50[class_id] = ap;
        }
        class_threshold_mean[class_id] =
            sum_over_thresholds / static_cast<double>(thresholds.thresholds.size());
        result.per_class_ap5095[class_id] = class_threshold_mean[class_id];
    }

    double sum50 = 0;
    double sum_all = 0;
    for (const auto& [class_id, unused] : gt_per_class) {
        (void)unused;
        sum50 += result.per_class_ap50[class_id];
        sum_all += class_threshold_mean[class_id];
    }
    double classes = static_cast<double>(gt_per_class.size());
    result.map50 = sum50 / classes;
    result.map5095 = sum_all / classes;
    return result;
}

std::pair<double, double> precision_recall(const ConfusionCounts& counts) {
    double precision = counts.tp + counts.fp == 0
                           ? 1.0
                           : static_cast<double>(counts.tp) /
                                 static_cast<double>(counts.tp + counts.fp);
    double recall = counts.tp + counts.fn == 0
                        ? 1.0
                        : static_cast<double>(counts.tp) /
                              static_cast<double>(counts.tp + counts.fn);
    return {precision, recall};
}

OccupancyConfusion occupancy_confusion(const std::vector<SlotOutcome>& slots) {
    OccupancyConfusion confusion;
    for (const SlotOutcome& slot : slots) {
        if (!slot.matched) {
            ++confusion.undetected;
            continue;
        }
        if (slot.gt_occupied && slot.pred_occupied) ++confusion.tp;
        else if (!slot.gt_occupied && !slot.pred_occupied) ++confusion.tn;
        else if (!slot.gt_occupied && slot.pred_occupied) ++confusion.fp;
        else ++confusion.fn;
    }
    return confusion;
}

std::vector<SlotOutcome> match_slots(const std::vector<DetectionRecord>& dets,
                                     const std::vector<PixelBox>& gts, double iou_thresh) {
    std::vector<SlotOutcome> outcomes(gts.size());
    for (std::size_t g = 0; g < gts.size(); ++g)
        outcomes[g].gt_occupied = gts[g].class_id == annot::kClassOccupied;

    std::vector<bool> taken(gts.size(), false);
    for (std::size_t det : by_confidence(dets)) {
        double best_iou = 0;
        int best_gt = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (taken[g]) continue;
            double overlap = iou(dets[det].box, gts[g]);
            if (overlap >= iou_thresh && overlap > best_iou) {
                best_iou = overlap;
                best_gt = static_cast<int>(g);
            }
        }
        if (best_gt >= 0) {
            taken[static_cast<std::size_t>(best_gt)] = true;
            outcomes[static_cast<std::size_t>(best_gt)].matched = true;
            outcomes[static_cast<std::size_t>(best_gt)].pred_occupied =
                dets[det].class_id == annot::kClassOccupied;
        }
    }
    return outcomes;
}

namespace {

// Pools TP flags over classes at the matching threshold; used for both the
// fixed-confidence operating point and the max-F1 point.
struct PooledFlags {
    std::vector<ScoredDetection> flags;
    std::int64_t gt_total = 0;
};

PooledFlags pool_flags(const std::vector<DetectionRecord>& dets, const GroundTruthMap& gts,
                       double match_iou) {
    PooledFlags pooled;
    std::set<int> classes;
    for (const auto& [image, boxes] : gts) {
        pooled.gt_total += static_cast<std::int64_t>(boxes.size());
        for (const PixelBox& b : boxes) classes.insert(b.class_id);
    }
    for (const DetectionRecord& d : dets) classes.insert(d.class_id);

    for (int class_id : classes) {
        for (const auto& [image, gt_boxes] : gts) {
            std::vector<DetectionRecord> image_dets;
            std::vector<int> original_index;
            for (std::size_t i = 0; i < dets.size(); ++i) {
                if (dets[i].image_id == image && dets[i].class_id == class_id) {
                    image_dets.push_back(dets[i]);
                    original_index.push_back(static_cast<int>(i));
                }
            }
            if (image_dets.empty()) continue;
            std::vector<PixelBox> class_gts;
            for (const PixelBox& b : gt_boxes) {
                if (b.class_id == class_id) class_gts.push_back(b);
            }
            MatchResult match = match_detections(image_dets, class_gts, match_iou);
            for (std::size_t i = 0; i < image_dets.size(); ++i) {
                pooled.flags.push_back(ScoredDetection{image_dets[i].confidence,
                                                       match.detection_is_tp[i], image,
                                                       original_index[i]});
            }
        }
    }
    return pooled;
}

} // namespace

EvalReport evaluate(const std::vector<DetectionRecord>& dets, const GroundTruthMap& gts,
                    const EvalOptions& options) {
    EvalReport report;
    report.options = options;
    report.images = static_cast<std::int64_t>(gts.size());
    report.detections = static_cast<std::int64_t>(dets.size());
    for (const auto& [image, boxes] : gts)
        report.gt_boxes += static_cast<std::int64_t>(boxes.size());
    if (report.gt_boxes == 0) raise(ErrorCode::NoGroundTruth, "ground truth is empty");

    MeanApResult ap = mean_ap(dets, gts, IoUThresholdSet::map5095(), options.method);
    report.map50 = ap.map50;
    report.map5095 = ap.map5095;
    report.per_class_ap50 = ap.per_class_ap50;
    report.per_class_ap5095 = ap.per_class_ap5095;

    // Operating point at the fixed confidence threshold.
    PooledFlags pooled = pool_flags(dets, gts, options.match_iou);
    ConfusionCounts operating;
    for (const ScoredDetection& f : pooled.flags) {
        if (f.confidence < options.conf_threshold) continue;
        if (f.tp) ++operating.tp;
        else ++operating.fp;
    }
    operating.fn = pooled.gt_total - operating.tp;
    auto [precision, recall] = precision_recall(operating);
    report.precision = precision;
    report.recall = recall;

    // Max-F1 point over the pooled confidence sweep.
    std::sort(pooled.flags.begin(), pooled.flags.end(),
              [](const ScoredDetection& a, const ScoredDetection& b) {
                  if (a.confidence != b.confidence) return a.confidence > b.confidence;
                  if (a.image_id != b.image_id) return a.image_id < b.image_id;
                  return a.det_index < b.det_index;
              });
    double best_f1 = -1;
    double best_precision = 1.0;
    double best_recall = pooled.gt_total == 0 ? 1.0 : 0.0;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    for (std::size_t i = 0; i < pooled.flags.size(); ++i) {
        if (pooled.flags[i].tp) ++tp;
        else ++fp;
        bool boundary = i + 1 == pooled.flags.size() ||
                        pooled.flags[i + 1].confidence != pooled.flags[i].confidence;
        if (!boundary) continue;
        double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
        double r = static_cast<double>(tp) / static_cast<double>(pooled.gt_total);
        double f1 = p + r == 0 ? 0 : 2 * p * r / (p + r);
        if (f1 > best_f1) {
            best_f1 = f1;
            best_precision = p;
            best_recall = r;
        }
    }
    report.precision_maxf1 = best_precision;
    report.recall_maxf1 = best_recall;

    // Slot-level occupancy confusion at the operating confidence.
    std::vector<SlotOutcome> outcomes;
    std::int64_t matched_total = 0;
    std::int64_t confident_dets = 0;
    for (const auto& [image, gt_boxes] : gts) {
        std::vector<DetectionRecord> image_dets;
        for (const DetectionRecord& d : dets) {
            if (d.image_id == image && d.confidence >= options.conf_threshold)
                image_dets.push_back(d);
        }
        confident_dets += static_cast<std::int64_t>(image_dets.size());
        std::vector<SlotOutcome> image_outcomes =
            match_slots(image_dets, gt_boxes, options.match_iou);
        for (const SlotOutcome& o : image_outcomes) {
            if (o.matched) ++matched_total;
            outcomes.push_back(o);
        }
    }
    report.confusion = occupancy_confusion(outcomes);
    report.unmatched_detections = confident_dets - matched_total;
    return report;
}

std::string render_report(const EvalReport& report, ReportFormat format) {
    if (format == ReportFormat::Json) {
        nlohmann::ordered_json doc;
        doc["schema_version"] = 1;
        doc["model"] = report.model;
        doc["Precision"] = report.precision;
        doc["Recall"] = report.recall;
        doc["mAP50"] = report.map50;
        doc["mAP50:95"] = report.map5095;
        doc["precision_maxf1"] = report.precision_maxf1;
        doc["recall_maxf1"] = report.recall_maxf1;
        nlohmann::ordered_json ap50;
        for (const auto& [class_id, value] : report.per_class_ap50)
            ap50[std::to_string(class_id)] = value;
        doc["per_class_ap50"] = std::move(ap50);
        nlohmann::ordered_json ap5095;
        for (const auto& [class_id, value] : report.per_class_ap5095)
            ap5095[std::to_string(class_id)] = value;
        doc["per_class_ap5095"] = std::move(ap5095);
        doc["confusion"] = {{"tp", report.confusion.tp},
                            {"tn", report.confusion.tn},
                            {"fp", report.confusion.fp},
                            {"fn", report.confusion.fn},
                            {"undetected", report.confusion.undetected},
                            {"unmatched_detections", report.unmatched_detections}};
        doc["counts"] = {{"images", report.images},
                         {"gt_boxes", report.gt_boxes},
                         {"detections", report.detections}};
        doc["thresholds"] = {{"iou", report.options.match_iou},
                             {"confidence", report.options.conf_threshold}};
        return doc.dump(2) + "\n";
    }

    if (format == ReportFormat::Csv) {
        std::ostringstream out;
        out << "Model,Precision,Recall,mAP50,mAP50:95\n";
        out << report.model << "," << fmt_metric(report.precision) << ","
            << fmt_metric(report.recall) << "," << fmt_metric(report.map50) << ","
            << fmt_metric(report.map5095) << "\n";
        return out.str();
    }

    std::ostringstream out;
    out << "| Model | Precision | Recall | mAP50 | mAP50:95 |\n";
    out << "| --- | --- | --- | --- | --- |\n";
    out << "| " << report.model << " | " << fmt_metric(report.precision) << " | "
        << fmt_metric(report.recall) << " | " << fmt_metric(report.map50) << " | "
        << fmt_metric(report.map5095) << " |\n";
    out << "\n";
    out << "| Slots | TP | TN | FP | FN | Undetected |\n";
    out << "| --- | --- | --- | --- | --- | --- |\n";
    out << "| " << report.gt_boxes << " | " << report.confusion.tp << " | " << report.confusion.tn
        << " | " << report.confusion.fp << " | " << report.confusion.fn << " | "
        << report.confusion.undetected << " |\n";
    return out.str();
}

std::vector<DetectionRecord> parse_predictions(const std::string& text,
                                               const annot::ImageSize& size) {
    std::vector<DetectionRecord> dets;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream fields(line);
        std::vector<std::string> tokens;
        std::string token;
        while (fields >> token) tokens.push_back(token);
        if (tokens.empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        if (tokens.size() != 7)
            raise(ErrorCode::BadFieldCount,
                  where + ": expected 7 fields, got " + std::to_string(tokens.size()));

        auto number = [&](const std::string& s) {
            char* end = nullptr;
            double v = std::strtod(s.c_str(), &end);
            if (end != s.c_str() + s.size() || s.empty())
                raise(ErrorCode::NonNumericField, where + ": '" + s + "' is not a number");
            return v;
        };

        double class_raw = number(tokens[1]);
        if (class_raw < 0 || class_raw != std::floor(class_raw))
            raise(ErrorCode::NonNumericField, where + ": class id must be a non-negative integer");
        double confidence = number(tokens[2]);
        if (confidence < 0.0 || confidence > 1.0)
            raise(ErrorCode::RangeViolation, where + ": confidence must lie in [0, 1]");

        annot::YoloRecord rec;
        rec.class_id = static_cast<int>(class_raw);
        rec.x_center = number(tokens[3]);
        rec.y_center = number(tokens[4]);
        rec.width = number(tokens[5]);
        rec.height = number(tokens[6]);
        auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (!in_unit(rec.x_center) || !in_unit(rec.y_center) || !in_unit(rec.width) ||
            !in_unit(rec.height) || rec.width <= 0.0 || rec.height <= 0.0)
            raise(ErrorCode::RangeViolation, where + ": geometry fields must lie in [0, 1]");

        DetectionRecord det;
        det.image_id = tokens[0];
        det.class_id = rec.class_id;
        det.confidence = confidence;
        det.box = annot::from_yolo_record(rec, size);
        det.box.class_id = rec.class_id;
        dets.push_back(det);
    }
    return dets;
}

} // namespace archbench::metrics
