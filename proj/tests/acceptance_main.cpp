// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails.

#include "core/annot.hpp"
#include "core/config.hpp"
#include "core/graph.hpp"
#include "core/metrics.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <vector>

namespace config = archbench::config;
namespace graph = archbench::graph;
namespace annot = archbench::annot;
namespace metrics = archbench::metrics;
using archbench::TensorShape;
using archbench::annot::PixelBox;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        pass = false;
        if (!detail.empty()) detail += "; ";
        detail += why;
    }
};

bool g_all_pass = true;

void print_outcome(const std::string& name, const Outcome& outcome) {
    std::printf("%s  %s%s%s\n", outcome.pass ? "PASS" : "FAIL", name.c_str(),
                outcome.detail.empty() ? "" : "  -- ", outcome.detail.c_str());
    g_all_pass = g_all_pass && outcome.pass;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

graph::ModelSummary analyze_fixture(const std::string& relative, int imgsz = 640) {
    config::ModelSpec spec = config::parse_model_config(read_source_file(relative));
    graph::ComputeGraph g =
        graph::build_graph(config::resolve_scale(spec, "n"), TensorShape{3, imgsz, imgsz});
    return graph::summarize(g, spec.name);
}

bool within(double value, double target, double relative) {
    return std::abs(value - target) <= relative * target;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

PixelBox make_box(double x0, double y0, double x1, double y1, int class_id = 1) {
    return PixelBox{x0, y0, x1, y1, class_id};
}

metrics::DetectionRecord make_det(const std::string& image, double conf, const PixelBox& box,
                                  int class_id) {
    metrics::DetectionRecord d;
    d.image_id = image;
    d.box = box;
    d.box.class_id = class_id;
    d.class_id = class_id;
    d.confidence = conf;
    return d;
}

struct RandomInstance {
    std::vector<metrics::DetectionRecord> dets;
    metrics::GroundTruthMap gts;
};

RandomInstance random_instance(std::mt19937& rng, int max_boxes) {
    std::uniform_int_distribution<int> count_dist(0, max_boxes);
    std::uniform_real_distribution<double> coord(0.0, 100.0);
    std::uniform_real_distribution<double> extent(2.0, 40.0);
    std::uniform_int_distribution<int> conf_kind(0, 1);
    std::uniform_real_distribution<double> conf_dist(0.01, 1.0);
    std::uniform_int_distribution<int> coarse(1, 5);
    std::uniform_int_distribution<int> class_dist(0, 1);

    RandomInstance instance;
    int n_gt = std::max(1, count_dist(rng));
    std::vector<PixelBox>& gt_boxes = instance.gts["img"];
    for (int i = 0; i < n_gt; ++i) {
        double x = coord(rng), y = coord(rng), w = extent(rng), h = extent(rng);
        gt_boxes.push_back(make_box(x, y, x + w, y + h, class_dist(rng)));
    }
    int n_det = count_dist(rng);
    for (int i = 0; i < n_det; ++i) {
        double conf = conf_kind(rng) == 0 ? conf_dist(rng) : coarse(rng) / 5.0;
        if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
            const PixelBox& base =
                gt_boxes[std::uniform_int_distribution<std::size_t>(0, gt_boxes.size() - 1)(rng)];
            double dx = std::uniform_real_distribution<double>(-5, 5)(rng);
            double dy = std::uniform_real_distribution<double>(-5, 5)(rng);
            instance.dets.push_back(make_det("img", conf,
                                             make_box(base.x_min + dx, base.y_min + dy,
                                                      base.x_max + dx, base.y_max + dy),
                                             base.class_id));
        } else {
            double x = coord(rng), y = coord(rng), w = extent(rng), h = extent(rng);
            instance.dets.push_back(
                make_det("img", conf, make_box(x, y, x + w, y + h), class_dist(rng)));
        }
    }
    return instance;
}

// --- criteria ----------------------------------------------------------------

void criterion_1_yolov8n_reproduction() {
    Outcome outcome;
    auto start = std::chrono::steady_clock::now();
    graph::ModelSummary summary = analyze_fixture("models/yolov8n.yaml");
    double elapsed = seconds_since(start);

    double params_m = summary.params_millions();
    double gflops = summary.gflops();
    if (!within(params_m, 3.01, 0.03))
        outcome.fail("params " + fmt(params_m) + "M outside 3.01M +/-3%");
    if (!within(gflops, 8.2, 0.05)) outcome.fail("gflops " + fmt(gflops) + " outside 8.2 +/-5%");
    if (elapsed >= 1.0) outcome.fail("took " + fmt(elapsed) + "s (limit 1s)");
    if (outcome.pass)
        outcome.detail = "params " + fmt(params_m) + "M, " + fmt(gflops) + " GFLOPs in " +
                         fmt(elapsed) + "s";
    print_outcome("criterion-1 yolov8n-analytic-reproduction", outcome);
}

void criterion_2_custom_variants() {
    Outcome outcome;
    struct Row {
        const char* file;
        double params_m;
        double gflops;
    };
    const Row rows[] = {
        {"models/yolov8n-resnet18.yaml", 13.32, 35.2},
        {"models/yolov8n-vgg16.yaml", 17.78, 262.1},
        {"models/yolov8n-efficientv2.yaml", 23.40, 56.4},
        {"models/yolov8-ghost-p2.yaml", 1.60, 8.8},
    };
    auto start = std::chrono::steady_clock::now();
    std::string measured;
    for (const Row& row : rows) {
        graph::ModelSummary summary = analyze_fixture(row.file);
        double params_m = summary.params_millions();
        double gflops = summary.gflops();
        if (!within(params_m, row.params_m, 0.15))
            outcome.fail(std::string(row.file) + " params " + fmt(params_m) + "M outside " +
                         fmt(row.params_m) + "M +/-15%");
        if (!within(gflops, row.gflops, 0.15))
            outcome.fail(std::string(row.file) + " gflops " + fmt(gflops) + " outside " +
                         fmt(row.gflops) + " +/-15%");
        if (!measured.empty()) measured += ", ";
        measured += summary.name + " " + fmt(params_m) + "M/" + fmt(gflops) + "G";
    }
    double elapsed = seconds_since(start);
    if (elapsed >= 5.0) outcome.fail("took " + fmt(elapsed) + "s (limit 5s)");
    if (outcome.pass) outcome.detail = measured;
    print_outcome("criterion-2 custom-variant-reproduction", outcome);
}

void criterion_3_orderings() {
    Outcome outcome;
    graph::ModelSummary ghost = analyze_fixture("models/yolov8-ghost-p2.yaml");
    graph::ModelSummary yolo = analyze_fixture("models/yolov8n.yaml");
    graph::ModelSummary resnet = analyze_fixture("models/yolov8n-resnet18.yaml");
    graph::ModelSummary vgg = analyze_fixture("models/yolov8n-vgg16.yaml");
    graph::ModelSummary eff = analyze_fixture("models/yolov8n-efficientv2.yaml");

    bool params_order = ghost.total_params < yolo.total_params &&
                        yolo.total_params < resnet.total_params &&
                        resnet.total_params < vgg.total_params &&
                        vgg.total_params < eff.total_params;
    if (!params_order) outcome.fail("params ordering violated");
    bool flops_order = yolo.total_flops < ghost.total_flops &&
                       ghost.total_flops < resnet.total_flops &&
                       resnet.total_flops < eff.total_flops && eff.total_flops < vgg.total_flops;
    if (!flops_order) outcome.fail("gflops ordering violated");
    if (outcome.pass)
        outcome.detail = "params ghost<yolo<resnet<vgg<eff, gflops yolo<ghost<resnet<eff<vgg";
    print_outcome("criterion-3 ordering-properties", outcome);
}

void criterion_4_metric_properties() {
    Outcome outcome;

    // (a) oracle equivalence on 1000 randomized instances
    std::mt19937 rng(1234);
    int checked = 0;
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        RandomInstance instance = random_instance(rng, 5);
        const std::vector<PixelBox>& gt = instance.gts["img"];
        for (int class_id : {0, 1}) {
            std::vector<metrics::DetectionRecord> class_dets;
            std::vector<PixelBox> class_gts;
            for (const auto& d : instance.dets)
                if (d.class_id == class_id) class_dets.push_back(d);
            for (const auto& g : gt)
                if (g.class_id == class_id) class_gts.push_back(g);
            if (class_gts.empty() || class_dets.empty()) continue;
            metrics::MatchResult match = metrics::match_detections(class_dets, class_gts, 0.5);
            std::vector<metrics::ScoredDetection> flags;
            for (std::size_t i = 0; i < class_dets.size(); ++i)
                flags.push_back({class_dets[i].confidence, match.detection_is_tp[i], "img",
                                 static_cast<int>(i)});
            metrics::PRCurve curve =
                metrics::pr_curve(flags, static_cast<std::int64_t>(class_gts.size()), class_id);
            double fast = metrics::average_precision(curve, metrics::ApMethod::AllPoint);
            double slow = oracles::brute_force_ap(flags, static_cast<long long>(class_gts.size()));
            worst = std::max(worst, std::abs(fast - slow));
            ++checked;
        }
    }
    if (worst > 1e-9)
        outcome.fail("oracle deviation " + fmt(worst) + " over " + std::to_string(checked) +
                     " instances");

    // (b) self-evaluation fixture is exactly perfect
    metrics::GroundTruthMap gts;
    gts["a"] = {make_box(0, 0, 100, 100, 1), make_box(200, 0, 300, 80, 0)};
    gts["b"] = {make_box(50, 50, 90, 120, 1)};
    std::vector<metrics::DetectionRecord> dets;
    for (const auto& [image, boxes] : gts)
        for (const PixelBox& b : boxes) dets.push_back(make_det(image, 1.0, b, b.class_id));
    metrics::EvalReport report = metrics::evaluate(dets, gts, {});
    if (report.precision != 1.0 || report.recall != 1.0 || report.map50 != 1.0 ||
        report.map5095 != 1.0)
        outcome.fail("self-evaluation not exactly 1.0");

    // (c) map50:95 <= map50 on randomized datasets
    for (int trial = 0; trial < 200; ++trial) {
        RandomInstance instance = random_instance(rng, 6);
        metrics::MeanApResult result =
            metrics::mean_ap(instance.dets, instance.gts, metrics::IoUThresholdSet::map5095(),
                             metrics::ApMethod::Interp101);
        if (result.map5095 > result.map50 + 1e-12) {
            outcome.fail("map50:95 exceeded map50 on a random dataset");
            break;
        }
    }
    if (outcome.pass)
        outcome.detail = std::to_string(checked) + " oracle checks, worst dev " + fmt(worst);
    print_outcome("criterion-4 metric-property-battery", outcome);
}

void criterion_5_iou_battery() {
    Outcome outcome;
    PixelBox unit = make_box(3, 4, 13, 24);
    if (metrics::iou(unit, unit) != 1.0) outcome.fail("identity IoU != 1");
    if (metrics::iou(make_box(0, 0, 1, 1), make_box(5, 5, 6, 6)) != 0.0)
        outcome.fail("disjoint IoU != 0");
    double sevenths = metrics::iou(make_box(0, 0, 2, 2), make_box(1, 1, 3, 3));
    if (std::abs(sevenths - 1.0 / 7.0) > 1e-12) outcome.fail("1/7 case off");

    std::mt19937 rng(77);
    std::uniform_real_distribution<double> origin(0.0, 30.0);
    std::uniform_real_distribution<double> extent(10.0, 20.0);
    double worst = 0;
    for (int trial = 0; trial < 500; ++trial) {
        PixelBox a = make_box(0, 0, 0, 0);
        a.x_min = origin(rng);
        a.y_min = origin(rng);
        a.x_max = a.x_min + extent(rng);
        a.y_max = a.y_min + extent(rng);
        PixelBox b = make_box(0, 0, 0, 0);
        b.x_min = origin(rng);
        b.y_min = origin(rng);
        b.x_max = b.x_min + extent(rng);
        b.y_max = b.y_min + extent(rng);
        double analytic = metrics::iou(a, b);
        double counted = oracles::grid_iou(a, b, 1e-3);
        worst = std::max(worst, std::abs(analytic - counted));
    }
    if (worst > 2e-3) outcome.fail("grid oracle deviation " + fmt(worst) + " > 2e-3");
    if (outcome.pass) outcome.detail = "500 grid checks, worst dev " + fmt(worst);
    print_outcome("criterion-5 iou-unit-battery", outcome);
}

void criterion_6_annotation_roundtrip() {
    Outcome outcome;
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> x_dist(0.0, 1280.0);
    std::uniform_real_distribution<double> y_dist(0.0, 720.0);
    annot::ImageSize size; // 1280 x 720

    double worst = 0;
    int checked = 0;
    const int batch = 500;
    const int batches = 20; // 10,000 boxes total
    for (int round = 0; round < batches; ++round) {
        std::vector<PixelBox> boxes;
        std::ostringstream xml;
        xml << "<parking id=\"synthetic\">\n";
        while (boxes.size() < batch) {
            double x0 = x_dist(rng), x1 = x_dist(rng);
            double y0 = y_dist(rng), y1 = y_dist(rng);
            if (x0 > x1) std::swap(x0, x1);
            if (y0 > y1) std::swap(y0, y1);
            if (x1 - x0 < 2.0 || y1 - y0 < 2.0) continue;
            int class_id = static_cast<int>(boxes.size()) % 2;
            boxes.push_back(make_box(x0, y0, x1, y1, class_id));
            char buf[512];
            std::snprintf(buf, sizeof(buf),
                          "  <space id=\"%zu\" occupied=\"%d\"><contour>"
                          "<point x=\"%.3f\" y=\"%.3f\" /><point x=\"%.3f\" y=\"%.3f\" />"
                          "<point x=\"%.3f\" y=\"%.3f\" /><point x=\"%.3f\" y=\"%.3f\" />"
                          "</contour></space>\n",
                          boxes.size(), class_id, x0, y0, x1, y0, x1, y1, x0, y1);
            xml << buf;
        }
        xml << "</parking>\n";

        annot::ImageAnnotation annotation = annot::parse_pklot_xml(xml.str());
        if (annotation.boxes.size() != batch) {
            outcome.fail("XML parse lost boxes");
            break;
        }
        std::vector<annot::YoloRecord> records;
        for (const PixelBox& box : annotation.boxes)
            records.push_back(annot::to_yolo_record(box, size));
        std::string txt = annot::format_yolo_txt(records);
        std::vector<annot::YoloRecord> reparsed = annot::parse_yolo_txt(txt);
        if (annot::format_yolo_txt(reparsed) != txt) {
            outcome.fail("6-decimal TXT did not reparse to equal records");
            break;
        }
        for (std::size_t i = 0; i < reparsed.size(); ++i) {
            PixelBox back = annot::from_yolo_record(reparsed[i], size);
            worst = std::max({worst, std::abs(back.x_min - boxes[i].x_min),
                              std::abs(back.y_min - boxes[i].y_min),
                              std::abs(back.x_max - boxes[i].x_max),
                              std::abs(back.y_max - boxes[i].y_max)});
            if (back.class_id != boxes[i].class_id) outcome.fail("class not preserved");
            ++checked;
        }
    }
    if (worst >= 0.5) outcome.fail("round-trip error " + fmt(worst) + "px >= 0.5px");
    if (outcome.pass)
        outcome.detail = std::to_string(checked) + " boxes, worst error " + fmt(worst) + "px";
    print_outcome("criterion-6 annotation-round-trip", outcome);
}

void criterion_7_split_contract() {
    Outcome outcome;
    std::vector<std::string> ids;
    for (int i = 0; i < 12417; ++i) ids.push_back("img" + std::to_string(i));
    annot::DatasetSplit first = annot::split_dataset(ids, {0.7, 0.2, 0.1}, 20240229);
    annot::DatasetSplit second = annot::split_dataset(ids, {0.7, 0.2, 0.1}, 20240229);
    if (first.train.size() != 8693 || first.val.size() != 2483 || first.test.size() != 1241)
        outcome.fail("sizes " + std::to_string(first.train.size()) + "/" +
                     std::to_string(first.val.size()) + "/" + std::to_string(first.test.size()));
    if (first.train != second.train || first.val != second.val || first.test != second.test)
        outcome.fail("split not deterministic across reruns");
    if (outcome.pass) outcome.detail = "12417 -> 8693/2483/1241, rerun identical";
    print_outcome("criterion-7 split-contract", outcome);
}

void criterion_8_flop_scaling() {
    Outcome outcome;
    for (const char* name :
         {"models/yolov8n.yaml", "models/yolov8n-resnet18.yaml", "models/yolov8n-vgg16.yaml",
          "models/yolov8n-efficientv2.yaml", "models/yolov8-ghost-p2.yaml"}) {
        graph::ModelSummary at640 = analyze_fixture(name, 640);
        graph::ModelSummary at1280 = analyze_fixture(name, 1280);
        if (at1280.total_flops != 4 * at640.total_flops)
            outcome.fail(std::string(name) + ": " + std::to_string(at1280.total_flops) + " != 4*" +
                         std::to_string(at640.total_flops));
    }
    if (outcome.pass) outcome.detail = "all five fixtures scale exactly 4x at 1280";
    print_outcome("criterion-8 flop-scaling-law", outcome);
}

void criterion_9_nms_battery() {
    Outcome outcome;

    std::vector<metrics::DetectionRecord> duplicates{
        make_det("a", 0.9, make_box(0, 0, 10, 10), 1),
        make_det("a", 0.8, make_box(0, 0, 10, 10), 1)};
    std::vector<metrics::DetectionRecord> kept = metrics::nms(duplicates, 0.5);
    if (kept.size() != 1 || kept[0].confidence != 0.9) outcome.fail("duplicate suppression");

    std::vector<metrics::DetectionRecord> disjoint{
        make_det("a", 0.9, make_box(0, 0, 10, 10), 1),
        make_det("a", 0.8, make_box(20, 20, 30, 30), 1)};
    if (metrics::nms(disjoint, 0.5).size() != 2) outcome.fail("disjoint preservation");

    std::vector<metrics::DetectionRecord> chain{
        make_det("a", 0.9, make_box(0, 0, 10, 4), 1),
        make_det("a", 0.8, make_box(2.5, 0, 12.5, 4), 1),
        make_det("a", 0.7, make_box(5, 0, 15, 4), 1)};
    std::vector<metrics::DetectionRecord> chain_kept = metrics::nms(chain, 0.5);
    if (chain_kept.size() != 2 || chain_kept[0].confidence != 0.9 ||
        chain_kept[1].confidence != 0.7)
        outcome.fail("greedy chain did not keep {A, C}");

    std::mt19937 rng(31337);
    for (int trial = 0; trial < 1000; ++trial) {
        RandomInstance instance = random_instance(rng, 8);
        std::vector<metrics::DetectionRecord> once = metrics::nms(instance.dets, 0.5);
        std::vector<metrics::DetectionRecord> twice = metrics::nms(once, 0.5);
        bool same = once.size() == twice.size();
        for (std::size_t i = 0; same && i < once.size(); ++i)
            same = once[i].confidence == twice[i].confidence &&
                   once[i].box.x_min == twice[i].box.x_min &&
                   once[i].box.y_min == twice[i].box.y_min;
        if (!same) {
            outcome.fail("idempotence violated on a random instance");
            break;
        }
    }
    if (outcome.pass) outcome.detail = "hand cases exact, 1000 idempotence checks";
    print_outcome("criterion-9 nms-battery", outcome);
}

} // namespace

int main() {
    criterion_1_yolov8n_reproduction();
    criterion_2_custom_variants();
    criterion_3_orderings();
    criterion_4_metric_properties();
    criterion_5_iou_battery();
    criterion_6_annotation_roundtrip();
    criterion_7_split_contract();
    criterion_8_flop_scaling();
    criterion_9_nms_battery();
    return g_all_pass ? 0 : 1;
}
