#include "core/annot.hpp"

#include "core/errors.hpp"
#include "core/xml.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

namespace archbench::annot {

namespace {

double attr_number(const xml::Element& element, const char* key, const std::string& where) {
    const std::string* raw = element.attribute(key);
    if (raw == nullptr)
        raise(ErrorCode::MissingGeometry, where + " is missing attribute '" + key + "'");
    char* end = nullptr;
    double value = std::strtod(raw->c_str(), &end);
    if (end != raw->c_str() + raw->size() || raw->empty())
        raise(ErrorCode::MissingGeometry, where + " attribute '" + key + "' is not numeric");
    return value;
}

void collect_spaces(const xml::Element& element, std::vector<const xml::Element*>& out) {
    for (const xml::Element& child : element.children) {
        if (child.name == "space") out.push_back(&child);
        else collect_spaces(child, out);
    }
}

PixelBox space_geometry(const xml::Element& space, const std::string& where) {
    PixelBox box;
    if (const xml::Element* contour = space.child("contour")) {
        auto points = contour->children_named("point");
        if (points.size() >= 3) {
            double x_min = std::numeric_limits<double>::max();
            double y_min = std::numeric_limits<double>::max();
            double x_max = std::numeric_limits<double>::lowest();
            double y_max = std::numeric_limits<double>::lowest();
            for (const xml::Element* p : points) {
                double x = attr_number(*p, "x", where + " contour point");
                double y = attr_number(*p, "y", where + " contour point");
                x_min = std::min(x_min, x);
                y_min = std::min(y_min, y);
                x_max = std::max(x_max, x);
                y_max = std::max(y_max, y);
            }
            box.x_min = x_min;
            box.y_min = y_min;
            box.x_max = x_max;
            box.y_max = y_max;
            return box;
        }
    }
    if (const xml::Element* rect = space.child("rotatedRect")) {
        const xml::Element* center = rect->child("center");
        const xml::Element* size = rect->child("size");
        const xml::Element* angle = rect->child("angle");
        if (center == nullptr || size == nullptr)
            raise(ErrorCode::MissingGeometry, where + " rotatedRect lacks center or size");
        double cx = attr_number(*center, "x", where + " center");
        double cy = attr_number(*center, "y", where + " center");
        double w = attr_number(*size, "w", where + " size");
        double h = attr_number(*size, "h", where + " size");
        double deg = angle != nullptr ? attr_number(*angle, "d", where + " angle") : 0.0;
        double rad = deg * std::acos(-1.0) / 180.0;
        double half_w = (std::abs(w * std::cos(rad)) + std::abs(h * std::sin(rad))) / 2.0;
        double half_h = (std::abs(w * std::sin(rad)) + std::abs(h * std::cos(rad))) / 2.0;
        box.x_min = cx - half_w;
        box.x_max = cx + half_w;
        box.y_min = cy - half_h;
        box.y_max = cy + half_h;
        return box;
    }
    raise(ErrorCode::MissingGeometry, where + " has neither contour nor rotatedRect");
}

} // namespace

ImageAnnotation parse_pklot_xml(const std::string& text) {
    xml::Element root = xml::parse(text);

    ImageAnnotation annotation;
    if (const std::string* id = root.attribute("id")) annotation.image_id = *id;
    if (root.attribute("width") != nullptr && root.attribute("height") != nullptr) {
        annotation.image_size.width = attr_number(root, "width", "root element");
        annotation.image_size.height = attr_number(root, "height", "root element");
        if (annotation.image_size.width <= 0 || annotation.image_size.height <= 0)
            raise(ErrorCode::MalformedXml, "image size attributes must be positive");
    }

    std::vector<const xml::Element*> spaces;
    collect_spaces(root, spaces);

    for (std::size_t i = 0; i < spaces.size(); ++i) {
        const xml::Element& space = *spaces[i];
        std::string where = "space";
        if (const std::string* id = space.attribute("id")) where += " id=" + *id;
        else where += " #" + std::to_string(i);

        const std::string* occupied = space.attribute("occupied");
        if (occupied == nullptr)
            raise(ErrorCode::BadOccupiedFlag, where + " is missing the 'occupied' attribute");
        int class_id;
        if (*occupied == "0") class_id = kClassEmpty;
        else if (*occupied == "1") class_id = kClassOccupied;
        else
            raise(ErrorCode::BadOccupiedFlag,
                  where + " has occupied='" + *occupied + "', expected 0 or 1");

        PixelBox box = space_geometry(space, where);
        box.class_id = class_id;
        box.x_min = std::clamp(box.x_min, 0.0, annotation.image_size.width);
        box.x_max = std::clamp(box.x_max, 0.0, annotation.image_size.width);
        box.y_min = std::clamp(box.y_min, 0.0, annotation.image_size.height);
        box.y_max = std::clamp(box.y_max, 0.0, annotation.image_size.height);
        if (box.x_min >= box.x_max || box.y_min >= box.y_max)
            raise(ErrorCode::MissingGeometry, where + " lies outside the image");
        annotation.boxes.push_back(box);
    }
    return annotation;
}

YoloRecord to_yolo_record(const PixelBox& box, const ImageSize& size) {
    double tol = 1e-6 * std::max(size.width, size.height);
    if (box.x_min < -tol || box.y_min < -tol || box.x_max > size.width + tol ||
        box.y_max > size.height + tol || box.x_min >= box.x_max || box.y_min >= box.y_max)
        raise(ErrorCode::OutOfBounds, "box exceeds the image bounds");

    double x_min = std::clamp(box.x_min, 0.0, size.width);
    double x_max = std::clamp(box.x_max, 0.0, size.width);
    double y_min = std::clamp(box.y_min, 0.0, size.height);
    double y_max = std::clamp(box.y_max, 0.0, size.height);

    YoloRecord rec;
    rec.class_id = box.class_id;
    rec.x_center = (x_min + x_max) / (2.0 * size.width);
    rec.y_center = (y_min + y_max) / (2.0 * size.height);
    rec.width = (x_max - x_min) / size.width;
    rec.height = (y_max - y_min) / size.height;
    return rec;
}

PixelBox from_yolo_record(const YoloRecord& rec, const ImageSize& size) {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(rec.x_center) || !in_unit(rec.y_center) || !in_unit(rec.width) ||
        !in_unit(rec.height) || rec.width <= 0.0 || rec.height <= 0.0)
        raise(ErrorCode::DenormalizedInput, "record fields must lie in [0, 1]");

    PixelBox box;
    box.class_id = rec.class_id;
    box.x_min = std::clamp((rec.x_center - rec.width / 2.0) * size.width, 0.0, size.width);
    box.x_max = std::clamp((rec.x_center + rec.width / 2.0) * size.width, 0.0, size.width);
    box.y_min = std::clamp((rec.y_center - rec.height / 2.0) * size.height, 0.0, size.height);
    box.y_max = std::clamp((rec.y_center + rec.height / 2.0) * size.height, 0.0, size.height);
    return box;
}

std::vector<YoloRecord> parse_yolo_txt(const std::string& text) {
    std::vector<YoloRecord> records;
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
        if (tokens.size() != 5)
            raise(ErrorCode::BadFieldCount,
                  where + ": expected 5 fields, got " + std::to_string(tokens.size()));

        auto number = [&](const std::string& s) {
            char* end = nullptr;
            double v = std::strtod(s.c_str(), &end);
            if (end != s.c_str() + s.size() || s.empty())
                raise(ErrorCode::NonNumericField, where + ": '" + s + "' is not a number");
            return v;
        };

        double class_raw = number(tokens[0]);
        if (class_raw < 0 || class_raw != std::floor(class_raw))
            raise(ErrorCode::NonNumericField,
                  where + ": class id must be a non-negative integer");

        YoloRecord rec;
        rec.class_id = static_cast<int>(class_raw);
        rec.x_center = number(tokens[1]);
        rec.y_center = number(tokens[2]);
        rec.width = number(tokens[3]);
        rec.height = number(tokens[4]);
        auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (!in_unit(rec.x_center) || !in_unit(rec.y_center) || !in_unit(rec.width) ||
            !in_unit(rec.height) || rec.width <= 0.0 || rec.height <= 0.0)
            raise(ErrorCode::RangeViolation, where + ": geometry fields must lie in [0, 1]");
        records.push_back(rec);
    }
    return records;
}

std::string format_yolo_txt(const std::vector<YoloRecord>& records) {
    std::string out;
    char buf[128];
    for (const YoloRecord& rec : records) {
        std::snprintf(buf, sizeof(buf), "%d %.6f %.6f %.6f %.6f\n", rec.class_id, rec.x_center,
                      rec.y_center, rec.width, rec.height);
        out += buf;
    }
    return out;
}

namespace {

struct SplitPlan {
    std::vector<std::size_t> order; // shuffled positions
    std::size_t n_train = 0;
    std::size_t n_val = 0;
    std::size_t n_test = 0;
};

SplitPlan split_plan(std::size_t n, const std::array<double, 3>& ratios, std::uint64_t seed) {
    double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(sum - 1.0) > 1e-9 || ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0)
        raise(ErrorCode::BadRatios, "split ratios must be non-negative and sum to 1");
    if (n == 0) raise(ErrorCode::BadRatios, "nothing to split");

    SplitPlan plan;
    plan.n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios[1]));
    plan.n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios[2]));
    plan.n_train = n - plan.n_val - plan.n_test;

    // Hand-rolled Fisher-Yates over mt19937_64: std::shuffle is not
    // guaranteed to produce identical permutations across standard
    // libraries, and split outputs must be byte-stable.
    plan.order.resize(n);
    for (std::size_t i = 0; i < n; ++i) plan.order[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(plan.order[i], plan.order[j]);
    }
    return plan;
}

} // namespace

DatasetSplit split_dataset(const std::vector<std::string>& ids,
                           const std::array<double, 3>& ratios, std::uint64_t seed) {
    SplitPlan plan = split_plan(ids.size(), ratios, seed);
    DatasetSplit split;
    split.seed = seed;
    for (std::size_t i = 0; i < plan.order.size(); ++i) {
        const std::string& id = ids[plan.order[i]];
        if (i < plan.n_train) split.train.push_back(id);
        else if (i < plan.n_train + plan.n_val) split.val.push_back(id);
        else split.test.push_back(id);
    }
    return split;
}

std::vector<int> split_assignment(std::size_t count, const std::array<double, 3>& ratios,
                                  std::uint64_t seed) {
    SplitPlan plan = split_plan(count, ratios, seed);
    std::vector<int> assignment(count, 0);
    for (std::size_t i = 0; i < plan.order.size(); ++i) {
        int label = i < plan.n_train ? 0 : (i < plan.n_train + plan.n_val ? 1 : 2);
        assignment[plan.order[i]] = label;
    }
    return assignment;
}

} // namespace archbench::annot
