#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace archbench::annot {

// Class ids: 0 = empty ("e"), 1 = occupied ("o").
constexpr int kClassEmpty = 0;
constexpr int kClassOccupied = 1;

struct PixelBox {
    double x_min = 0;
    double y_min = 0;
    double x_max = 0;
    double y_max = 0;
    int class_id = 0;

    double area() const { return (x_max - x_min) * (y_max - y_min); }
};

struct YoloRecord {
    int class_id = 0;
    double x_center = 0;
    double y_center = 0;
    double width = 0;
    double height = 0;
};

struct ImageSize {
    double width = 1280;
    double height = 720;
};

struct ImageAnnotation {
    std::string image_id;
    ImageSize image_size;
    std::vector<PixelBox> boxes;
};

// PKLot-style XML: one <space occupied=...> per slot with <contour> points
// or a <rotatedRect>. Rotated geometry is reduced to its axis-aligned
// bounding box; coordinates are clamped to the image.
ImageAnnotation parse_pklot_xml(const std::string& text);

YoloRecord to_yolo_record(const PixelBox& box, const ImageSize& size);
PixelBox from_yolo_record(const YoloRecord& rec, const ImageSize& size);

std::vector<YoloRecord> parse_yolo_txt(const std::string& text);

// Six decimal places, space separated, one record per line.
std::string format_yolo_txt(const std::vector<YoloRecord>& records);

struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
    std::uint64_t seed = 0;
};

// Deterministic seeded split. Sizes are floor(n * ratio) for val and test
// with the remainder going to train.
DatasetSplit split_dataset(const std::vector<std::string>& ids,
                           const std::array<double, 3>& ratios, std::uint64_t seed);

// Same split keyed by position: assignment[i] is 0 (train), 1 (val) or
// 2 (test) for the i-th input id.
std::vector<int> split_assignment(std::size_t count, const std::array<double, 3>& ratios,
                                  std::uint64_t seed);

} // namespace archbench::annot
