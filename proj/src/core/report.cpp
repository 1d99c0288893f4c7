#include "core/report.hpp"

#include "core/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <sstream>

namespace archbench::report {

namespace {

std::string fmt_metric(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", value);
    std::string s = buf;
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    return fields;
}

} // namespace

std::string combined_report(const std::vector<std::string>& eval_jsons,
                            const std::string& analyze_csv) {
    if (eval_jsons.empty())
        raise(ErrorCode::SchemaMismatch, "no eval documents given");

    std::ostringstream out;
    out << "# Model comparison report\n\n";
    out << "## Detection metrics\n\n";
    out << "| Model | Precision | Recall | mAP50 | mAP50:95 |\n";
    out << "| --- | --- | --- | --- | --- |\n";
    for (std::size_t i = 0; i < eval_jsons.size(); ++i) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(eval_jsons[i]);
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::SchemaMismatch,
                  "eval document " + std::to_string(i) + ": " + e.what());
        }
        for (const char* key : {"model", "Precision", "Recall", "mAP50", "mAP50:95"}) {
            if (!doc.contains(key))
                raise(ErrorCode::SchemaMismatch,
                      "eval document " + std::to_string(i) + " lacks '" + key + "'");
        }
        out << "| " << doc["model"].get<std::string>() << " | "
            << fmt_metric(doc["Precision"].get<double>()) << " | "
            << fmt_metric(doc["Recall"].get<double>()) << " | "
            << fmt_metric(doc["mAP50"].get<double>()) << " | "
            << fmt_metric(doc["mAP50:95"].get<double>()) << " |\n";
    }

    if (!analyze_csv.empty()) {
        std::istringstream csv(analyze_csv);
        std::string line;
        if (!std::getline(csv, line) || split_csv_line(line) !=
                std::vector<std::string>{"model", "params_m", "layers", "gflops"})
            raise(ErrorCode::SchemaMismatch, "analyze CSV header mismatch");
        out << "\n## Model complexity\n\n";
        out << "| Model | Params (M) | Layers | GFLOPs |\n";
        out << "| --- | --- | --- | --- |\n";
        while (std::getline(csv, line)) {
            if (line.empty()) continue;
            std::vector<std::string> fields = split_csv_line(line);
            if (fields.size() != 4)
                raise(ErrorCode::SchemaMismatch, "analyze CSV row has wrong arity");
            out << "| " << fields[0] << " | " << fields[1] << " | " << fields[2] << " | "
                << fields[3] << " |\n";
        }
    }
    return out.str();
}

} // namespace archbench::report
