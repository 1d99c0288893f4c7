// archbench command-line front end. Talks to the core exclusively through
// the C API in archbench.h; all file and directory handling lives here.

#include "archbench.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitEmptyGroundTruth = 3;

struct StringDeleter {
    void operator()(char* s) const { ab_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

int exit_code_for(ab_status status) {
    return status == AB_ERR_NO_GROUND_TRUTH ? kExitEmptyGroundTruth : kExitInputError;
}

bool read_file(const fs::path& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream buf;
    buf << in.rdbuf();
    out = buf.str();
    return true;
}

// Writes via a temp file and rename so reruns never expose partial output.
bool write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return false;
        out << content;
        if (!out) return false;
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    return !ec;
}

int emit(const std::string& content, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << content;
        return kExitOk;
    }
    if (!write_file_atomic(out_path, content)) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return kExitInputError;
    }
    return kExitOk;
}

ab_format parse_format(const std::string& name) {
    if (name == "md" || name == "markdown") return AB_FORMAT_MARKDOWN;
    if (name == "json") return AB_FORMAT_JSON;
    return AB_FORMAT_CSV;
}

int run_analyze(const std::vector<std::string>& model_paths, int imgsz,
                const std::string& format, const std::string& scale,
                const std::string& backbones_dir, const std::string& out_path) {
    if (!backbones_dir.empty()) {
        if (ab_backbones_load_dir(backbones_dir.c_str()) != AB_OK) {
            std::cerr << "error: " << backbones_dir << ": " << ab_last_error() << "\n";
            return kExitInputError;
        }
    }

    std::vector<ab_summary*> summaries;
    auto cleanup = [&] {
        for (ab_summary* s : summaries) ab_summary_free(s);
    };

    for (const std::string& path : model_paths) {
        std::string text;
        if (!read_file(path, text)) {
            std::cerr << "error: cannot read model config " << path << "\n";
            cleanup();
            return kExitInputError;
        }
        ab_model* model = nullptr;
        if (ab_model_parse(text.c_str(), &model) != AB_OK) {
            std::cerr << "error: " << path << ": " << ab_last_error() << "\n";
            cleanup();
            return kExitInputError;
        }
        OwnedString name;
        {
            char* raw = nullptr;
            if (ab_model_name(model, &raw) == AB_OK) name.reset(raw);
        }
        std::string display = name != nullptr && name.get()[0] != '\0'
                                  ? std::string(name.get())
                                  : fs::path(path).stem().string();

        ab_graph* graph = nullptr;
        ab_status status = ab_graph_build(model, scale.empty() ? nullptr : scale.c_str(), imgsz,
                                          &graph);
        if (status != AB_OK) {
            std::cerr << "error: " << path << ": " << ab_last_error() << "\n";
            ab_model_free(model);
            cleanup();
            return kExitInputError;
        }
        ab_summary* summary = nullptr;
        status = ab_graph_summarize(graph, display.c_str(), &summary);
        ab_graph_free(graph);
        ab_model_free(model);
        if (status != AB_OK) {
            std::cerr << "error: " << path << ": " << ab_last_error() << "\n";
            cleanup();
            return kExitInputError;
        }
        summaries.push_back(summary);
    }

    char* rendered = nullptr;
    ab_status status = ab_comparison_render(summaries.data(), summaries.size(),
                                            parse_format(format), &rendered);
    cleanup();
    if (status != AB_OK) {
        std::cerr << "error: " << ab_last_error() << "\n";
        return kExitInputError;
    }
    OwnedString owned(rendered);
    return emit(owned.get(), out_path);
}

int run_convert(const std::string& xml_dir, const std::string& out_dir,
                const std::string& names) {
    std::error_code ec;
    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(xml_dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".xml")
            inputs.push_back(entry.path());
    }
    if (ec) {
        std::cerr << "error: cannot read directory " << xml_dir << "\n";
        return kExitInputError;
    }
    if (inputs.empty()) {
        std::cerr << "error: no input files in " << xml_dir << "\n";
        return kExitInputError;
    }
    std::sort(inputs.begin(), inputs.end());

    fs::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create " << out_dir << "\n";
        return kExitInputError;
    }

    std::ostringstream manifest;
    std::size_t converted = 0;
    for (const fs::path& path : inputs) {
        std::string stem = path.stem().string();
        std::string xml;
        if (!read_file(path, xml)) {
            std::cerr << "error: cannot read " << path.string() << "\n";
            return kExitInputError;
        }
        char* txt = nullptr;
        int boxes = 0;
        ab_status status = ab_pklot_xml_to_yolo_txt(xml.c_str(), &txt, &boxes);
        if (status != AB_OK) {
            manifest << stem << " error " << ab_status_name(status) << "\n";
            continue;
        }
        OwnedString owned(txt);
        if (!write_file_atomic(fs::path(out_dir) / (stem + ".txt"), owned.get())) {
            std::cerr << "error: cannot write " << (fs::path(out_dir) / (stem + ".txt")).string()
                      << "\n";
            return kExitInputError;
        }
        manifest << stem << " ok " << boxes << "\n";
        ++converted;
    }

    if (!write_file_atomic(fs::path(out_dir) / "manifest.txt", manifest.str())) {
        std::cerr << "error: cannot write manifest\n";
        return kExitInputError;
    }

    // Dataset config with the class-name map (0 = empty, 1 = occupied).
    std::string label_0 = "e";
    std::string label_1 = "o";
    if (!names.empty()) {
        std::size_t comma = names.find(',');
        if (comma == std::string::npos) {
            std::cerr << "error: --names expects two comma-separated labels\n";
            return kExitInputError;
        }
        label_0 = names.substr(0, comma);
        label_1 = names.substr(comma + 1);
    }
    std::ostringstream dataset;
    dataset << "path: " << out_dir << "\n";
    dataset << "labels: .\n";
    dataset << "names:\n";
    dataset << "  0: " << label_0 << "\n";
    dataset << "  1: " << label_1 << "\n";
    if (!write_file_atomic(fs::path(out_dir) / "dataset.yaml", dataset.str())) {
        std::cerr << "error: cannot write dataset.yaml\n";
        return kExitInputError;
    }

    std::cerr << "converted " << converted << "/" << inputs.size() << " files\n";
    return converted > 0 ? kExitOk : kExitInputError;
}

int run_split(const std::string& manifest_path, const std::string& ratios_text,
              std::uint64_t seed, const std::string& out_dir) {
    std::string manifest;
    if (!read_file(manifest_path, manifest)) {
        std::cerr << "error: cannot read manifest " << manifest_path << "\n";
        return kExitInputError;
    }

    std::vector<std::string> ids;
    std::istringstream lines(manifest);
    std::string line;
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::string id, status;
        if (!(fields >> id)) continue;
        if (fields >> status && status == "error") continue; // skip failed conversions
        ids.push_back(id);
    }
    if (ids.empty()) {
        std::cerr << "error: manifest " << manifest_path << " lists no ids\n";
        return kExitInputError;
    }

    double r[3] = {0, 0, 0};
    if (std::sscanf(ratios_text.c_str(), "%lf,%lf,%lf", &r[0], &r[1], &r[2]) != 3) {
        std::cerr << "error: --ratios expects three comma-separated numbers\n";
        return kExitInputError;
    }

    std::vector<const char*> id_ptrs;
    id_ptrs.reserve(ids.size());
    for (const std::string& id : ids) id_ptrs.push_back(id.c_str());
    std::vector<int> assignment(ids.size(), 0);
    size_t sizes[3] = {0, 0, 0};
    ab_status status = ab_split_ids(id_ptrs.data(), id_ptrs.size(), r[0], r[1], r[2], seed,
                                    assignment.data(), sizes);
    if (status != AB_OK) {
        std::cerr << "error: " << ab_last_error() << "\n";
        return exit_code_for(status);
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const char* file_names[3] = {"train.txt", "val.txt", "test.txt"};
    for (int part = 0; part < 3; ++part) {
        std::string content;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (assignment[i] == part) content += ids[i] + "\n";
        }
        if (!write_file_atomic(fs::path(out_dir) / file_names[part], content)) {
            std::cerr << "error: cannot write " << file_names[part] << "\n";
            return kExitInputError;
        }
    }
    std::cerr << "split " << ids.size() << " ids into " << sizes[0] << "/" << sizes[1] << "/"
              << sizes[2] << "\n";
    return kExitOk;
}

int run_eval(const std::string& preds_path, const std::string& gt_dir, double iou, double conf,
             const std::string& format, const std::string& name, const std::string& out_path) {
    std::string preds;
    if (!read_file(preds_path, preds)) {
        std::cerr << "error: cannot read predictions " << preds_path << "\n";
        return kExitInputError;
    }

    ab_eval* eval = nullptr;
    if (ab_eval_new(&eval) != AB_OK) {
        std::cerr << "error: " << ab_last_error() << "\n";
        return kExitInputError;
    }
    struct EvalGuard {
        ab_eval* handle;
        ~EvalGuard() { ab_eval_free(handle); }
    } eval_guard{eval};

    if (ab_eval_add_predictions(eval, preds.c_str()) != AB_OK) {
        std::cerr << "error: " << preds_path << ": " << ab_last_error() << "\n";
        return kExitInputError;
    }

    std::error_code ec;
    std::vector<fs::path> gt_files;
    for (const auto& entry : fs::directory_iterator(gt_dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            gt_files.push_back(entry.path());
    }
    if (ec) {
        std::cerr << "error: cannot read ground-truth directory " << gt_dir << "\n";
        return kExitInputError;
    }
    std::sort(gt_files.begin(), gt_files.end());
    for (const fs::path& path : gt_files) {
        if (path.filename() == "manifest.txt") continue;
        std::string txt;
        if (!read_file(path, txt)) {
            std::cerr << "error: cannot read " << path.string() << "\n";
            return kExitInputError;
        }
        if (ab_eval_add_ground_truth(eval, path.stem().string().c_str(), txt.c_str()) != AB_OK) {
            std::cerr << "error: " << path.string() << ": " << ab_last_error() << "\n";
            return kExitInputError;
        }
    }

    std::string display = name.empty() ? fs::path(preds_path).stem().string() : name;
    ab_report* report = nullptr;
    ab_status status = ab_eval_run(eval, display.c_str(), iou, conf, &report);
    if (status != AB_OK) {
        std::cerr << "error: " << ab_last_error() << "\n";
        return exit_code_for(status);
    }

    char* rendered = nullptr;
    status = ab_report_render(report, parse_format(format), &rendered);
    ab_report_free(report);
    if (status != AB_OK) {
        std::cerr << "error: " << ab_last_error() << "\n";
        return kExitInputError;
    }
    OwnedString owned(rendered);
    return emit(owned.get(), out_path);
}

int run_report(const std::vector<std::string>& eval_paths, const std::string& analyze_path,
               const std::string& out_path) {
    std::vector<std::string> docs;
    for (const std::string& path : eval_paths) {
        std::string text;
        if (!read_file(path, text)) {
            std::cerr << "error: cannot read " << path << "\n";
            return kExitInputError;
        }
        docs.push_back(std::move(text));
    }
    std::string csv;
    if (!analyze_path.empty() && !read_file(analyze_path, csv)) {
        std::cerr << "error: cannot read " << analyze_path << "\n";
        return kExitInputError;
    }

    std::vector<const char*> doc_ptrs;
    for (const std::string& d : docs) doc_ptrs.push_back(d.c_str());
    char* rendered = nullptr;
    ab_status status = ab_combined_report(doc_ptrs.data(), doc_ptrs.size(),
                                          csv.empty() ? nullptr : csv.c_str(), &rendered);
    if (status != AB_OK) {
        std::cerr << "error: " << ab_last_error() << "\n";
        return kExitInputError;
    }
    OwnedString owned(rendered);
    return emit(owned.get(), out_path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Static model-architecture analysis and detection evaluation"};
    app.require_subcommand(1);

    // analyze
    std::vector<std::string> model_paths;
    int imgsz = 640;
    std::string format = "csv";
    std::string scale;
    std::string backbones_dir;
    std::string out_path;
    CLI::App* analyze = app.add_subcommand("analyze", "Analyze model configs into a comparison table");
    analyze->add_option("models", model_paths, "Model config files")->required();
    analyze->add_option("--imgsz", imgsz, "Input image size")->check(CLI::PositiveNumber);
    analyze->add_option("--format", format)->check(CLI::IsMember({"csv", "md", "json"}));
    analyze->add_option("--scale", scale, "Scale key (defaults to the config's single scale)");
    analyze->add_option("--backbones", backbones_dir, "Directory of backbone template tables");
    analyze->add_option("-o,--output", out_path, "Output file (stdout when omitted)");

    // convert
    std::string xml_dir, convert_out, names;
    CLI::App* convert = app.add_subcommand("convert", "Convert PKLot XML annotations to YOLO TXT");
    convert->add_option("xml_dir", xml_dir)->required();
    convert->add_option("out_dir", convert_out)->required();
    convert->add_option("--names", names, "Class labels as 'empty,occupied'");

    // split
    std::string manifest_path, ratios = "0.7,0.2,0.1", split_out = ".";
    std::uint64_t seed = 0;
    CLI::App* split = app.add_subcommand("split", "Split an id manifest into train/val/test");
    split->add_option("manifest", manifest_path)->required();
    split->add_option("--ratios", ratios, "train,val,test ratios");
    split->add_option("--seed", seed);
    split->add_option("--out-dir", split_out);

    // eval
    std::string preds_path, gt_dir, eval_format = "json", eval_name;
    double iou = 0.5, conf = 0.25;
    bool map5095 = false;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate predictions against ground truth");
    eval->add_option("--preds", preds_path)->required();
    eval->add_option("--gt", gt_dir)->required();
    eval->add_option("--iou", iou, "Matching IoU threshold")->check(CLI::Range(0.0, 1.0));
    eval->add_option("--conf", conf, "Operating-point confidence")->check(CLI::Range(0.0, 1.0));
    eval->add_flag("--map5095", map5095, "Accepted for compatibility; mAP50:95 is always reported");
    eval->add_option("--format", eval_format)->check(CLI::IsMember({"csv", "md", "json"}));
    eval->add_option("--name", eval_name, "Model name for the report row");
    eval->add_option("-o,--output", out_path, "Output file (stdout when omitted)");

    // report
    std::vector<std::string> eval_paths;
    std::string analyze_csv_path;
    CLI::App* report = app.add_subcommand("report", "Combine eval JSONs and an analyze CSV");
    report->add_option("evals", eval_paths, "Eval JSON files")->required();
    report->add_option("--analyze", analyze_csv_path, "Analyze CSV file");
    report->add_option("-o,--output", out_path, "Output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInputError;
    }

    if (analyze->parsed())
        return run_analyze(model_paths, imgsz, format, scale, backbones_dir, out_path);
    if (convert->parsed()) return run_convert(xml_dir, convert_out, names);
    if (split->parsed()) return run_split(manifest_path, ratios, seed, split_out);
    if (eval->parsed())
        return run_eval(preds_path, gt_dir, iou, conf, eval_format, eval_name, out_path);
    if (report->parsed()) return run_report(eval_paths, analyze_csv_path, out_path);
    return kExitInputError;
}
