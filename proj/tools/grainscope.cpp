// grainscope command-line front end.
//
//   grainscope features IMAGE... [-o features.csv] [--dump-labels DIR]
//   grainscope fit VARIETY=PATH... -o model.json
//   grainscope classify --model model.json SAMPLE... [-o samples.csv]
//   grainscope evaluate --model model.json TRUTH=PATH... [-o accuracy.csv] [--samples-csv samples.csv]
//   grainscope synth SCENE.json -o scene.pgm [--truth truth.csv]
//
// PATH is a feature CSV, an image, or a directory of those. Exit codes: 0 ok,
// 1 input error, 2 internal error.

#include "grainscope/classify.hpp"
#include "grainscope/csv.hpp"
#include "grainscope/error.hpp"
#include "grainscope/pipeline.hpp"
#include "grainscope/raster.hpp"
#include "grainscope/serialize.hpp"
#include "grainscope/synth.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace grainscope;

namespace {

struct RunConfig {
    std::vector<std::string> inputs;
    std::string output;
    std::size_t median_window = 3;
    std::size_t min_area = 50;
    std::size_t k_components = 0;  // 0: variance rule
    std::size_t k_neighbors = 5;
    bool standardize = false;
    bool exclude_border = false;
    std::optional<std::uint64_t> seed;
    bool deterministic = false;

    std::string model;
    std::string dump_labels;
    std::string samples_out;
    std::string truth_out;

    PipelineOptions pipeline() const {
        PipelineOptions p;
        p.median_window = median_window;
        p.min_area = min_area;
        p.border = exclude_border ? segment::BorderPolicy::Exclude : segment::BorderPolicy::Keep;
        return p;
    }
};

std::size_t worker_count(std::size_t jobs) {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GRAINSCOPE_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidArgument, std::string("GRAINSCOPE_THREADS is not a number: ") + env);
        }
    }
    return std::max<std::size_t>(1, std::min(n, jobs));
}

// Runs fn(i) for i in [0, n) on a small pool; rethrows the lowest-index failure.
template <class Fn>
void parallel_for(std::size_t n, Fn fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t workers = worker_count(n);
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

bool is_csv(const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".csv";
}

bool is_image(const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".pgm" || ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

// A file stands for itself; a directory expands to its CSV and image files, sorted.
std::vector<fs::path> expand(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_directory(path, ec)) {
        if (!fs::exists(path, ec)) throw Error(ErrorCode::FileNotFound, path.string() + ": no such file or directory");
        return {path};
    }
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.is_regular_file() && (is_csv(entry.path()) || is_image(entry.path()))) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    if (out.empty()) throw Error(ErrorCode::FileNotFound, path.string() + ": directory holds no CSV or image files");
    return out;
}

struct Source {
    fs::path path;
    std::vector<morphology::GrainFeatures> grains;
    std::vector<std::optional<std::string>> labels;  // CSV variety column, if any
    std::optional<segment::LabelMap> label_map;
};

Source load_source(const fs::path& path, const RunConfig& cfg, bool keep_labels = false) {
    Source s{path, {}, {}, {}};
    if (is_csv(path)) {
        for (auto& row : csv::parse_features_csv(csv::read_text_file(path), path.string())) {
            s.grains.push_back(row.features);
            s.labels.push_back(std::move(row.variety));
        }
        return s;
    }
    auto analysis = analyze_image(raster::load_grayscale(path), cfg.pipeline());
    s.grains = std::move(analysis.features);
    s.labels.resize(s.grains.size());
    if (keep_labels) s.label_map = std::move(analysis.labeling.map);
    return s;
}

std::vector<Source> load_all(const std::vector<fs::path>& paths, const RunConfig& cfg, bool keep_labels = false) {
    std::vector<Source> out(paths.size());
    parallel_for(paths.size(), [&](std::size_t i) { out[i] = load_source(paths[i], cfg, keep_labels); });
    return out;
}

std::pair<std::string, fs::path> split_assignment(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) return {"", fs::path(arg)};
    return {arg.substr(0, eq), fs::path(arg.substr(eq + 1))};
}

void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.output.empty() || cfg.output == "-") {
        std::cout << text;
    } else {
        csv::atomic_write(cfg.output, text);
    }
}

int cmd_features(const RunConfig& cfg) {
    std::vector<fs::path> paths;
    for (const auto& in : cfg.inputs) {
        // Named files are decoded whatever their extension; directories contribute images only.
        const bool dir = fs::is_directory(in);
        for (auto& p : expand(in)) {
            if (!dir || is_image(p)) paths.push_back(p);
        }
    }
    const auto sources = load_all(paths, cfg, !cfg.dump_labels.empty());
    std::vector<morphology::GrainFeatures> all;
    for (const auto& s : sources) all.insert(all.end(), s.grains.begin(), s.grains.end());

    if (!cfg.dump_labels.empty()) {
        fs::create_directories(cfg.dump_labels);
        for (const auto& s : sources) {
            if (!s.label_map) continue;
            const auto bytes = raster::encode_pgm(segment::label_visualization(*s.label_map));
            const auto out = fs::path(cfg.dump_labels) / (s.path.stem().string() + ".labels.pgm");
            csv::atomic_write(out, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
        }
    }
    emit(cfg, csv::features_csv(all, 1));
    return 0;
}

std::vector<classify::LabeledGrain> gather_training(const RunConfig& cfg) {
    std::vector<fs::path> paths;
    std::vector<std::string> labels;
    for (const auto& arg : cfg.inputs) {
        auto [variety, path] = split_assignment(arg);
        for (auto& p : expand(path)) {
            paths.push_back(p);
            labels.push_back(variety);
        }
    }
    const auto sources = load_all(paths, cfg);
    std::vector<classify::LabeledGrain> out;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        for (std::size_t g = 0; g < sources[i].grains.size(); ++g) {
            std::string variety = labels[i];
            if (variety.empty()) {
                if (!sources[i].labels[g]) {
                    throw Error(ErrorCode::InvalidArgument,
                                sources[i].path.string() +
                                    ": no variety given; use VARIETY=PATH or a CSV with a variety column");
                }
                variety = *sources[i].labels[g];
            }
            out.push_back({sources[i].grains[g], std::move(variety)});
        }
    }
    return out;
}

int cmd_fit(const RunConfig& cfg) {
    const auto grains = gather_training(cfg);
    classify::ReferenceOptions options;
    if (cfg.k_components > 0) options.components.k = static_cast<Eigen::Index>(cfg.k_components);
    options.standardize = cfg.standardize;
    options.k_neighbors = cfg.k_neighbors;
    const auto model = classify::build_reference(grains, options);
    csv::atomic_write(cfg.output, serialize::to_json(model).dump(2) + "\n");

    const auto& ev = model.pca.eigenvalues;
    const double total = ev.sum();
    std::cout << "grains: " << grains.size() << "  varieties: " << model.varieties.size() << "\n";
    std::cout << "component,eigenvalue,variance_ratio\n";
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        std::cout << i + 1 << "," << csv::format_number(ev[i]) << ","
                  << csv::format_number(total > 0 ? ev[i] / total : 0.0) << "\n";
    }
    std::cout << "retained k: " << model.pca.retained << "\n";
    return 0;
}

classify::ReferenceModel load_model(const RunConfig& cfg) {
    return serialize::reference_model_from_json(serialize::load_json(cfg.model));
}

struct Sample {
    std::string id;
    std::vector<morphology::GrainFeatures> grains;
    std::string truth;
};

std::vector<Sample> gather_samples(const RunConfig& cfg, bool need_truth) {
    std::vector<fs::path> paths;
    std::vector<std::string> truths;
    for (const auto& arg : cfg.inputs) {
        auto [truth, path] = need_truth ? split_assignment(arg) : std::pair{std::string(), fs::path(arg)};
        if (need_truth && truth.empty()) {
            throw Error(ErrorCode::InvalidArgument, "expected TRUTH=PATH, got '" + arg + "'");
        }
        for (auto& p : expand(path)) {
            paths.push_back(p);
            truths.push_back(truth);
        }
    }
    auto sources = load_all(paths, cfg);
    std::vector<Sample> out;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        out.push_back({paths[i].filename().string(), std::move(sources[i].grains), truths[i]});
    }
    return out;
}

std::vector<classify::SampleReport> classify_all(const classify::ReferenceModel& model,
                                                 const std::vector<Sample>& samples) {
    std::vector<classify::SampleReport> reports(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        reports[i] = classify::classify_sample(model, samples[i].grains, samples[i].id);
    });
    return reports;
}

int cmd_classify(const RunConfig& cfg) {
    const auto model = load_model(cfg);
    const auto samples = gather_samples(cfg, false);
    const auto reports = classify_all(model, samples);
    emit(cfg, csv::samples_csv(reports, model.varieties, {}, cfg.deterministic));
    return 0;
}

void print_accuracy(const classify::AccuracyTable& table) {
    std::size_t width = std::string("Overall").size();
    for (const auto& row : table.per_variety) width = std::max(width, row.variety.size());
    auto line = [&](const classify::AccuracyRow& row) {
        std::cout << std::left << std::setw(static_cast<int>(width + 2)) << row.variety << std::setw(15) << row.samples
                  << row.percent() << "%\n";
    };
    std::cout << std::left << std::setw(static_cast<int>(width + 2)) << "Variety" << std::setw(15) << "Total samples"
              << "Accuracy\n";
    for (const auto& row : table.per_variety) line(row);
    line(table.overall);
}

int cmd_evaluate(const RunConfig& cfg) {
    const auto model = load_model(cfg);
    const auto samples = gather_samples(cfg, true);
    if (samples.empty()) throw Error(ErrorCode::EmptyTestSet, "no test samples");
    const auto reports = classify_all(model, samples);
    std::vector<std::string> predicted, truths;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        predicted.push_back(model.varieties[reports[i].majority]);
        truths.push_back(samples[i].truth);
    }
    const auto table = classify::tally(model.varieties, predicted, truths);
    if (!cfg.samples_out.empty()) {
        csv::atomic_write(cfg.samples_out, csv::samples_csv(reports, model.varieties, truths, cfg.deterministic));
    }
    emit(cfg, csv::accuracy_csv(table));
    if (!cfg.output.empty() && cfg.output != "-") print_accuracy(table);
    return 0;
}

int cmd_synth(const RunConfig& cfg) {
    if (cfg.inputs.size() != 1) throw Error(ErrorCode::InvalidArgument, "synth takes exactly one scene JSON");
    auto spec = serialize::scene_spec_from_json(serialize::load_json(cfg.inputs[0]));
    if (cfg.seed) spec.seed = *cfg.seed;
    const auto scene = synth::render_scene(spec);
    const auto bytes = raster::encode_pgm(scene.image);
    const fs::path image_path(cfg.output);
    fs::path truth_path(cfg.truth_out);
    if (truth_path.empty()) truth_path = fs::path(image_path).replace_extension(".truth.csv");
    csv::atomic_write(truth_path, csv::truth_csv(scene.truth));
    csv::atomic_write(image_path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    std::cout << "wrote " << image_path.string() << " (" << scene.truth.size() << " grains) and "
              << truth_path.string() << "\n";
    return 0;
}

void add_pipeline_flags(CLI::App* app, RunConfig& cfg) {
    app->add_option("--median-window", cfg.median_window, "Median filter window (odd)")->capture_default_str();
    app->add_option("--min-area", cfg.min_area, "Smallest grain area in pixels")->capture_default_str();
    app->add_flag("--exclude-border", cfg.exclude_border, "Drop grains touching the image border");
    // Only synth draws random numbers; elsewhere the seed is accepted for uniform scripting.
    app->add_option("--seed", cfg.seed, "Random seed");
}

int run(int argc, char** argv) {
    CLI::App app{"Rice grain variety classification from images"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* features = app.add_subcommand("features", "Extract grain features from images into a CSV table");
    features->add_option("images", cfg.inputs, "Image files or directories")->required();
    features->add_option("-o,--output", cfg.output, "Output CSV (default: stdout)");
    features->add_option("--dump-labels", cfg.dump_labels, "Directory for label-map PGMs");
    add_pipeline_flags(features, cfg);

    auto* fit = app.add_subcommand("fit", "Build a reference model from labeled grains");
    fit->add_option("inputs", cfg.inputs, "VARIETY=PATH or labeled CSV")->required();
    fit->add_option("-o,--output", cfg.output, "Model JSON")->required();
    fit->add_option("--k-components", cfg.k_components, "Retained components (default: 95% variance)");
    fit->add_option("--k-neighbors", cfg.k_neighbors, "Neighbours per vote (odd)")->capture_default_str();
    fit->add_flag("--standardize", cfg.standardize, "Scale features to unit variance");
    add_pipeline_flags(fit, cfg);

    auto* cls = app.add_subcommand("classify", "Classify samples with a reference model");
    cls->add_option("samples", cfg.inputs, "Sample images, feature CSVs or directories")->required();
    cls->add_option("--model", cfg.model, "Model JSON")->required();
    cls->add_option("-o,--output", cfg.output, "Output CSV (default: stdout)");
    cls->add_flag("--deterministic", cfg.deterministic, "Write zero elapsed times");
    add_pipeline_flags(cls, cfg);

    auto* eval = app.add_subcommand("evaluate", "Accuracy of a model on labeled samples");
    eval->add_option("samples", cfg.inputs, "TRUTH=PATH")->required();
    eval->add_option("--model", cfg.model, "Model JSON")->required();
    eval->add_option("-o,--output", cfg.output, "Accuracy CSV (default: stdout)");
    eval->add_option("--samples-csv", cfg.samples_out, "Also write the per-sample CSV here");
    eval->add_flag("--deterministic", cfg.deterministic, "Write zero elapsed times");
    add_pipeline_flags(eval, cfg);

    auto* syn = app.add_subcommand("synth", "Render a synthetic scene");
    syn->add_option("scene", cfg.inputs, "Scene JSON")->required();
    syn->add_option("-o,--output", cfg.output, "Output PGM")->required();
    syn->add_option("--truth", cfg.truth_out, "Truth CSV (default: <output>.truth.csv)");
    syn->add_option("--seed", cfg.seed, "Override the scene's noise seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*features) return cmd_features(cfg);
    if (*fit) return cmd_fit(cfg);
    if (*cls) return cmd_classify(cfg);
    if (*eval) return cmd_evaluate(cfg);
    return cmd_synth(cfg);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "grainscope: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "grainscope: internal error: " << e.what() << "\n";
        return 2;
    }
}
