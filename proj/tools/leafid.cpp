#include "leafid/dataset.hpp"
#include "leafid/error.hpp"
#include "leafid/feature_store.hpp"
#include "leafid/metrics.hpp"
#include "leafid/model_io.hpp"
#include "leafid/parallel.hpp"
#include "leafid/pipeline.hpp"
#include "leafid/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>

namespace fs = std::filesystem;
using namespace leafid;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitSegmentation = 3;
constexpr int kExitModel = 4;

void add_config(CLI::App* app) {
    app->add_option("--config", "JSON object of option values keyed by flag name; command-line flags take precedence")
        ->check(CLI::ExistingFile);
}

std::string json_text(const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

// Appends the options of every `--config FILE` as `--key=value` tokens unless the
// command line already sets them.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::set<std::string> given;
    std::vector<std::string> files;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (!a.starts_with("--")) continue;
        const std::string name = a.substr(2, a.find('=') - 2);
        given.insert(name);
        if (name != "config") continue;
        if (a.find('=') != std::string::npos) files.push_back(a.substr(a.find('=') + 1));
        else if (i + 1 < args.size()) files.push_back(args[i + 1]);
    }
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) continue;  // reported by the option's file check
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConversionError(file + " is not valid JSON: " + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError(file + " must hold a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (given.count(key)) continue;
            given.insert(key);
            if (value.is_boolean()) {
                if (value.get<bool>()) args.push_back("--" + key);
            } else if (value.is_array()) {
                std::string joined;
                for (const auto& v : value) joined += (joined.empty() ? "" : ",") + json_text(v);
                args.push_back("--" + key + "=" + joined);
            } else {
                args.push_back("--" + key + "=" + json_text(value));
            }
        }
    }
    std::reverse(args.begin(), args.end());
    return args;
}

int exit_code(ErrorCode c) {
    switch (c) {
        case ErrorCode::EmptySegmentation:
        case ErrorCode::NoContour:
        case ErrorCode::DegenerateContour:
        case ErrorCode::RadiusTooSmall:
            return kExitSegmentation;
        case ErrorCode::VersionMismatch:
        case ErrorCode::CorruptModel:
        case ErrorCode::DimensionMismatch:
            return kExitModel;
        default:
            return kExitInput;
    }
}

struct ExtractOptions {
    std::vector<double> scales;
    bool low_res = false;
    std::string resize;
    bool selected_mask = false;
    bool reference_laii = false;
};

void add_extract_options(CLI::App* app, ExtractOptions& o) {
    app->add_option("--scales", o.scales, "LAII scales in percent of the perimeter")->delimiter(',');
    app->add_flag("--low-res", o.low_res, "Use the 5,10,15 scale profile for small images");
    app->add_option("--resize", o.resize, "Resample every image to WxH first");
    app->add_flag("--selected-mask", o.selected_mask, "Measure LAIIs against the selected contour's region only");
    app->add_flag("--reference-laii", o.reference_laii, "Use the direct (slower) LAII counting path");
}

PipelineConfig pipeline_config(const ExtractOptions& o) {
    PipelineConfig cfg;
    if (o.low_res) cfg.scales = ScaleSet::low_resolution();
    if (!o.scales.empty()) cfg.scales.scales = o.scales;
    cfg.scales.validate();
    if (!o.resize.empty()) {
        int w = 0, h = 0;
        char x = 0;
        if (std::sscanf(o.resize.c_str(), "%d%c%d", &w, &x, &h) != 3 || (x != 'x' && x != 'X') || w < 1 || h < 1)
            throw Error(ErrorCode::InvalidArgument, "--resize expects WxH, got " + o.resize);
        cfg.resize_width = w;
        cfg.resize_height = h;
    }
    if (o.selected_mask) cfg.laii_mask = LaiiMaskSource::SelectedContour;
    if (o.reference_laii) cfg.laii_method = LaiiMethod::Reference;
    return cfg;
}

ScaleSet scales_for_dim(Eigen::Index dim, const std::vector<double>& requested) {
    ScaleSet s;
    if (!requested.empty()) {
        s.scales = requested;
    } else if (dim == static_cast<Eigen::Index>(feature_count(ScaleSet::low_resolution().scales.size()))) {
        s = ScaleSet::low_resolution();
    }
    s.validate();
    if (static_cast<Eigen::Index>(feature_count(s.scales.size())) != dim)
        throw Error(ErrorCode::LengthMismatch, "feature width " + std::to_string(dim) + " does not match " +
                                                   std::to_string(s.scales.size()) + " scales; pass --scales");
    return s;
}

nlohmann::json summary_json(const EvalReport& r) {
    return {{"samples", r.samples},         {"accuracy", r.accuracy},   {"macro_recall", r.macro_recall},
            {"macro_precision", r.macro_precision}, {"macro_f1", r.macro_f1}, {"top_n", r.top_n}};
}

int run_segment(const std::string& image, const std::string& mask_out, const std::string& contour_out,
                const std::string& laii_out, const ExtractOptions& o) {
    const Extraction ex = extract(read_image(image), pipeline_config(o));
    if (!mask_out.empty()) write_mask_png(ex.mask, mask_out);
    if (!contour_out.empty()) write_points_csv(ex.sampled.points, contour_out);
    if (!laii_out.empty()) write_laii_csv(ex.laiis, laii_out);
    const nlohmann::json j = {{"image", image},
                              {"mask_pixels", ex.mask.count()},
                              {"contour_points", ex.contour.points.size()},
                              {"perimeter", ex.contour.perimeter},
                              {"area", ex.contour.area},
                              {"used_fallback", ex.used_fallback},
                              {"features", ex.features.values.size()}};
    std::cout << j.dump(2) << '\n';
    return 0;
}

int run_extract(const std::string& root, const std::string& out, const ExtractOptions& o, unsigned threads,
                bool strict) {
    const PipelineConfig cfg = pipeline_config(o);
    const Dataset ds = load_dataset(root);
    const std::size_t dim = feature_count(cfg.scales.scales.size());
    std::vector<std::optional<std::vector<double>>> rows(ds.items.size());
    std::mutex log_mutex;
    std::size_t failures = 0;
    parallel_for(ds.items.size(), threads, [&](std::size_t i) {
        const auto& item = ds.items[i];
        try {
            rows[i] = extract(read_image(item.path), cfg).features.values;
        } catch (const Error& e) {
            if (strict || exit_code(e.code()) != kExitSegmentation) throw;
            std::lock_guard lock(log_mutex);
            ++failures;
            std::cerr << "warning: skipped " << item.path.string() << ": " << e.what() << '\n';
        }
    });
    // Rows are written in dataset order by this thread alone.
    FeatureWriter writer(out, dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i]) writer.append(ds.classes[ds.items[i].label], ds.items[i].path.string(), *rows[i]);
    writer.close();
    std::cerr << "extracted " << rows.size() - failures << " of " << rows.size() << " images ("
              << ds.classes.size() << " classes, " << dim << " features)\n";
    return 0;
}

struct TrainOptions {
    std::string features, model, report, test_features, train_features;
    int test_per_class = 0;
    std::uint64_t seed = 0;
    std::optional<double> C, gamma;
    long pca_components = 128;
    bool cv_grid = false;
    int cv_folds = 5;
    std::vector<double> grid_C{leafid::kGridC.begin(), leafid::kGridC.end()};
    std::vector<double> grid_gamma{leafid::kGridGamma.begin(), leafid::kGridGamma.end()};
    std::vector<double> scales;
    unsigned threads = 1;
};

int run_train(const TrainOptions& o) {
    const FeatureTable table = read_features(o.features);
    ModelConfig cfg;
    cfg.scales = scales_for_dim(table.dim(), o.scales);
    cfg.pca_components = o.pca_components;
    cfg.svm.threads = o.threads;
    if (o.C) cfg.svm.C = *o.C;
    if (o.gamma) cfg.svm.gamma = *o.gamma;
    cfg.svm.validate();

    FeatureTable train = table, test;
    nlohmann::json summary = {{"classes", table.classes.size()}, {"samples", table.rows()}};
    if (o.test_per_class > 0) {
        const Split sp = split_labels(table.labels, static_cast<int>(table.classes.size()), o.test_per_class, o.seed);
        for (const auto& w : sp.warnings) std::cerr << "warning: " << w << '\n';
        train = subset(table, sp.train);
        test = subset(table, sp.test);
        summary["train"] = sp.train.size();
        summary["test"] = sp.test.size();
        summary["seed"] = o.seed;
        summary["test_per_class"] = o.test_per_class;
    }
    if (o.cv_grid) {
        const auto grid = leafid::cv_grid(train.values, train.labels, static_cast<int>(train.classes.size()), cfg,
                                          o.grid_C, o.grid_gamma, o.cv_folds, o.seed);
        nlohmann::json g = nlohmann::json::array();
        for (const auto& p : grid) g.push_back({{"C", p.C}, {"gamma", p.gamma}, {"accuracy", p.accuracy}});
        const GridPoint best = best_grid_point(grid);
        cfg.svm.C = best.C;
        cfg.svm.gamma = best.gamma;
        summary["cv_grid"] = g;
    }
    summary["C"] = cfg.svm.C;
    summary["gamma"] = cfg.svm.gamma;

    const OvoSvmModel model = fit_model(train.values, train.labels, train.classes, cfg);
    save_model(model, o.model);
    summary["pca_components"] = model.pca.output_dim();
    summary["support_vectors"] = model.svm.support_pool.rows();
    std::size_t unconverged = 0;
    for (const auto& m : model.svm.machines) unconverged += !m.converged;
    if (unconverged) std::cerr << "warning: " << unconverged << " binary machines hit the iteration limit\n";

    auto write_rows = [](const FeatureTable& t, const std::string& path) {
        FeatureWriter w(path, static_cast<std::size_t>(t.dim()));
        for (Eigen::Index r = 0; r < t.rows(); ++r) {
            const Eigen::RowVectorXd row = t.values.row(r);
            w.append(t.classes[static_cast<std::size_t>(t.labels[static_cast<std::size_t>(r)])],
                     t.sources[static_cast<std::size_t>(r)],
                     std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
        }
        w.close();
    };
    if (!o.train_features.empty()) write_rows(train, o.train_features);
    if (test.rows() > 0) {
        if (!o.test_features.empty()) write_rows(test, o.test_features);
        const EvalReport r = evaluate(model, test.values, test.labels, o.threads);
        if (!o.report.empty()) write_report(r, o.report);
        summary["evaluation"] = summary_json(r);
    }
    std::cout << summary.dump(2) << '\n';
    return 0;
}

/// Maps the table's class names onto the model's label indices.
std::vector<int> labels_for_model(const FeatureTable& t, const OvoSvmModel& m) {
    std::vector<int> map(t.classes.size(), -1);
    for (std::size_t c = 0; c < t.classes.size(); ++c)
        for (std::size_t k = 0; k < m.labels.size(); ++k)
            if (m.labels[k] == t.classes[c]) map[c] = static_cast<int>(k);
    std::vector<int> out;
    for (int l : t.labels) {
        if (map[static_cast<std::size_t>(l)] < 0)
            throw Error(ErrorCode::InvalidArgument,
                        "class '" + t.classes[static_cast<std::size_t>(l)] + "' is not known to the model");
        out.push_back(map[static_cast<std::size_t>(l)]);
    }
    return out;
}

int run_evaluate(const std::string& model_path, const std::string& features, const std::string& report,
                 unsigned threads) {
    const OvoSvmModel m = load_model(model_path);
    const FeatureTable t = read_features(features);
    const EvalReport r = evaluate(m, t.values, labels_for_model(t, m), threads);
    if (!report.empty()) write_report(r, report);
    std::cout << summary_json(r).dump(2) << '\n';
    return 0;
}

int run_predict(const std::string& model_path, const std::vector<std::string>& images, int top,
                const ExtractOptions& o) {
    const OvoSvmModel m = load_model(model_path);
    PipelineConfig cfg = pipeline_config(o);
    cfg.scales = m.config.scales;
    const int n = std::min(top, m.svm.num_classes);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& path : images) {
        const Extraction ex = extract(read_image(path), cfg);
        nlohmann::json ranks = nlohmann::json::array();
        for (const auto& r : m.predict_topn(ex.features.values, n))
            ranks.push_back({{"label", m.labels[static_cast<std::size_t>(r.label)]},
                             {"votes", r.votes},
                             {"margin_sum", r.margin_sum}});
        out.push_back({{"image", path}, {"ranking", ranks}});
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

int run_synth(const std::string& spec_path, const std::string& out, std::uint64_t seed, bool write_spec) {
    SynthSpec spec = SynthSpec::default_spec();
    if (!spec_path.empty()) {
        std::ifstream in(spec_path);
        if (!in) throw Error(ErrorCode::Io, "cannot read " + spec_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::InvalidArgument, std::string("spec is not valid JSON: ") + e.what());
        }
        spec = SynthSpec::from_json(j);
    }
    const Dataset ds = synth_corpus(spec, seed, out);
    if (write_spec) {
        std::ofstream s(fs::path(out) / "spec.json");
        s << spec.to_json().dump(2) << '\n';
    }
    std::cerr << "wrote " << ds.items.size() << " images in " << ds.classes.size() << " classes to " << out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shape-based leaf identification from local area integral invariants"};
    app.require_subcommand(1);
    unsigned threads = default_threads();

    auto* seg = app.add_subcommand("segment", "Segment one image and report its leaf boundary");
    std::string seg_image, mask_out, contour_out, laii_out;
    ExtractOptions seg_opts;
    seg->add_option("image", seg_image, "Input image")->required()->check(CLI::ExistingFile);
    seg->add_option("--mask-out", mask_out, "Write the segmentation mask as PNG");
    seg->add_option("--contour-out", contour_out, "Write the 256 resampled boundary points as CSV");
    seg->add_option("--laii-out", laii_out, "Write the LAII signals as CSV");
    add_extract_options(seg, seg_opts);
    add_config(seg);

    auto* ext = app.add_subcommand("extract", "Extract features for every image of a dataset directory");
    std::string ext_root, ext_out;
    bool strict = false;
    ExtractOptions ext_opts;
    ext->add_option("dataset_root", ext_root, "Directory with one sub-directory per class")
        ->required()
        ->check(CLI::ExistingDirectory);
    ext->add_option("--out", ext_out, "Feature CSV to write")->required();
    ext->add_flag("--strict", strict, "Fail on the first image without a usable boundary");
    ext->add_option("--threads", threads, "Worker threads");
    add_extract_options(ext, ext_opts);
    add_config(ext);

    auto* tr = app.add_subcommand("train", "Train a classifier from a feature CSV");
    TrainOptions to;
    tr->add_option("--features", to.features, "Feature CSV")->required()->check(CLI::ExistingFile);
    tr->add_option("--test-per-class", to.test_per_class, "Hold out this many images per class (0 = none)");
    tr->add_option("--seed", to.seed, "Split and cross-validation seed");
    tr->add_option("--model", to.model, "Model file to write")->required();
    tr->add_option("--C", to.C, "Soft-margin penalty (default 1000)");
    tr->add_option("--gamma", to.gamma, "RBF kernel width (default 7)");
    tr->add_option("--pca-components", to.pca_components, "Principal components kept");
    tr->add_flag("--cv-grid", to.cv_grid, "Choose C and gamma by k-fold cross-validation on the training split");
    tr->add_option("--cv-folds", to.cv_folds, "Folds for --cv-grid");
    tr->add_option("--grid-C", to.grid_C, "C values for --cv-grid")->delimiter(',');
    tr->add_option("--grid-gamma", to.grid_gamma, "gamma values for --cv-grid")->delimiter(',');
    tr->add_option("--scales", to.scales, "Scale set the features were extracted with")->delimiter(',');
    tr->add_option("--report", to.report, "Write the held-out evaluation report (JSON)");
    tr->add_option("--test-features", to.test_features, "Write the held-out rows as a feature CSV");
    tr->add_option("--train-features", to.train_features, "Write the training rows as a feature CSV");
    tr->add_option("--threads", to.threads, "Worker threads for training and evaluation");
    add_config(tr);

    auto* pr = app.add_subcommand("predict", "Rank the classes for one or more images");
    std::string pr_model;
    std::vector<std::string> pr_images;
    int top = 5;
    ExtractOptions pr_opts;
    pr->add_option("--model", pr_model, "Model file")->required()->check(CLI::ExistingFile);
    pr->add_option("images", pr_images, "Input images")->required()->check(CLI::ExistingFile);
    pr->add_option("--top", top, "Number of ranked classes to print")->check(CLI::PositiveNumber);
    pr->add_option("--resize", pr_opts.resize, "Resample every image to WxH first");
    pr->add_flag("--selected-mask", pr_opts.selected_mask, "Measure LAIIs against the selected contour's region only");
    add_config(pr);

    auto* ev = app.add_subcommand("evaluate", "Score a model on a labelled feature CSV");
    std::string ev_model, ev_features, ev_report;
    ev->add_option("--model", ev_model, "Model file")->required()->check(CLI::ExistingFile);
    ev->add_option("--features", ev_features, "Feature CSV")->required()->check(CLI::ExistingFile);
    ev->add_option("--report", ev_report, "Report JSON to write");
    ev->add_option("--threads", threads, "Worker threads");
    add_config(ev);

    auto* sy = app.add_subcommand("synth", "Render a synthetic shape corpus");
    std::string sy_spec, sy_out;
    std::uint64_t sy_seed = 1;
    bool sy_write_spec = false;
    sy->add_option("--spec", sy_spec, "Corpus description (JSON); defaults to five shape families")
        ->check(CLI::ExistingFile);
    sy->add_option("--out", sy_out, "Output directory")->required();
    sy->add_option("--seed", sy_seed, "Random seed");
    sy->add_flag("--write-spec", sy_write_spec, "Also write the effective spec to <out>/spec.json");
    add_config(sy);

    auto* pt = app.add_subcommand("plot-topn", "Write the top-n accuracy curve of a report as CSV");
    std::string pt_report, pt_out;
    pt->add_option("--report", pt_report, "Report JSON")->required()->check(CLI::ExistingFile);
    pt->add_option("--out", pt_out, "CSV to write")->required();
    add_config(pt);

    try {
        app.parse(expand_config(argc, argv));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*seg) return run_segment(seg_image, mask_out, contour_out, laii_out, seg_opts);
        if (*ext) return run_extract(ext_root, ext_out, ext_opts, threads, strict);
        if (*tr) return run_train(to);
        if (*pr) return run_predict(pr_model, pr_images, top, pr_opts);
        if (*ev) return run_evaluate(ev_model, ev_features, ev_report, threads);
        if (*sy) return run_synth(sy_spec, sy_out, sy_seed, sy_write_spec);
        if (*pt) {
            write_topn_csv(read_report(pt_report), pt_out);
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}
