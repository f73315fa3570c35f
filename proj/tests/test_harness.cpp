#include "leafid/dataset.hpp"
#include "leafid/error.hpp"
#include "leafid/feature_store.hpp"
#include "leafid/metrics.hpp"
#include "leafid/model_io.hpp"
#include "leafid/pipeline.hpp"
#include "leafid/synth.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <fstream>
#include <iterator>

using namespace leafid;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("leafid_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void touch_png(const fs::path& p) { write_png(Image(16, 16, 1, 255), p); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<RankedClass> ranking(std::initializer_list<int> labels) {
    std::vector<RankedClass> r;
    for (int l : labels) r.push_back({l, 0, 0.0});
    return r;
}

// Three Gaussian clusters in 12 dimensions, then a trained model.
struct BlobModel {
    Matrix x;
    std::vector<int> labels;
    OvoSvmModel model;
};

BlobModel blob_model() {
    Rng rng(21);
    BlobModel b;
    b.x.resize(60, 12);
    for (Eigen::Index i = 0; i < 60; ++i) {
        const int c = static_cast<int>(i % 3);
        b.labels.push_back(c);
        for (Eigen::Index j = 0; j < 12; ++j) b.x(i, j) = rng.normal() + (j % 3 == c ? 3.0 : 0.0);
    }
    ModelConfig cfg;
    cfg.svm.gamma = 0.05;
    cfg.pca_components = 6;
    b.model = fit_model(b.x, b.labels, {"a", "b", "c"}, cfg);
    return b;
}

}  // namespace

TEST_CASE("dataset loading") {
    const fs::path root = temp_dir("dataset");
    fs::create_directories(root / "oak");
    fs::create_directories(root / "maple");
    for (int i = 0; i < 3; ++i) {
        touch_png(root / "oak" / ("o" + std::to_string(i) + ".png"));
        touch_png(root / "maple" / ("m" + std::to_string(i) + ".png"));
    }
    std::ofstream(root / "maple" / "notes.txt") << "ignored";
    const Dataset ds = load_dataset(root);
    CHECK(ds.items.size() == 6);
    REQUIRE(ds.classes.size() == 2);
    CHECK(ds.classes[0] == "maple");
    CHECK(ds.classes[1] == "oak");
    CHECK(ds.class_counts() == std::vector<std::size_t>{3, 3});

    fs::create_directories(root / "pine");
    try {
        load_dataset(root);
        FAIL("expected EmptyClass");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyClass);
        CHECK(std::string(e.what()).find("pine") != std::string::npos);
    }
    const fs::path empty = temp_dir("dataset_empty");
    CHECK_THROWS_AS(load_dataset(empty), Error);
    CHECK_THROWS_AS(load_dataset(empty / "missing"), Error);
}

TEST_CASE("Swedish-shaped layout") {
    const fs::path root = temp_dir("swedish");
    for (int c = 0; c < 15; ++c) {
        const fs::path dir = root / ("species" + std::to_string(c));
        fs::create_directories(dir);
        for (int i = 0; i < 75; ++i) std::ofstream(dir / ("l" + std::to_string(i) + ".pgm")) << "P5 1 1 255\n";
    }
    const Dataset ds = load_dataset(root);
    CHECK(ds.items.size() == 1125);
    const Split sp = split(ds, 15, 42);
    CHECK(sp.test.size() == 225);
    CHECK(sp.train.size() == 900);
}

TEST_CASE("splits") {
    std::vector<int> labels;
    for (int c = 0; c < 4; ++c) labels.insert(labels.end(), 10, c);
    const Split a = split_labels(labels, 4, 3, 7);
    const Split b = split_labels(labels, 4, 3, 7);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.test.size() == 12);
    std::vector<int> per(4, 0);
    for (auto i : a.test) ++per[static_cast<std::size_t>(labels[i])];
    CHECK(per == std::vector<int>{3, 3, 3, 3});
    std::vector<std::size_t> all = a.train;
    all.insert(all.end(), a.test.begin(), a.test.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
    CHECK(split_labels(labels, 4, 3, 8).test != a.test);

    std::vector<int> small{0, 0, 0, 1, 1, 1, 1, 1, 1};
    const Split s = split_labels(small, 2, 5, 1);
    CHECK(std::count_if(s.test.begin(), s.test.end(), [&](auto i) { return small[i] == 0; }) == 2);
    CHECK(std::count_if(s.train.begin(), s.train.end(), [&](auto i) { return small[i] == 0; }) == 1);
    CHECK(s.warnings.size() == 1);
    CHECK_THROWS_AS(split_labels(small, 2, 0, 1), Error);
}

TEST_CASE("metrics from rankings") {
    SUBCASE("all correct") {
        const std::vector<std::vector<RankedClass>> r{ranking({0, 1, 2}), ranking({1, 0, 2}), ranking({2, 1, 0})};
        const EvalReport e = evaluate_rankings(r, std::vector<int>{0, 1, 2}, {"a", "b", "c"});
        CHECK(e.macro_recall == 1.0);
        CHECK(e.macro_precision == 1.0);
        CHECK(e.macro_f1 == 1.0);
        for (double t : e.top_n) CHECK(t == 1.0);
        CHECK(e.top_n.size() == 3);
    }
    SUBCASE("everything predicted as one class") {
        const std::vector<std::vector<RankedClass>> r(4, ranking({0, 1}));
        const EvalReport e = evaluate_rankings(r, std::vector<int>{0, 0, 1, 1}, {"a", "b"});
        CHECK(e.macro_recall == doctest::Approx(0.5));
        CHECK(e.top_n[1] == 1.0);
    }
    SUBCASE("hand-built confusion matrix") {
        const int conf[3][3] = {{5, 1, 0}, {0, 6, 0}, {1, 0, 5}};
        std::vector<std::vector<RankedClass>> r;
        std::vector<int> truth;
        for (int t = 0; t < 3; ++t)
            for (int p = 0; p < 3; ++p)
                for (int k = 0; k < conf[t][p]; ++k) {
                    r.push_back(ranking({p, (p + 1) % 3, (p + 2) % 3}));
                    truth.push_back(t);
                }
        const EvalReport e = evaluate_rankings(r, truth, {"a", "b", "c"});
        CHECK(e.macro_recall == doctest::Approx((5.0 / 6 + 1.0 + 5.0 / 6) / 3).epsilon(1e-12));
        CHECK(e.macro_recall == doctest::Approx(0.8889).epsilon(1e-4));
        for (int t = 0; t < 3; ++t)
            for (int p = 0; p < 3; ++p) CHECK(e.confusion[t][p] == conf[t][p]);
        // Macro F1 recomputed from the confusion matrix.
        double f1 = 0.0;
        for (int c = 0; c < 3; ++c) {
            double row = 0, col = 0;
            for (int k = 0; k < 3; ++k) row += conf[c][k], col += conf[k][c];
            const double rec = conf[c][c] / row, prec = conf[c][c] / col;
            f1 += 2 * rec * prec / (rec + prec);
        }
        CHECK(std::abs(e.macro_f1 - f1 / 3) <= 1e-12);
        for (std::size_t n = 1; n < e.top_n.size(); ++n) CHECK(e.top_n[n] >= e.top_n[n - 1]);

        // Invariant to the order of test items.
        std::vector<std::size_t> order(truth.size());
        std::iota(order.begin(), order.end(), 0);
        std::reverse(order.begin(), order.end());
        std::vector<std::vector<RankedClass>> r2;
        std::vector<int> t2;
        for (auto i : order) r2.push_back(r[i]), t2.push_back(truth[i]);
        const EvalReport e2 = evaluate_rankings(r2, t2, {"a", "b", "c"});
        CHECK(e2.macro_f1 == e.macro_f1);
        CHECK(e2.top_n == e.top_n);
    }
    SUBCASE("json round trip and top-n csv") {
        const std::vector<std::vector<RankedClass>> r{ranking({0, 1}), ranking({0, 1})};
        const EvalReport e = evaluate_rankings(r, std::vector<int>{0, 1}, {"a", "b"});
        const fs::path dir = temp_dir("report");
        write_report(e, dir / "r.json");
        const EvalReport back = read_report(dir / "r.json");
        CHECK(back.macro_f1 == e.macro_f1);
        CHECK(back.confusion == e.confusion);
        write_topn_csv(e, dir / "t.csv");
        CHECK(slurp(dir / "t.csv") == "n,accuracy\n1,0.5\n2,1\n");
    }
    CHECK_THROWS_AS(evaluate_rankings(std::vector<std::vector<RankedClass>>(2, ranking({0})), std::vector<int>{0}, {"a"}),
                    Error);
}

TEST_CASE("feature store round trip") {
    const fs::path dir = temp_dir("features");
    Rng rng(31);
    std::vector<std::vector<double>> rows;
    {
        FeatureWriter w(dir / "f.csv", 5);
        for (int i = 0; i < 6; ++i) {
            std::vector<double> v;
            for (int j = 0; j < 5; ++j) v.push_back(rng.normal() * std::pow(10.0, j - 2));
            rows.push_back(v);
            w.append(i % 2 ? "oak" : "ash, \"white\"", "dir/img" + std::to_string(i) + ".png", v);
        }
        CHECK_THROWS_AS(w.append("x", "y", std::vector<double>(4, 0.0)), Error);
        w.close();
    }
    CHECK(slurp(dir / "f.csv").rfind("label,source_path,f000,f001,f002,f003,f004\n", 0) == 0);
    const FeatureTable t = read_features(dir / "f.csv");
    REQUIRE(t.rows() == 6);
    CHECK(t.classes == std::vector<std::string>{"ash, \"white\"", "oak"});
    for (int i = 0; i < 6; ++i) {
        CHECK(t.labels[static_cast<std::size_t>(i)] == (i % 2 ? 1 : 0));
        CHECK(t.sources[static_cast<std::size_t>(i)] == "dir/img" + std::to_string(i) + ".png");
        for (int j = 0; j < 5; ++j) CHECK(t.values(i, j) == rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
    const std::vector<std::size_t> pick{4, 1};
    const FeatureTable s = subset(t, pick);
    CHECK(s.rows() == 2);
    CHECK(s.values.row(0) == t.values.row(4));

    std::ofstream(dir / "bad.csv") << "label,source_path,f000\noak,a.png,1.0,2.0\n";
    CHECK_THROWS_AS(read_features(dir / "bad.csv"), Error);
    std::ofstream(dir / "nan.csv") << "label,source_path,f000\noak,a.png,abc\n";
    CHECK_THROWS_AS(read_features(dir / "nan.csv"), Error);
}

TEST_CASE("model wrapper and serialization") {
    const BlobModel b = blob_model();
    CHECK(b.model.svm.machines.size() == 3);
    CHECK(b.model.pca.output_dim() == 6);
    const EvalReport train = evaluate(b.model, b.x, b.labels);
    CHECK(train.accuracy == 1.0);

    const fs::path dir = temp_dir("model");
    save_model(b.model, dir / "m.model");
    const OvoSvmModel back = load_model(dir / "m.model");
    CHECK(back.labels == b.model.labels);
    CHECK(back.config == b.model.config);
    CHECK(back.standardizer.mean == b.model.standardizer.mean);
    CHECK(back.pca.components == b.model.pca.components);
    CHECK(serialize_model(back) == serialize_model(b.model));

    Rng rng(41);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> probe(12);
        for (auto& v : probe) v = rng.normal() * 3.0;
        const auto r1 = b.model.predict_topn(probe, 3);
        const auto r2 = back.predict_topn(probe, 3);
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(r1[k].label == r2[k].label);
            CHECK(r1[k].votes == r2[k].votes);
            CHECK(r1[k].margin_sum == r2[k].margin_sum);
        }
    }
    CHECK_THROWS_AS(b.model.predict_topn(std::vector<double>(11, 0.0), 1), Error);

    const std::string bytes = slurp(dir / "m.model");
    auto expect_code = [](const std::string& data, ErrorCode code) {
        try {
            deserialize_model(data);
            FAIL("expected failure");
        } catch (const Error& e) {
            CHECK(e.code() == code);
        }
    };
    expect_code(bytes.substr(0, bytes.size() - 9), ErrorCode::CorruptModel);
    std::string flipped = bytes;
    flipped[flipped.size() - 20] ^= 0x01;
    expect_code(flipped, ErrorCode::CorruptModel);
    std::string bumped = bytes;
    const auto pos = bumped.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    bumped.replace(pos, 11, "\"version\":2");
    expect_code(bumped, ErrorCode::VersionMismatch);
    expect_code("garbage", ErrorCode::CorruptModel);
    expect_code("{\"format\":\"leafid-model\",\"version\":1}\n", ErrorCode::CorruptModel);
}

TEST_CASE("cross-validation grid") {
    const BlobModel b = blob_model();
    ModelConfig cfg;
    cfg.pca_components = 6;
    const std::vector<double> cs{1, 1000}, gammas{100, 0.05};
    const auto grid = cv_grid(b.x, b.labels, 3, cfg, cs, gammas, 5, 3);
    REQUIRE(grid.size() == 4);
    const GridPoint best = best_grid_point(grid);
    CHECK(best.gamma == 0.05);
    CHECK(best.accuracy > 0.9);
    CHECK(grid == cv_grid(b.x, b.labels, 3, cfg, cs, gammas, 5, 3));
    CHECK_THROWS_AS(cv_grid(b.x, b.labels, 3, cfg, cs, gammas, 1, 3), Error);
}

TEST_CASE("synthetic corpus") {
    SynthSpec spec = SynthSpec::default_spec();
    CHECK(spec.families.size() == 5);
    spec.per_class = 2;
    spec.raster = 128;
    const fs::path a = temp_dir("synth_a"), b = temp_dir("synth_b");
    const Dataset da = synth_corpus(spec, 5, a);
    synth_corpus(spec, 5, b);
    CHECK(da.items.size() == 10);
    for (const auto& item : da.items) {
        const fs::path rel = fs::relative(item.path, a);
        CHECK(slurp(item.path) == slurp(b / rel));
    }
    const SynthSpec back = SynthSpec::from_json(spec.to_json());
    CHECK(back.to_json() == spec.to_json());
    CHECK_THROWS_AS(SynthSpec::from_json(nlohmann::json{{"families", {{{"kind", "hexagon"}}}}}), Error);
    CHECK(sample_pose(spec, 5, 1, 1).rotation_deg == sample_pose(spec, 5, 1, 1).rotation_deg);
    CHECK(sample_pose(spec, 5, 1, 1).rotation_deg != sample_pose(spec, 6, 1, 1).rotation_deg);
}

TEST_CASE("default corpus has 200 images at 512 pixels") {
    const SynthSpec spec = SynthSpec::default_spec();
    CHECK(spec.raster == 512);
    CHECK(spec.per_class == 40);
    CHECK(spec.families.size() * static_cast<std::size_t>(spec.per_class) == 200);
}

TEST_CASE("serrated margins raise fine-scale LAII activity") {
    SynthSpec spec;
    spec.raster = 512;
    ShapeFamily smooth{.name = "ellipse", .kind = ShapeKind::SerratedEllipse, .aspect = 0.55};
    ShapeFamily serrated = smooth;
    serrated.name = "serrated";
    serrated.teeth = 24;
    serrated.amplitude = 0.06;
    double smooth_d1 = 0.0, serrated_d1 = 0.0;
    for (int i = 0; i < 5; ++i) {
        spec.families = {smooth, serrated};
        const ShapePose pose = sample_pose(spec, 77, 0, i);
        for (int which = 0; which < 2; ++which) {
            const Extraction ex = extract(render_shape(spec.families[static_cast<std::size_t>(which)], pose, 512));
            const auto stats = statistical_features(ex.laiis.front().values);
            (which ? serrated_d1 : smooth_d1) += stats[6];  // mean |d1| at the 1% scale
        }
    }
    CHECK(serrated_d1 > smooth_d1);
}

TEST_CASE("pipeline on a rendered leaf") {
    const SynthSpec spec = SynthSpec::default_spec();
    const Image img = render_shape(spec.families[4], ShapePose{}, 512);
    const Extraction ex = extract(img);
    CHECK(ex.features.values.size() == 719);
    CHECK_FALSE(ex.used_fallback);
    CHECK(ex.sampled.points.size() == 256);
    PipelineConfig low;
    low.scales = ScaleSet::low_resolution();
    CHECK(extract(img, low).features.values.size() == 433);
    PipelineConfig ref;
    ref.laii_method = LaiiMethod::Reference;
    CHECK(extract(img, ref).features.values == ex.features.values);
    CHECK_THROWS_AS(extract(Image(64, 64, 1, 255)), Error);
}
