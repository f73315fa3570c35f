#include "leafid/classifier.hpp"
#include "leafid/dataset.hpp"
#include "leafid/error.hpp"
#include "leafid/features.hpp"
#include "leafid/laii.hpp"
#include "leafid/metrics.hpp"
#include "leafid/model.hpp"
#include "leafid/model_io.hpp"
#include "leafid/parallel.hpp"
#include "leafid/pipeline.hpp"
#include "leafid/reduce.hpp"
#include "leafid/rng.hpp"
#include "leafid/synth.hpp"

#include "oracles.hpp"

#include <bit>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <optional>
#include <string>

using namespace leafid;

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kSeed = 2024;
constexpr int kTestPerClass = 10;

enum class Status { Pass, Fail, Skip };

struct Outcome {
    Status status = Status::Fail;
    std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::Pass : Status::Fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double relative_l2(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += a[i] * a[i];
    }
    return std::sqrt(num / den);
}

Matrix stack(const std::vector<std::vector<double>>& rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

std::vector<std::vector<double>> extract_all(const std::vector<Image>& images, const PipelineConfig& cfg) {
    std::vector<std::vector<double>> out(images.size());
    parallel_for(images.size(), default_threads(), [&](std::size_t i) { out[i] = extract(images[i], cfg).features.values; });
    return out;
}

struct Corpus {
    SynthSpec spec;
    std::vector<SynthItem> items;
    std::vector<int> labels;
    Matrix features;
};

Corpus make_corpus(SynthSpec spec, const PipelineConfig& cfg) {
    Corpus c;
    c.items = synth_images(spec, kSeed);
    std::vector<Image> images;
    for (const auto& it : c.items) {
        images.push_back(it.image);
        c.labels.push_back(it.label);
    }
    c.features = stack(extract_all(images, cfg));
    c.spec = std::move(spec);
    return c;
}

std::vector<std::string> family_names(const SynthSpec& spec) {
    std::vector<std::string> n;
    for (const auto& f : spec.families) n.push_back(f.name);
    return n;
}

std::vector<int> pick(std::span<const int> v, std::span<const std::size_t> idx) {
    std::vector<int> out;
    for (auto i : idx) out.push_back(v[i]);
    return out;
}

Matrix pick_rows(const Matrix& m, std::span<const std::size_t> idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

struct Trained {
    OvoSvmModel model;
    GridPoint chosen;
    Split split;
};

// Chooses C and gamma by cross-validation on the training rows, then fits on all of them.
Trained train_cv(const Matrix& x, const std::vector<int>& labels, std::vector<std::string> names, int test_per_class,
                 const ModelConfig& base = {}) {
    const int k = static_cast<int>(names.size());
    Trained t{{}, {}, split_labels(labels, k, test_per_class, kSeed)};
    const Matrix xt = pick_rows(x, t.split.train);
    const auto yt = pick(labels, t.split.train);
    t.chosen = best_grid_point(cv_grid(xt, yt, k, base, kGridC, kGridGamma, 5, kSeed));
    ModelConfig cfg = base;
    cfg.svm.C = t.chosen.C;
    cfg.svm.gamma = t.chosen.gamma;
    t.model = fit_model(xt, yt, std::move(names), cfg);
    return t;
}

// 1. Feature-count fidelity.
Outcome feature_counts() {
    const SynthSpec spec = SynthSpec::default_spec();
    const Image img = render_shape(spec.families[4], ShapePose{}, spec.raster);
    PipelineConfig cfg;
    const std::size_t full = extract(img, cfg).features.values.size();
    cfg.scales = ScaleSet::low_resolution();
    const std::size_t low = extract(img, cfg).features.values.size();
    return verdict(full == 719 && low == 433 && feature_names(5).size() == 719 && feature_names(3).size() == 433,
                   fmt("default %zu, low-resolution %zu", full, low));
}

// 2. LAII analytic values.
Outcome laii_analytic() {
    const int side = 400, c = 200;
    BinaryMask half(side, side), convex(side, side), concave(side, side, 1);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            half.at(x, y) = x <= c;
            convex.at(x, y) = x <= c && y <= c;
            if (x > c && y > c) concave.at(x, y) = 0;
        }
    auto at = [&](const BinaryMask& m, int r) {
        return laii_at_scale(m, SampledContour{{Point2d{double(c), double(c)}}, 100.0 * r}, 1.0).values.at(0);
    };
    bool ok = true;
    double worst_band = 0.0;
    for (int r : {8, 16, 32, 64}) {
        const double tol = 2.0 / r;
        const double e = std::max({std::abs(at(half, r) - 0.5), std::abs(at(convex, r) - 0.25), std::abs(at(concave, r) - 0.75)});
        ok = ok && e <= tol;
        worst_band = std::max(worst_band, e * r / 2.0);
    }

    const double big_r = 100.0, cc = 127.5;
    const BinaryMask disk = oracle::disk_mask(256, 256, cc, cc, big_r);
    const auto sel = select_leaf_contour(extract_contours(disk), 256, 256);
    if (!sel) return verdict(false, "no contour on the disk");
    const SampledContour sc = resample(*sel, 256);
    const LaiiSignal sig = laii_at_scale(disk, sc, 100.0 * 10.0 / sc.perimeter);
    double worst = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < sig.values.size(); ++i) {
        const auto& p = sc.points[i];
        const double d = std::hypot(std::lround(p.x) - cc, std::lround(p.y) - cc);
        worst = std::max(worst, std::abs(sig.values[i] - oracle::lens_fraction(big_r, 10.0, d)));
        mean += sig.values[i] / 256.0;
    }
    ok = ok && sig.radius == 10 && worst <= 0.01;
    return verdict(ok, fmt("edge/corner error at most %.2f of the 2/r band; circle r=10 max error %.4f vs lens oracle, mean %.4f",
                           worst_band, worst, mean));
}

// 3. Formula oracles.
Outcome formula_oracles() {
    Rng rng(303);
    double stat = 0.0, sums = 0.0, entropy = 0.0, fft = 0.0, centroid = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto k = oracle::random_signal(rng);
        const auto s = statistical_features(k);
        const auto ref = oracle::signal_stats(k);
        for (std::size_t i = 0; i < ref.size(); ++i) {
            const double e = std::abs(s[i] - ref[i]);
            (i % 2 == 0 ? sums : stat) = std::max(i % 2 == 0 ? sums : stat, e);
        }
        double auc = 0.0, be = 0.0;
        for (std::size_t i = 0; i < 256; ++i) {
            auc += 0.5 * (k[i] + k[(i + 1) % 256]);
            be += k[i] * k[i];
        }
        sums = std::max({sums, std::abs(area_under_curve(k) - auc) / auc, std::abs(bending_energy(k) - be / 256.0)});
        entropy = std::max(entropy, std::abs(signal_entropy(k) - oracle::signal_entropy(k)));
        const auto slow = oracle::dft_magnitudes(k);
        const auto fast = rfft_magnitudes(k);
        double total = 0.0, weighted = 0.0;
        for (std::size_t i = 0; i < slow.size(); ++i) {
            fft = std::max(fft, std::abs(fast[i] - slow[i]));
            total += slow[i];
            weighted += static_cast<double>(i) * slow[i];
        }
        centroid = std::max(centroid, std::abs(spectral_centroid(rfft_spectrum(k)) - weighted / total));
    }
    const bool ok = sums <= 1e-12 && stat <= 1e-9 && entropy <= 1e-9 && fft <= 1e-9 && centroid <= 1e-9;
    return verdict(ok, fmt("means/sums %.1e, std %.1e, entropy %.1e, fft %.1e, centroid %.1e", sums, stat, entropy,
                           fft, centroid));
}

// 4. Rotation invariance.
Outcome rotation_invariance() {
    const SynthSpec spec = SynthSpec::default_spec();
    const PipelineConfig cfg;
    Rng rng(404);
    double worst = 0.0;
    for (std::size_t f = 0; f < spec.families.size(); ++f)
        for (int i = 0; i < 4; ++i) {
            ShapePose pose = sample_pose(spec, kSeed, static_cast<int>(f), i);
            const Image img = render_shape(spec.families[f], pose, spec.raster);
            const auto base = extract(img, cfg).features.values;
            for (int turns = 1; turns <= 3; ++turns)
                worst = std::max(worst, relative_l2(base, extract(rotate90(img, turns), cfg).features.values));
            pose.rotation_deg += rng.uniform(0.0, 360.0);
            worst = std::max(worst, relative_l2(base, extract(render_shape(spec.families[f], pose, spec.raster), cfg).features.values));
        }

    SynthSpec upright = spec;
    upright.rotation_min_deg = upright.rotation_max_deg = 0.0;
    const Corpus corpus = make_corpus(upright, cfg);
    const Trained t = train_cv(corpus.features, corpus.labels, family_names(upright), kTestPerClass);
    const Matrix xtest = pick_rows(corpus.features, t.split.test);
    const auto ytest = pick(corpus.labels, t.split.test);
    const double base_acc = evaluate(t.model, xtest, ytest).accuracy;

    std::vector<Image> rotated;
    std::vector<int> rotated_truth;
    for (auto idx : t.split.test) {
        const SynthItem& item = corpus.items[idx];
        for (int turns = 1; turns <= 3; ++turns) rotated.push_back(rotate90(item.image, turns));
        ShapePose pose = item.pose;
        pose.rotation_deg += rng.uniform(0.0, 360.0);
        rotated.push_back(render_shape(upright.families[static_cast<std::size_t>(item.label)], pose, upright.raster));
        rotated_truth.insert(rotated_truth.end(), 4, item.label);
    }
    const double rot_acc = evaluate(t.model, stack(extract_all(rotated, cfg)), rotated_truth).accuracy;
    return verdict(worst < 0.05 && rot_acc >= base_acc - 0.02,
                   fmt("max relative L2 %.4f; accuracy upright %.3f, rotated %.3f (%zu images)", worst, base_acc,
                       rot_acc, rotated.size()));
}

// 5. Scale invariance with rescaling to the training resolution.
Outcome scale_invariance() {
    SynthSpec spec = SynthSpec::default_spec();
    spec.raster = 256;
    const PipelineConfig cfg;
    const Corpus corpus = make_corpus(spec, cfg);
    const Trained t = train_cv(corpus.features, corpus.labels, family_names(spec), kTestPerClass);
    std::vector<Image> doubled;
    for (auto idx : t.split.test) {
        const SynthItem& item = corpus.items[idx];
        doubled.push_back(render_shape(spec.families[static_cast<std::size_t>(item.label)], item.pose, 2 * spec.raster));
    }
    PipelineConfig rescale = cfg;
    rescale.resize_width = rescale.resize_height = spec.raster;
    const Matrix big = stack(extract_all(doubled, rescale));
    const Matrix base = pick_rows(corpus.features, t.split.test);
    int same = 0;
    for (Eigen::Index i = 0; i < base.rows(); ++i) {
        const Eigen::VectorXd a = base.row(i), b = big.row(i);
        same += t.model.predict(std::span(a.data(), static_cast<std::size_t>(a.size()))) ==
                t.model.predict(std::span(b.data(), static_cast<std::size_t>(b.size())));
    }
    const double share = static_cast<double>(same) / static_cast<double>(base.rows());
    return verdict(share >= 0.95, fmt("%d of %ld predictions identical (%.3f)", same, static_cast<long>(base.rows()), share));
}

// 6. SVM correctness.
Outcome svm_correctness() {
    Rng rng(606);
    double rel = 0.0, box = 0.0, balance = 0.0;
    for (int t = 0; t < 10; ++t) {
        Matrix x(6, 2);
        std::vector<int> y;
        for (int i = 0; i < 6; ++i) {
            x(i, 0) = rng.uniform(-1, 1);
            x(i, 1) = rng.uniform(-1, 1);
            y.push_back(i < 3 ? 1 : -1);
        }
        SvmConfig cfg;
        cfg.C = 10.0;
        cfg.gamma = 1.0;
        cfg.kkt_tolerance = 1e-8;
        cfg.balanced = false;
        const BinarySvm m = train_binary(x, y, cfg);
        const auto q = oracle::signed_gram(x, y, cfg.gamma);
        const double ref = oracle::dual_value(q, oracle::solve_dual_qp(q, y, std::vector<double>(6, cfg.C)));
        rel = std::max(rel, std::abs(m.dual_objective - ref) / std::abs(ref));
        double s = 0.0;
        for (std::size_t i = 0; i < 6; ++i) {
            box = std::max({box, -m.alpha[i], m.alpha[i] - cfg.C});
            s += m.alpha[i] * y[i];
        }
        balance = std::max(balance, std::abs(s));
    }
    Matrix xor_x(4, 2);
    xor_x << 0, 0, 1, 1, 0, 1, 1, 0;
    const std::vector<int> xor_y{-1, -1, 1, 1};
    const SvmConfig cfg;
    const BinarySvm m = train_binary(xor_x, xor_y, cfg);
    int right = 0;
    for (Eigen::Index i = 0; i < 4; ++i) {
        const std::vector<double> p{xor_x(i, 0), xor_x(i, 1)};
        right += decision_value(m, xor_x, p, cfg.gamma) * xor_y[static_cast<std::size_t>(i)] > 0;
    }
    return verdict(rel <= 1e-4 && box <= 1e-6 && balance <= 1e-6 && right == 4,
                   fmt("dual relative gap %.1e, box violation %.1e, balance %.1e, XOR %d/4", rel, std::max(box, 0.0),
                       balance, right));
}

// 7. PCA correctness.
Outcome pca_correctness() {
    Rng rng(707);
    Matrix x(50, 10);
    for (Eigen::Index i = 0; i < 50; ++i)
        for (Eigen::Index j = 0; j < 10; ++j) x(i, j) = rng.normal() * (1.0 + static_cast<double>(j));
    const PcaModel p = fit_pca(x, 10);
    const Matrix centred = x.rowwise() - x.colwise().mean();
    std::vector<std::vector<double>> cov(10, std::vector<double>(10, 0.0));
    for (int a = 0; a < 10; ++a)
        for (int b = 0; b < 10; ++b)
            for (int i = 0; i < 50; ++i) cov[std::size_t(a)][std::size_t(b)] += centred(i, a) * centred(i, b) / 49.0;
    const auto eig = oracle::jacobi(cov);
    std::vector<std::size_t> order(10);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return eig.values[a] > eig.values[b]; });
    double comp = 0.0;
    for (std::size_t k = 0; k < 10; ++k) {
        const auto& v = eig.vectors[order[k]];
        double dot = 0.0;
        for (std::size_t j = 0; j < 10; ++j) dot += v[j] * p.components(Eigen::Index(k), Eigen::Index(j));
        const double sign = dot < 0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < 10; ++j)
            comp = std::max(comp, std::abs(sign * v[j] - p.components(Eigen::Index(k), Eigen::Index(j))));
    }
    const double ortho = (p.components * p.components.transpose() - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff();
    return verdict(p.output_dim() == 10 && comp <= 1e-6 && ortho <= 1e-8,
                   fmt("component error %.1e, orthonormality error %.1e", comp, ortho));
}

struct EndToEnd {
    Corpus corpus;
    Trained trained;
};

std::optional<EndToEnd> end_to_end_state;

// 8. End-to-end desk-scale classification.
Outcome end_to_end() {
    const SynthSpec spec = SynthSpec::default_spec();
    EndToEnd e{make_corpus(spec, PipelineConfig{}), {}};
    e.trained = train_cv(e.corpus.features, e.corpus.labels, family_names(spec), kTestPerClass);
    const Matrix xtest = pick_rows(e.corpus.features, e.trained.split.test);
    const auto ytest = pick(e.corpus.labels, e.trained.split.test);
    const EvalReport r = evaluate(e.trained.model, xtest, ytest);
    bool monotone = true;
    for (std::size_t n = 1; n < r.top_n.size(); ++n) monotone = monotone && r.top_n[n] >= r.top_n[n - 1];

    // The default gamma, kept for comparison.
    const Matrix xtrain = pick_rows(e.corpus.features, e.trained.split.train);
    const OvoSvmModel plain = fit_model(xtrain, pick(e.corpus.labels, e.trained.split.train), family_names(spec), {});
    const double plain_acc = evaluate(plain, xtest, ytest).accuracy;

    const std::string detail = fmt("%zu images, %zu test; accuracy %.3f, top-2 %.3f, top-n %s; CV chose C=%g gamma=%g "
                                   "(default C=1000 gamma=7 gives %.3f)",
                                   e.corpus.items.size(), r.samples, r.accuracy, r.top_n.at(1),
                                   monotone ? "non-decreasing" : "DECREASING", e.trained.chosen.C,
                                   e.trained.chosen.gamma, plain_acc);
    const bool ok = r.accuracy >= 0.95 && r.top_n.at(1) >= 0.99 && monotone;
    end_to_end_state = std::move(e);
    return verdict(ok, detail);
}

// 9. Serialization.
Outcome serialization() {
    if (!end_to_end_state) return verdict(false, "needs the model from criterion 8");
    const OvoSvmModel& model = end_to_end_state->trained.model;
    const Matrix& x = end_to_end_state->corpus.features;
    const auto path = std::filesystem::temp_directory_path() / "leafid_acceptance.model";
    save_model(model, path);
    const OvoSvmModel back = load_model(path);
    std::filesystem::remove(path);

    Rng rng(909);
    int identical = 0;
    for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd probe = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(x.rows()))));
        for (auto& v : probe) v *= 1.0 + 0.05 * rng.normal();
        const std::span<const double> s(probe.data(), static_cast<std::size_t>(probe.size()));
        const Matrix z1 = model.reduce(probe.transpose()), z2 = back.reduce(probe.transpose());
        const auto d1 = model.svm.decision_values(std::span(z1.data(), static_cast<std::size_t>(z1.size())));
        const auto d2 = back.svm.decision_values(std::span(z2.data(), static_cast<std::size_t>(z2.size())));
        bool same = d1.size() == d2.size();
        for (std::size_t i = 0; same && i < d1.size(); ++i)
            same = std::bit_cast<std::uint64_t>(d1[i]) == std::bit_cast<std::uint64_t>(d2[i]);
        const auto r1 = model.predict_topn(s, 5), r2 = back.predict_topn(s, 5);
        for (std::size_t i = 0; same && i < r1.size(); ++i)
            same = r1[i].label == r2[i].label && r1[i].votes == r2[i].votes &&
                   std::bit_cast<std::uint64_t>(r1[i].margin_sum) == std::bit_cast<std::uint64_t>(r2[i].margin_sum);
        identical += same;
    }

    const std::string bytes = serialize_model(model);
    auto rejected = [](const std::string& data) {
        try {
            deserialize_model(data);
            return false;
        } catch (const Error& e) {
            return e.code() == ErrorCode::CorruptModel;
        }
    };
    std::string flipped = bytes;
    flipped[flipped.size() / 2] ^= 0x10;
    const bool corrupt_ok = rejected(flipped) && rejected(bytes.substr(0, bytes.size() - 1));
    return verdict(identical == 100 && corrupt_ok,
                   fmt("%d/100 probes bit-identical; corrupted and truncated files %s, %zu bytes", identical,
                       corrupt_ok ? "rejected" : "ACCEPTED", bytes.size()));
}

struct DatasetTarget {
    const char* env;
    const char* name;
    int test_per_class;
    double recall;
    double recall_tol;
    double top2;  // negative when not asserted
};

// 10. Reproduction on real datasets, when available.
Outcome dataset_reproduction() {
    const DatasetTarget targets[] = {
        {"LEAFID_SWEDISH_DIR", "Swedish Leaves", 15, 0.978, 0.02, 1.0},
        {"LEAFID_MPEG7_DIR", "MPEG-7", 5, 0.974, 0.02, -1.0},
        {"LEAFID_100LEAVES_DIR", "100-Leaves", 4, 0.910, 0.03, -1.0},
    };
    std::string detail;
    bool any = false, ok = true;
    for (const auto& t : targets) {
        const char* root = std::getenv(t.env);
        if (!root || !*root) {
            detail += fmt("%s skipped (%s unset); ", t.name, t.env);
            continue;
        }
        any = true;
        const Dataset ds = load_dataset(root);
        std::vector<std::vector<double>> rows(ds.items.size());
        std::vector<char> good(ds.items.size(), 0);
        const PipelineConfig cfg;
        parallel_for(ds.items.size(), default_threads(), [&](std::size_t i) {
            try {
                rows[i] = extract(read_image(ds.items[i].path), cfg).features.values;
                good[i] = 1;
            } catch (const Error&) {
            }
        });
        std::vector<std::vector<double>> kept;
        std::vector<int> labels;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (good[i]) {
                kept.push_back(std::move(rows[i]));
                labels.push_back(ds.items[i].label);
            }
        const Trained tr = train_cv(stack(kept), labels, ds.classes, t.test_per_class);
        const EvalReport r = evaluate(tr.model, pick_rows(stack(kept), tr.split.test), pick(labels, tr.split.test),
                                      default_threads());
        const bool recall_ok = std::abs(r.macro_recall - t.recall) <= t.recall_tol;
        const bool top2_ok = t.top2 < 0 || std::abs(r.top_n.at(1) - t.top2) <= 0.01;
        ok = ok && recall_ok && top2_ok;
        detail += fmt("%s recall %.3f (target %.3f), top-2 %.3f, %zu skipped images; ", t.name, r.macro_recall,
                      t.recall, r.top_n.at(1), ds.items.size() - kept.size());
    }
    if (!any) return {Status::Skip, detail};
    return verdict(ok, detail);
}

// 11. Performance sanity.
Outcome performance() {
    ShapeFamily leaf{.name = "lobed", .kind = ShapeKind::Lobed, .lobes = 3, .depth = 0.35};
    ShapePose pose;
    pose.rotation_deg = 17.0;
    pose.scale = 0.9;
    auto prepare = [&](int raster) {
        BinaryMask m = fill_polygon(shape_polygon(leaf, pose, raster), raster, raster);
        const auto sel = select_leaf_contour(extract_contours(m), raster, raster);
        return std::pair{std::move(m), resample(*sel, 256)};
    };
    auto timed = [](auto&& fn) {
        const auto t0 = Clock::now();
        auto r = fn();
        return std::pair{std::move(r), seconds_since(t0)};
    };
    const auto [m512, sc512] = prepare(512);
    const auto [ref512, t_ref512] = timed([&] { return laii_multiscale(m512, sc512, ScaleSet{}, LaiiMethod::Reference); });
    const auto [m1k, sc1k] = prepare(1024);
    const auto [ref1k, t_ref1k] = timed([&] { return laii_multiscale(m1k, sc1k, ScaleSet{}, LaiiMethod::Reference); });
    const auto [inc1k, t_inc1k] = timed([&] { return laii_multiscale(m1k, sc1k, ScaleSet{}, LaiiMethod::Incremental); });
    double diff = 0.0;
    for (std::size_t s = 0; s < ref1k.size(); ++s)
        for (std::size_t i = 0; i < ref1k[s].values.size(); ++i)
            diff = std::max(diff, std::abs(ref1k[s].values[i] - inc1k[s].values[i]));
    return verdict(t_ref512 <= 2.0 && diff <= 1e-12 && t_inc1k < t_ref1k,
                   fmt("reference 512^2 %.3f s; 1024^2 reference %.3f s, incremental %.3f s, max difference %.1e",
                       t_ref512, t_ref1k, t_inc1k, diff));
}

struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0 when unbounded
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {1, "feature-count fidelity", 0.0, feature_counts},
        {2, "LAII analytic values", 5.0, laii_analytic},
        {3, "formula oracles", 10.0, formula_oracles},
        {4, "rotation invariance", 120.0, rotation_invariance},
        {5, "scale invariance", 120.0, scale_invariance},
        {6, "SVM correctness", 30.0, svm_correctness},
        {7, "PCA correctness", 5.0, pca_correctness},
        {8, "end-to-end synthetic classification", 300.0, end_to_end},
        {9, "serialization", 0.0, serialization},
        {10, "dataset reproduction", 0.0, dataset_reproduction},
        {11, "performance sanity", 0.0, performance},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = verdict(false, std::string("exception: ") + e.what());
        }
        const double elapsed = seconds_since(t0);
        if (o.status == Status::Pass && c.limit_s > 0 && elapsed > c.limit_s) {
            o.status = Status::Fail;
            o.detail += fmt("; over the %.0f s limit", c.limit_s);
        }
        const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Skip ? "SKIP" : "FAIL";
        failed += o.status == Status::Fail;
        std::printf("%s %2d %s: %s [%.1f s]\n", tag, c.id, c.name, o.detail.c_str(), elapsed);
        std::fflush(stdout);
    }
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
