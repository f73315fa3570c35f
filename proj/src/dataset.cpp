#include "leafid/dataset.hpp"

#include "leafid/error.hpp"
#include "leafid/image.hpp"
#include "leafid/rng.hpp"

#include <algorithm>
#include <numeric>

namespace fs = std::filesystem;

namespace leafid {

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(classes.size(), 0);
    for (const auto& it : items) ++counts[it.label];
    return counts;
}

Dataset load_dataset(const fs::path& root) {
    if (!fs::is_directory(root)) throw Error(ErrorCode::Io, "not a directory: " + root.string());
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw Error(ErrorCode::EmptyDataset, "no class directories under " + root.string());

    Dataset ds;
    for (const auto& dir : dirs) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && is_supported_image(e.path())) files.push_back(e.path());
        if (files.empty()) throw Error(ErrorCode::EmptyClass, "class folder has no images: " + dir.string());
        std::sort(files.begin(), files.end());
        const int label = static_cast<int>(ds.classes.size());
        ds.classes.push_back(dir.filename().string());
        for (auto& f : files) ds.items.push_back({label, std::move(f)});
    }
    return ds;
}

Split split_labels(std::span<const int> labels, int num_classes, int test_per_class, std::uint64_t seed) {
    if (test_per_class < 1) throw Error(ErrorCode::InvalidArgument, "test_per_class must be >= 1");
    Split s;
    s.test_per_class = test_per_class;
    s.seed = seed;
    std::vector<std::vector<std::size_t>> members(num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) members.at(labels[i]).push_back(i);

    for (int c = 0; c < num_classes; ++c) {
        auto& idx = members[c];
        if (idx.empty()) continue;
        std::size_t take = static_cast<std::size_t>(test_per_class);
        if (idx.size() <= take) {
            take = idx.size() - 1;
            s.warnings.push_back("class " + std::to_string(c) + " has only " + std::to_string(idx.size()) +
                                 " items; using " + std::to_string(take) + " for test");
        }
        // Partial Fisher-Yates: the first `take` slots become the test draw.
        Rng rng(mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(c))));
        for (std::size_t k = 0; k < take; ++k) {
            const std::size_t j = k + static_cast<std::size_t>(rng.below(idx.size() - k));
            std::swap(idx[k], idx[j]);
        }
        s.test.insert(s.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
        s.train.insert(s.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end());
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

Split split(const Dataset& ds, int test_per_class, std::uint64_t seed) {
    std::vector<int> labels;
    labels.reserve(ds.items.size());
    for (const auto& it : ds.items) labels.push_back(it.label);
    return split_labels(labels, static_cast<int>(ds.classes.size()), test_per_class, seed);
}

}  // namespace leafid
