#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace leafid {

/// Images grouped by class, one directory per class.
struct Dataset {
    struct Item {
        int label = 0;
        std::filesystem::path path;
    };

    std::vector<std::string> classes;
    std::vector<Item> items;

    std::vector<std::size_t> class_counts() const;
};

/// Reads root/<class>/<image>. Classes are sorted by name, images by file name.
/// Throws EmptyDataset when there are no class directories and EmptyClass
/// (naming the folder) when a class directory holds no supported image.
Dataset load_dataset(const std::filesystem::path& root);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    int test_per_class = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

/// Per class, draws test_per_class items uniformly without replacement. A class
/// with too few items keeps one for training and sends the rest to test,
/// recording a warning. Indices refer to `labels`; both lists are ascending.
Split split_labels(std::span<const int> labels, int num_classes, int test_per_class, std::uint64_t seed);

Split split(const Dataset& ds, int test_per_class, std::uint64_t seed);

}  // namespace leafid
