// Shared test inputs: the 3x3 toy dataset and seeded random generators.
#ifndef CELLPOP_TEST_FIXTURES_HPP
#define CELLPOP_TEST_FIXTURES_HPP

#include "cellpop/ingest.hpp"
#include "cellpop/model.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testing {

using cellpop::CountsMatrix;

// S1 = [T 8, B 2, NK 0], S2 = [5, 5, 0], S3 = [0, 1, 9]; disease healthy, healthy, CF.
inline CountsMatrix toy_counts() {
    return CountsMatrix({"S1", "S2", "S3"}, {"T", "B", "NK"}, {8, 2, 0, 5, 5, 0, 0, 1, 9});
}

inline cellpop::Dataset toy_dataset() {
    cellpop::MetadataTable samples(cellpop::Axis::samples, {"S1", "S2", "S3"},
                                   {{"disease", cellpop::FieldKind::categorical, 0}},
                                   {{std::string("healthy"), std::string("healthy"), std::string("CF")}});
    cellpop::MetadataTable types(cellpop::Axis::cell_types, {"T", "B", "NK"},
                                 {{"level_1", cellpop::FieldKind::hierarchy_level, 1}},
                                 {{std::string("lymphoid"), std::string("lymphoid"), std::string("lymphoid")}});
    return cellpop::Dataset(toy_counts(), samples, types, "toy");
}

inline std::string data_dir() { return CELLPOP_TEST_DATA_DIR; }

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline std::size_t uniform(std::mt19937_64& g, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(g);
}

/// rows x cols counts in [0, max_count]; roughly `zero_share` of entries are zero.
inline CountsMatrix random_counts(std::mt19937_64& g, std::size_t rows, std::size_t cols, long max_count = 50,
                                  double zero_share = 0.3) {
    std::vector<std::string> r, c;
    for (std::size_t i = 0; i < rows; ++i) r.push_back("s" + std::to_string(i));
    for (std::size_t j = 0; j < cols; ++j) c.push_back("t" + std::to_string(j));
    std::bernoulli_distribution zero(zero_share);
    std::uniform_int_distribution<long> count(1, max_count);
    std::vector<CountsMatrix::Count> v(rows * cols);
    for (auto& x : v) x = zero(g) ? 0 : count(g);
    return CountsMatrix(r, c, v);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::mt19937_64 g{std::random_device{}()};
    auto p = std::filesystem::temp_directory_path() / ("cellpop-" + tag + "-" + std::to_string(g()));
    std::filesystem::create_directories(p);
    return p;
}

} // namespace testing

#endif
