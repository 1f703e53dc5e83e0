#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cellpop/error.hpp"
#include "cellpop/stats.hpp"

#include "../support/fixtures.hpp"

#include <cmath>
#include <numbers>
#include <set>

using namespace cellpop;
using doctest::Approx;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::Io;
}

double direct_density(const std::vector<double>& xs, double h, double g) {
    double s = 0;
    for (double x : xs) s += std::exp(-0.5 * ((g - x) / h) * ((g - x) / h));
    return s / (static_cast<double>(xs.size()) * h * std::sqrt(2 * std::numbers::pi));
}

Dataset with_columns(const std::string& name, const std::vector<std::string>& present,
                     const std::vector<std::string>& absent = {}) {
    std::vector<std::string> cols = present;
    cols.insert(cols.end(), absent.begin(), absent.end());
    std::vector<CountsMatrix::Count> v(cols.size(), 0);
    for (std::size_t i = 0; i < present.size(); ++i) v[i] = 3;
    return Dataset(CountsMatrix({"s"}, cols, v), MetadataTable(Axis::samples), MetadataTable(Axis::cell_types), name);
}

} // namespace

TEST_CASE("axis totals, presence, fractions on the toy set") {
    const auto m = testing::toy_counts();
    CHECK(axis_totals(m, Axis::samples) == std::vector<CountsMatrix::Count>{10, 10, 10});
    CHECK(axis_totals(m, Axis::cell_types) == std::vector<CountsMatrix::Count>{13, 8, 9});
    CHECK(presence_counts(m) == std::vector<std::size_t>{2, 3, 1});
    CHECK(fraction_of_total(m, "T") == Approx(13.0 / 30).epsilon(1e-12));

    const CountsMatrix one({"a"}, {"x"}, {7});
    CHECK(axis_totals(one, Axis::samples) == std::vector<CountsMatrix::Count>{7});
    CHECK(axis_totals(one, Axis::cell_types) == std::vector<CountsMatrix::Count>{7});
    CHECK(fraction_of_total(one, "x") == 1.0);

    const CountsMatrix zeros({"a", "b"}, {"x", "y"}, {0, 1, 0, 2});
    CHECK(presence_counts(zeros) == std::vector<std::size_t>{0, 2});
    CHECK(code_of([] { fraction_of_total(CountsMatrix({"a"}, {"x"}, {0}), "x"); }) == ErrorCode::ZeroGrandTotal);
    CHECK(code_of([&] { fraction_of_total(m, "nope"); }) == ErrorCode::UnknownEntity);
}

TEST_CASE("totals, presence and fractions on random matrices") {
    auto g = testing::rng(71);
    for (int iter = 0; iter < 100; ++iter) {
        const auto m = testing::random_counts(g, testing::uniform(g, 1, 20), testing::uniform(g, 1, 10));
        const auto rows = axis_totals(m, Axis::samples);
        const auto cols = axis_totals(m, Axis::cell_types);
        const auto pres = presence_counts(m);
        long grand = 0;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            long s = 0;
            for (std::size_t c = 0; c < m.cols(); ++c) s += m.at(r, c);
            CHECK(rows[r] == s);
            grand += s;
        }
        for (std::size_t c = 0; c < m.cols(); ++c) {
            long s = 0;
            std::size_t p = 0;
            for (std::size_t r = 0; r < m.rows(); ++r) {
                s += m.at(r, c);
                p += m.at(r, c) > 0 ? 1 : 0;
            }
            CHECK(cols[c] == s);
            CHECK(pres[c] == p);
            CHECK(pres[c] <= m.rows());
        }
        if (grand == 0) continue;
        double sum = 0;
        for (const auto& id : m.col_ids()) sum += fraction_of_total(m, id);
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("silverman bandwidth") {
    // {1,2,3}: sd 1, IQR 1 -> 0.9 * (1 / 1.34) * 3^-0.2
    const std::vector<double> a{1, 2, 3};
    CHECK(silverman_bandwidth(a) == Approx(0.9 / 1.34 * std::pow(3.0, -0.2)).epsilon(1e-12));

    // IQR 0 but sd > 0 falls back to sd * n^-0.2.
    const std::vector<double> b{0, 0, 0, 0, 0, 0, 0, 10};
    const double sd = std::sqrt((7 * 1.25 * 1.25 + 8.75 * 8.75) / 7.0);
    CHECK(silverman_bandwidth(b) == Approx(sd * std::pow(8.0, -0.2)).epsilon(1e-12));
}

TEST_CASE("kde matches a direct kernel sum") {
    const std::vector<double> xs{1, 2, 3};
    const auto curve = kde(xs, 256);
    CHECK(curve.n == 3);
    REQUIRE(curve.grid.size() == 256);
    REQUIRE(curve.density.size() == 256);
    const double h = curve.bandwidth;
    CHECK(h == Approx(silverman_bandwidth(xs)));
    CHECK(curve.grid.front() == Approx(1 - 3 * h));
    CHECK(curve.grid.back() == Approx(3 + 3 * h));
    for (std::size_t i = 0; i < 256; i += 25) {
        CHECK(std::abs(curve.density[i] - direct_density(xs, h, curve.grid[i])) <= 1e-9);
    }
    CHECK(trapezoid(curve) >= 0.99);
    CHECK(trapezoid(curve) <= 1.01);

    CHECK(code_of([] { kde(std::vector<double>{5, 5, 5}); }) == ErrorCode::Degenerate);
    CHECK(code_of([] { kde(std::vector<double>{5}); }) == ErrorCode::TooFewValues);
    CHECK(code_of([&] { kde(xs, 10); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("kde properties on random inputs") {
    auto g = testing::rng(72);
    std::normal_distribution<double> normal(0, 1);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<double> xs;
        const auto n = testing::uniform(g, 2, 60);
        for (std::size_t i = 0; i < n; ++i) xs.push_back(normal(g) * 3 + 1);
        const auto curve = kde(xs, testing::uniform(g, 64, 300));
        for (std::size_t i = 0; i < curve.grid.size(); ++i) {
            CHECK(curve.density[i] >= 0);
            if (i > 0) CHECK(curve.grid[i] > curve.grid[i - 1]);
        }
        const double area = trapezoid(curve);
        CHECK(area >= 0.99);
        CHECK(area <= 1.01);
    }

    // Values symmetric about 4 give a density symmetric about 4.
    const std::vector<double> sym{1, 2.5, 4, 5.5, 7, 3, 5};
    const auto c = kde(sym, 129);
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
        CHECK(c.grid[i] - 4 == Approx(4 - c.grid[c.grid.size() - 1 - i]));
        CHECK(std::abs(c.density[i] - c.density[c.grid.size() - 1 - i]) <= 1e-9);
    }
}

TEST_CASE("unique type summary") {
    const auto a = with_columns("a", {"A", "B"}, {"Z"});
    const auto b = with_columns("b", {"B", "C", "D"});
    const auto s = unique_type_summary({&a, &b});
    REQUIRE(s.entries.size() == 2);
    CHECK(s.entries[0].unique_cell_types == 2);
    CHECK(s.entries[1].unique_cell_types == 3);
    CHECK(s.mean == Approx(2.5));
    CHECK(summary_csv(s) == "dataset,name,unique_cell_types\n1,a,2\n2,b,3\nmean,,2.50\n");

    const auto one = unique_type_summary({&b});
    CHECK(one.mean == 3.0);
    CHECK(code_of([] { unique_type_summary({}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("unique type summary on random corpora matches set cardinality") {
    auto g = testing::rng(73);
    for (int iter = 0; iter < 20; ++iter) {
        std::vector<Dataset> corpus;
        double expected = 0;
        const auto n = testing::uniform(g, 1, 30);
        for (std::size_t k = 0; k < n; ++k) {
            const auto m = testing::random_counts(g, testing::uniform(g, 1, 6), testing::uniform(g, 1, 40), 5, 0.7);
            std::set<std::string> present;
            for (std::size_t r = 0; r < m.rows(); ++r)
                for (std::size_t c = 0; c < m.cols(); ++c)
                    if (m.at(r, c) > 0) present.insert(m.col_ids()[c]);
            expected += static_cast<double>(present.size());
            corpus.emplace_back(m, MetadataTable(Axis::samples), MetadataTable(Axis::cell_types),
                                "d" + std::to_string(k));
        }
        std::vector<const Dataset*> ptrs;
        for (const auto& d : corpus) ptrs.push_back(&d);
        CHECK(unique_type_summary(ptrs).mean == Approx(expected / static_cast<double>(n)).epsilon(1e-12));
    }
}
