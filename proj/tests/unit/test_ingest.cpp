#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cellpop/error.hpp"
#include "cellpop/ingest.hpp"

#include "../support/fixtures.hpp"

#include <fstream>
#include <map>
#include <sstream>

using namespace cellpop;
namespace fs = std::filesystem;

namespace {

Error error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e;
    }
    FAIL("expected an Error");
    return Error(ErrorCode::Io, "");
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

} // namespace

TEST_CASE("parse_counts_csv examples") {
    const auto m = parse_counts_csv("sample,T,B\nS1,8,2\nS2,5,5\n");
    CHECK(m.row_ids() == std::vector<std::string>{"S1", "S2"});
    CHECK(m.col_ids() == std::vector<std::string>{"T", "B"});
    CHECK(std::vector<CountsMatrix::Count>(m.values().begin(), m.values().end()) ==
          std::vector<CountsMatrix::Count>{8, 2, 5, 5});

    const auto ragged = error_of([] { parse_counts_csv("sample,T,B\nS1,8\n"); });
    CHECK(ragged.code() == ErrorCode::RaggedRow);
    CHECK(ragged.line() == 2);

    CHECK(error_of([] { parse_counts_csv("sample,T\nS1,1\nS1,2\n"); }).code() == ErrorCode::DuplicateId);
    CHECK(error_of([] { parse_counts_csv("sample,T,T\nS1,1,2\n"); }).code() == ErrorCode::DuplicateId);
    const auto bad = error_of([] { parse_counts_csv("sample,T\nS1,1\nS2,x\n"); });
    CHECK(bad.code() == ErrorCode::NonNumericCell);
    CHECK(bad.line() == 3);
    CHECK(error_of([] { parse_counts_csv("sample,T\nS1,1.5\n"); }).code() == ErrorCode::NonNumericCell);
    CHECK(error_of([] { parse_counts_csv("sample,T\nS1,-3\n"); }).code() == ErrorCode::NegativeCount);
    CHECK(error_of([] { parse_counts_csv(""); }).code() == ErrorCode::EmptyFile);
    CHECK(error_of([] { parse_counts_csv("\n\n"); }).code() == ErrorCode::EmptyFile);
}

TEST_CASE("counts CSV dialect: quotes, CRLF, BOM") {
    const auto m = parse_counts_csv("\xEF\xBB\xBFsample,\"CD4, naive\",\"say \"\"hi\"\"\"\r\nS1,1,2\r\n");
    CHECK(m.col_ids() == std::vector<std::string>{"CD4, naive", "say \"hi\""});
    CHECK(m.at(0, 1) == 2);

    std::istringstream in("sample,T\nS1,4\n");
    CHECK(parse_counts_csv(in).at(0, 0) == 4);
}

TEST_CASE("counts CSV round trip on 200 random matrices") {
    auto g = testing::rng(11);
    const std::vector<std::string> awkward = {"a,b", "q\"uote", " lead", "x\ny", "plain"};
    for (int i = 0; i < 200; ++i) {
        auto m = testing::random_counts(g, testing::uniform(g, 1, 12), testing::uniform(g, 1, 9), 100000);
        auto rows = m.row_ids();
        auto cols = m.col_ids();
        rows[0] = awkward[i % awkward.size()] + std::to_string(i);
        const CountsMatrix named(rows, cols, std::vector<CountsMatrix::Count>(m.values().begin(), m.values().end()));
        CHECK(parse_counts_csv(write_counts_csv(named)) == named);
    }
}

TEST_CASE("aggregate_cell_table") {
    CellTable t{{{"S1", "T"}, {"S1", "T"}, {"S1", "B"}, {"S2", "NK"}}};
    const auto m = aggregate_cell_table(t);
    CHECK(m == CountsMatrix({"S1", "S2"}, {"T", "B", "NK"}, {2, 1, 0, 0, 0, 1}));

    CHECK(aggregate_cell_table(CellTable{{{"S1", "T"}}}) == CountsMatrix({"S1"}, {"T"}, {1}));
    CHECK(error_of([] { aggregate_cell_table(CellTable{}); }).code() == ErrorCode::EmptyTable);

    // 1,000 random rows over 5 x 4 labels against a hash-count oracle.
    auto g = testing::rng(5);
    CellTable big;
    std::map<std::pair<std::string, std::string>, long> oracle;
    for (int i = 0; i < 1000; ++i) {
        CellRow r{"s" + std::to_string(testing::uniform(g, 0, 4)), "t" + std::to_string(testing::uniform(g, 0, 3))};
        ++oracle[{r.sample_id, r.cell_type_id}];
        big.rows.push_back(r);
    }
    const auto agg = aggregate_cell_table(big);
    long total = 0;
    for (std::size_t r = 0; r < agg.rows(); ++r) {
        for (std::size_t c = 0; c < agg.cols(); ++c) {
            const auto it = oracle.find({agg.row_ids()[r], agg.col_ids()[c]});
            CHECK(agg.at(r, c) == (it == oracle.end() ? 0 : it->second));
            total += agg.at(r, c);
        }
    }
    CHECK(total == 1000);
    CHECK(agg.row_ids().front() == big.rows.front().sample_id);
}

TEST_CASE("parse_cells_csv finds columns by name") {
    const auto t = parse_cells_csv("barcode,cell_type,sample\nc1,T,S1\nc2,B,S2\n");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0] == CellRow{"S1", "T"});
    CHECK(error_of([] { parse_cells_csv("barcode,sample\nc1,S1\n"); }).code() == ErrorCode::MissingKey);
}

TEST_CASE("parse_metadata_csv") {
    const auto m = parse_metadata_csv("sample,disease,age\nS1,CF,40\nS2,healthy,\n", Axis::samples);
    REQUIRE(m.field("age"));
    CHECK(m.field("age")->kind == FieldKind::numeric);
    CHECK(m.field("disease")->kind == FieldKind::categorical);
    CHECK(is_missing(m.value("S2", "age")));
    CHECK(std::get<double>(m.value("S1", "age")) == 40.0);

    const auto h = parse_metadata_csv("cell_type,level_1,level_2\nT,lymphoid,t\n", Axis::cell_types);
    CHECK(h.hierarchy_depth() == 2);
    CHECK(h.hierarchy_field(2)->name == "level_2");

    CHECK(error_of([] { parse_metadata_csv("cell_type,level_1,level_3\nT,a,b\n", Axis::cell_types); }).code() ==
          ErrorCode::NonContiguousHierarchy);
    CHECK(error_of([] { parse_metadata_csv("", Axis::samples); }).code() == ErrorCode::EmptyHeader);
    CHECK(error_of([] { parse_metadata_csv("sample,x\nS1,1\nS1,2\n", Axis::samples); }).code() ==
          ErrorCode::DuplicateId);
}

TEST_CASE("assemble_dataset") {
    const auto plain = assemble_dataset(testing::toy_counts(), std::nullopt, std::nullopt, "toy");
    CHECK(plain.sample_meta().fields().empty());
    CHECK(plain.cell_type_meta().fields().empty());

    auto meta = parse_metadata_csv("sample,disease\nS9,CF\n", Axis::samples);
    const auto e = error_of([&] { assemble_dataset(testing::toy_counts(), meta, std::nullopt, "toy"); });
    CHECK(e.code() == ErrorCode::UnknownEntity);
    CHECK(std::string(e.what()).find("S9") != std::string::npos);
}

TEST_CASE("load_dataset and discovery") {
    const auto root = testing::temp_dir("ingest");
    fs::create_directories(root / "a");
    fs::create_directories(root / "b");
    fs::create_directories(root / "empty");
    write(root / "a" / "counts.csv", "sample,T,B\nS1,8,2\nS2,5,5\n");
    write(root / "a" / "cells.csv", "sample,cell_type\nS9,X\n"); // lower precedence, ignored
    write(root / "a" / "samples.csv", "sample,disease\nS1,CF\n");
    write(root / "b" / "cells.csv", "sample,cell_type\nS1,T\nS1,B\nS2,T\n");

    const auto found = discover_datasets(root);
    REQUIRE(found.size() == 2);
    CHECK(found[0].filename() == "a");

    const auto a = load_dataset(root / "a");
    CHECK(a.dataset.name() == "a");
    CHECK(a.dataset.counts().row_ids() == std::vector<std::string>{"S1", "S2"});
    CHECK(std::get<std::string>(a.dataset.sample_meta().value("S1", "disease")) == "CF");
    CHECK(is_missing(a.dataset.sample_meta().value("S2", "disease")));

    const auto b = load_dataset(root / "b");
    CHECK(b.dataset.counts() == CountsMatrix({"S1", "S2"}, {"T", "B"}, {1, 1, 1, 0}));

    write(root / "a" / "counts.csv", "sample,T,B\nS1,8,2\nS2,5\n");
    const auto e = error_of([&] { load_dataset(root / "a"); });
    CHECK(e.code() == ErrorCode::RaggedRow);
    const std::string msg = e.what();
    CHECK(msg.find("counts.csv") != std::string::npos);
    CHECK(msg.find(":3") != std::string::npos);

    fs::remove_all(root);
}
