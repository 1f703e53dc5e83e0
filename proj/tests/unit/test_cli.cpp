#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cellpop/ingest.hpp"

#include "../support/fixtures.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

namespace fs = std::filesystem;

namespace {

const fs::path kToy = fs::path(testing::data_dir()) / "corpus" / "toy";

int run(const std::string& args) {
    const std::string cmd = std::string(CELLPOP_BINARY) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

unsigned be32(const std::string& s, std::size_t at) {
    unsigned v = 0;
    for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(s[at + i]);
    return v;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

} // namespace

TEST_CASE("export") {
    const auto tmp = testing::temp_dir("cli");
    write(tmp / "default.json", "{}");
    write(tmp / "bad.json", R"({"normalization": "sqrt"})");
    write(tmp / "broken.json", "{nope");

    CHECK(run("export --data " + q(kToy) + " --config " + q(tmp / "default.json") + " --out " + q(tmp / "a.svg")) == 0);
    CHECK(cellpop::read_file(tmp / "a.svg").find("<svg") != std::string::npos);

    CHECK(run("export --data " + q(kToy) + " --config " + q(tmp / "default.json") + " --out " + q(tmp / "a.png") +
              " --scale 4") == 0);
    const auto png = cellpop::read_file(tmp / "a.png");
    REQUIRE(png.size() > 24);
    CHECK(be32(png, 16) == 4800);
    CHECK(be32(png, 20) == 3600);

    CHECK(run("export --data " + q(kToy) + " --config " + q(tmp / "default.json") + " --out " + q(tmp / "a.gif")) == 5);
    CHECK(run("export --data " + q(kToy) + " --config " + q(tmp / "bad.json") + " --out " + q(tmp / "b.svg")) == 4);
    CHECK(run("export --data " + q(kToy) + " --config " + q(tmp / "broken.json") + " --out " + q(tmp / "b.svg")) == 4);
    CHECK_FALSE(fs::exists(tmp / "b.svg"));

    write(tmp / "ragged" / "counts.csv", "sample,T\nS1,1,2\n");
    CHECK(run("export --data " + q(tmp / "ragged") + " --config " + q(tmp / "default.json") + " --out " +
              q(tmp / "c.svg")) == 3);
    CHECK(run("export --config " + q(tmp / "default.json")) == 1);
    fs::remove_all(tmp);
}

TEST_CASE("stats") {
    const auto tmp = testing::temp_dir("cli");
    write(tmp / "corpus" / "one" / "counts.csv", "sample,A,B,Z\ns1,1,2,0\n");
    write(tmp / "corpus" / "two" / "counts.csv", "sample,B,C,D\ns1,1,1,0\ns2,0,0,4\n");
    CHECK(run("stats --data " + q(tmp / "corpus") + " --out " + q(tmp / "s.csv")) == 0);
    CHECK(cellpop::read_file(tmp / "s.csv") == "dataset,name,unique_cell_types\n1,one,2\n2,two,3\nmean,,2.50\n");

    fs::create_directories(tmp / "empty");
    CHECK(run("stats --data " + q(tmp / "empty") + " --out " + q(tmp / "e.csv")) == 2);
    CHECK(run("stats --data " + q(tmp / "missing") + " --out " + q(tmp / "e.csv")) != 0);
    CHECK(run("serve --data " + q(tmp / "empty") + " --port 1") != 0);
    CHECK(run("bogus") == 1);
    fs::remove_all(tmp);
}
