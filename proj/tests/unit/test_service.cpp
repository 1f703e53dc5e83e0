#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cellpop/config_json.hpp"
#include "cellpop/service.hpp"

#include "httplib.h"

#include "../support/fixtures.hpp"

#include <atomic>
#include <fstream>
#include <thread>

using namespace cellpop;
using nlohmann::json;

namespace {

// A service on an ephemeral port, torn down with the fixture.
struct Running {
    Service service;
    httplib::Server server;
    int port = 0;
    std::thread thread;

    explicit Running(ServiceOptions options = {})
        : service({{"toy", std::make_shared<const Dataset>(testing::toy_dataset())}}, std::move(options)) {
        service.mount(server);
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~Running() {
        server.stop();
        thread.join();
    }

    httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

const char* kJson = "application/json";

std::string new_session(httplib::Client& c) {
    auto r = c.Post("/sessions", R"({"dataset": "toy"})", kJson);
    REQUIRE(r);
    REQUIRE(r->status == 201);
    return json::parse(r->body)["id"].get<std::string>();
}

json post(httplib::Client& c, const std::string& path, const json& body, int expect = 200) {
    auto r = c.Post(path, body.dump(), kJson);
    REQUIRE(r);
    CHECK(r->status == expect);
    return json::parse(r->body);
}

} // namespace

TEST_CASE("health and datasets") {
    Running s;
    auto c = s.client();
    auto h = c.Get("/health");
    REQUIRE(h);
    CHECK(h->status == 200);
    auto d = c.Get("/datasets");
    REQUIRE(d);
    const auto list = json::parse(d->body);
    REQUIRE(list.size() == 1);
    CHECK(list[0]["name"] == "toy");
    CHECK(list[0]["samples"] == 3);
    CHECK(list[0]["cell_types"] == 3);
}

TEST_CASE("100 parallel health checks") {
    Running s;
    std::atomic<int> ok{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 100; ++i) {
        threads.emplace_back([&] {
            auto c = s.client();
            auto r = c.Get("/health");
            if (r && r->status == 200) ++ok;
        });
    }
    for (auto& t : threads) t.join();
    CHECK(ok == 100);
}

TEST_CASE("session lifecycle") {
    Running s;
    auto c = s.client();
    CHECK(c.Post("/sessions", R"({"dataset": "nope"})", kJson)->status == 404);
    CHECK(c.Post("/sessions", R"({"x": 1})", kJson)->status == 400);
    CHECK(c.Get("/sessions/deadbeef/view")->status == 404);

    const auto id = new_session(c);
    const auto base = "/sessions/" + id;
    const auto before = c.Get(base + "/view")->body;
    CHECK(json::parse(before)["grid_cells"].size() == 9);

    // Undo with no history is a no-op.
    CHECK(post(c, base + "/undo", json::object())["noop"] == true);

    const auto after = post(c, base + "/config", json{{"transpose", true}});
    CHECK(after["axis_labels"]["row_axis"] == "cell_types");
    CHECK(json::parse(c.Get(base + "/config")->body)["transpose"] == true);

    CHECK(post(c, base + "/undo", json::object())["noop"] == false);
    CHECK(c.Get(base + "/view")->body == before);
    CHECK(post(c, base + "/redo", json::object())["axis_labels"]["row_axis"] == "cell_types");
    CHECK(post(c, base + "/redo", json::object())["noop"] == true);

    // Repeated GETs are byte-identical.
    CHECK(c.Get(base + "/view")->body == c.Get(base + "/view")->body);
}

TEST_CASE("invalid patches answer 422 and leave history alone") {
    Running s;
    auto c = s.client();
    const auto id = new_session(c);
    const auto base = "/sessions/" + id;
    const auto before = c.Get(base + "/config")->body;

    const auto bad = post(c, base + "/config", json{{"row_sort", {{{"field", {{"metadata", "age"}}}, {"direction", "asc"}}}}}, 422);
    CHECK(bad["error"] == "InvalidConfig");
    CHECK(bad["violations"].size() >= 1);
    post(c, base + "/config", json{{"bogus", 1}}, 422);

    auto junk = c.Post(base + "/config", "{not json", kJson);
    REQUIRE(junk);
    CHECK(junk->status == 400);

    CHECK(c.Get(base + "/config")->body == before);
    CHECK(post(c, base + "/undo", json::object())["noop"] == true);
}

TEST_CASE("patches clear zoom and prune expanded rows") {
    const auto d = testing::toy_dataset();
    auto present = default_config(d);
    present.zoom = Zoom{Window{0, 2}, std::nullopt};
    present.expanded_rows = {"S1", "S3"};

    const auto sorted = apply_patch(d, present, json{{"row_sort", json::array()}});
    CHECK_FALSE(sorted.zoom);
    CHECK(sorted.expanded_rows == std::set<std::string>{"S1", "S3"});

    const auto themed = apply_patch(d, present, json{{"theme", "dark"}});
    CHECK(themed.zoom == present.zoom);

    const auto kept = apply_patch(d, present, json{{"transpose", true}, {"zoom", {{"row_window", {0, 1}}}}});
    REQUIRE(kept.zoom);
    CHECK(kept.zoom->row_window == Window{0, 1});
    CHECK(kept.expanded_rows.empty()); // sample ids are no longer rows

    auto filtered_patch = json::parse(R"({"filters": [{"axis": "samples", "field": "disease", "op": "equals", "operand": "CF"}]})");
    const auto filtered = apply_patch(d, present, filtered_patch);
    CHECK(filtered.expanded_rows == std::set<std::string>{"S3"});

    CHECK_THROWS_AS(apply_patch(d, present, json{{"transpose", true}, {"expanded_rows", {"S1"}}}), ConfigError);
}

TEST_CASE("sessions are isolated") {
    Running s;
    auto c = s.client();
    const auto a = new_session(c);
    const auto b = new_session(c);
    CHECK(a != b);
    post(c, "/sessions/" + a + "/config", json{{"transpose", true}});
    CHECK(json::parse(c.Get("/sessions/" + b + "/config")->body)["transpose"] == false);
    CHECK(s.service.session_count() == 2);

    // Concurrent patches on distinct sessions.
    std::vector<std::string> ids;
    for (int i = 0; i < 8; ++i) ids.push_back(new_session(c));
    std::atomic<int> ok{0};
    std::vector<std::thread> threads;
    for (const auto& id : ids) {
        threads.emplace_back([&, id] {
            auto cc = s.client();
            for (int k = 0; k < 10; ++k) {
                auto r = cc.Post("/sessions/" + id + "/config", json{{"log_applied", k % 2 == 0}}.dump(), kJson);
                if (r && r->status == 200) ++ok;
            }
        });
    }
    for (auto& t : threads) t.join();
    CHECK(ok == 80);
    for (const auto& id : ids) CHECK(json::parse(c.Get("/sessions/" + id + "/config")->body)["log_applied"] == false);
}

TEST_CASE("svg export and idle eviction") {
    ServiceOptions opts;
    opts.idle_timeout = std::chrono::seconds(0);
    const auto ui = testing::temp_dir("ui");
    std::ofstream(ui / "index.html") << "<html>ok</html>";
    opts.ui_dir = ui;
    Running s(opts);
    auto c = s.client();
    const auto id = new_session(c);
    auto svg = c.Get("/sessions/" + id + "/export.svg?width=400&height=300");
    REQUIRE(svg);
    CHECK(svg->status == 200);
    CHECK(svg->get_header_value("Content-Type") == "image/svg+xml");
    CHECK(svg->body.find("<svg") != std::string::npos);
    CHECK(c.Get("/sessions/" + id + "/export.svg?width=10&height=300")->status == 400);
    CHECK(c.Get("/sessions/" + id + "/export.svg?width=abc")->status == 400);

    auto page = c.Get("/ui/index.html");
    REQUIRE(page);
    CHECK(page->body == "<html>ok</html>");

    std::this_thread::sleep_for(std::chrono::milliseconds(1100));
    s.service.evict_idle();
    CHECK(s.service.session_count() == 0);
    std::filesystem::remove_all(ui);
}
