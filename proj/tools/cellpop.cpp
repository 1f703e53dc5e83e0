// cellpop: serve the exploration API, export figures, summarize corpora.
//
// Exit codes:
//   0  success
//   1  usage error
//   2  no datasets found
//   3  a dataset failed to load (message names file and line)
//   4  invalid view configuration
//   5  unsupported export extension
//   6  I/O failure or port already in use

#include "cellpop/config_json.hpp"
#include "cellpop/error.hpp"
#include "cellpop/ingest.hpp"
#include "cellpop/raster.hpp"
#include "cellpop/render.hpp"
#include "cellpop/service.hpp"
#include "cellpop/stats.hpp"
#include "cellpop/svg.hpp"
#include "cellpop/transform.hpp"

#include "CLI11.hpp"
#include "httplib.h"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace cellpop;

namespace {

enum Exit : int {
    kOk = 0,
    kUsage = 1,
    kNoDatasets = 2,
    kDatasetError = 3,
    kInvalidConfig = 4,
    kUnsupportedExtension = 5,
    kIo = 6,
};

struct Failure {
    int code;
    std::string message;
};

std::vector<LoadedDataset> load_corpus(const fs::path& dir) {
    const auto paths = discover_datasets(dir);
    if (paths.empty()) throw Failure{kNoDatasets, "no datasets found under " + dir.string()};
    std::vector<LoadedDataset> out;
    for (const auto& p : paths) {
        try {
            out.push_back(load_dataset(p));
        } catch (const Error& e) {
            throw Failure{e.code() == ErrorCode::Io ? kIo : kDatasetError, e.what()};
        }
    }
    return out;
}

LoadedDataset load_single(const fs::path& path) {
    try {
        if (fs::is_regular_file(path) || is_dataset_dir(path)) return load_dataset(path);
    } catch (const Error& e) {
        throw Failure{e.code() == ErrorCode::Io ? kIo : kDatasetError, e.what()};
    }
    auto corpus = load_corpus(path);
    if (corpus.size() > 1) {
        std::string names;
        for (const auto& d : corpus) names += " " + d.dataset.name();
        throw Failure{kUsage, path.string() + " holds several datasets; pass one of:" + names};
    }
    return std::move(corpus.front());
}

void write_bytes(const fs::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Failure{kIo, "cannot write " + path.string()};
}

void print_warnings(const LoadedDataset& d) {
    for (const auto& w : d.warnings) std::cerr << d.dataset.name() << ": warning: " << w << "\n";
}

// ---------------------------------------------------------------------------

httplib::Server* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

int run_serve(const fs::path& data_dir, std::optional<int> port_flag) {
    int port = 8080;
    if (port_flag) {
        port = *port_flag;
    } else if (const char* env = std::getenv("CELLPOP_PORT")) {
        try {
            port = std::stoi(env);
        } catch (const std::exception&) {
            throw Failure{kUsage, std::string("CELLPOP_PORT is not a port number: ") + env};
        }
    }

    std::map<std::string, std::shared_ptr<const Dataset>> datasets;
    for (auto& d : load_corpus(data_dir)) {
        print_warnings(d);
        std::cout << d.dataset.name() << ": " << d.dataset.counts().rows() << " samples × " << d.dataset.counts().cols()
                  << " cell types" << std::endl;
        const auto name = d.dataset.name();
        datasets.emplace(name, std::make_shared<const Dataset>(std::move(d.dataset)));
    }

    ServiceOptions options;
    if (const char* ui = std::getenv("CELLPOP_UI_DIR")) {
        options.ui_dir = ui;
    } else {
        options.ui_dir = CELLPOP_DEFAULT_UI_DIR;
    }
    Service service(std::move(datasets), options);
    httplib::Server server;
    service.mount(server);

    const char* host_env = std::getenv("CELLPOP_HOST");
    const std::string host = host_env ? host_env : "127.0.0.1";
    if (!server.bind_to_port(host, port)) throw Failure{kIo, "cannot listen on " + host + ":" + std::to_string(port)};

    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "listening on http://" << host << ":" << port << std::endl;
    server.listen_after_bind();
    g_server = nullptr;
    return kOk;
}

int run_export(const fs::path& data, const fs::path& config_path, const fs::path& out, int scale) {
    const auto ext = out.extension().string();
    if (ext != ".svg" && ext != ".png") {
        throw Failure{kUnsupportedExtension, "unsupported output extension '" + ext + "' (use .svg or .png)"};
    }
    if (scale < 1) throw Failure{kUsage, "--scale must be at least 1"};

    const auto loaded = load_single(data);
    print_warnings(loaded);
    const auto& dataset = loaded.dataset;

    ViewConfig config;
    try {
        const auto text = read_file(config_path);
        config = merge_config(default_config(dataset), nlohmann::json::parse(text));
    } catch (const ConfigError& e) {
        std::string msg = "invalid config " + config_path.string() + ":";
        for (const auto& v : e.violations()) msg += "\n  " + v.field + ": " + v.reason;
        throw Failure{kInvalidConfig, msg};
    } catch (const nlohmann::json::parse_error& e) {
        throw Failure{kInvalidConfig, "invalid config " + config_path.string() + ": " + e.what()};
    } catch (const Error& e) {
        throw Failure{kIo, e.what()};
    }

    RenderModel model;
    try {
        model = build_render_model(apply_view(dataset, config), config);
    } catch (const ConfigError& e) {
        std::string msg = "invalid config " + config_path.string() + ":";
        for (const auto& v : e.violations()) msg += "\n  " + v.field + ": " + v.reason;
        throw Failure{kInvalidConfig, msg};
    }
    for (const auto& w : model.warnings) std::cerr << "warning: " << w << "\n";

    if (ext == ".svg") {
        write_bytes(out, render_svg(model, kPngBaseWidth, kPngBaseHeight));
    } else {
        const auto png = render_png(model, scale);
        write_bytes(out, std::string_view(reinterpret_cast<const char*>(png.data()), png.size()));
    }
    return kOk;
}

int run_stats(const fs::path& data_dir, const fs::path& out) {
    const auto corpus = load_corpus(data_dir);
    std::vector<const Dataset*> ptrs;
    for (const auto& d : corpus) {
        print_warnings(d);
        ptrs.push_back(&d.dataset);
    }
    const auto csv = summary_csv(unique_type_summary(ptrs));
    write_bytes(out, csv);
    std::cout << csv;
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cell population exploration engine"};
    app.require_subcommand(1);

    std::string data, config, out;
    std::optional<int> port;
    int scale = 2;

    auto* serve = app.add_subcommand("serve", "Serve the HTTP/JSON API over a data directory");
    serve->add_option("--data", data, "Directory with one dataset per subdirectory")->required();
    serve->add_option("--port", port, "Port (default: $CELLPOP_PORT, else 8080)")->check(CLI::Range(1, 65535));

    auto* exp = app.add_subcommand("export", "Render one view to SVG or PNG");
    exp->add_option("--data", data, "Dataset directory or file")->required();
    exp->add_option("--config", config, "ViewConfig JSON (partial documents apply over defaults)")->required();
    exp->add_option("--out", out, "Output file (.svg or .png)")->required();
    exp->add_option("--scale", scale, "PNG scale factor over 1200x900")->capture_default_str();

    auto* stats = app.add_subcommand("stats", "Unique cell types per dataset");
    stats->add_option("--data", data, "Directory with one dataset per subdirectory")->required();
    stats->add_option("--out", out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (serve->parsed()) return run_serve(data, port);
        if (exp->parsed()) return run_export(data, config, out, scale);
        return run_stats(data, out);
    } catch (const Failure& f) {
        std::cerr << "cellpop: " << f.message << "\n";
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "cellpop: " << e.what() << "\n";
        return kIo;
    }
}
