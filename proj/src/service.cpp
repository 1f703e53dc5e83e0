#include "cellpop/service.hpp"

#include "cellpop/config_json.hpp"
#include "cellpop/error.hpp"
#include "cellpop/render.hpp"
#include "cellpop/svg.hpp"
#include "cellpop/transform.hpp"

#include "httplib.h"

#include <charconv>
#include <random>

namespace cellpop {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& detail) {
    send_json(res, status, json{{"error", code}, {"detail", detail}});
}

int status_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidConfig: return 422;
    case ErrorCode::UnknownEntity:
    case ErrorCode::UnknownField:
    case ErrorCode::NumericFieldNotGroupable: return 422;
    case ErrorCode::InvalidJson:
    case ErrorCode::DegenerateSize:
    case ErrorCode::InvalidArgument: return 400;
    default: return 500;
    }
}

std::string new_token() {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (int word = 0; word < 2; ++word) {
        auto v = rng();
        for (int i = 0; i < 16; ++i, v >>= 4) out.push_back(digits[v & 0xF]);
    }
    return out;
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidJson, e.what());
    }
}

json view_json(const Session& s) {
    const auto& config = s.history.present();
    return to_json(build_render_model(apply_view(*s.dataset, config), config));
}

std::optional<int> int_param(const httplib::Request& req, const char* name, int fallback) {
    if (!req.has_param(name)) return fallback;
    const auto text = req.get_param_value(name);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

json fields_json(const MetadataTable& meta) {
    json out = json::array();
    for (const auto& f : meta.fields()) {
        static constexpr const char* kinds[] = {"categorical", "numeric", "hierarchy_level"};
        json j{{"name", f.name}, {"kind", kinds[static_cast<int>(f.kind)]}};
        if (f.kind == FieldKind::hierarchy_level) j["level"] = f.level;
        out.push_back(std::move(j));
    }
    return out;
}

} // namespace

ViewConfig apply_patch(const Dataset& dataset, const ViewConfig& present, const json& patch) {
    ViewConfig next = merge_config(present, patch);

    if (!patch.contains("zoom")) {
        const bool reshaped = next.row_sort != present.row_sort || next.col_sort != present.col_sort ||
                              next.filters != present.filters || next.row_group_by != present.row_group_by ||
                              next.transpose != present.transpose;
        if (reshaped) next.zoom.reset();
    }
    if (!patch.contains("expanded_rows") && !next.expanded_rows.empty()) {
        // Drop rows that the new filters, grouping or orientation no longer show.
        // If the rest of the config is invalid, validation below reports it.
        try {
            const auto ids = displayed_ids(dataset, next);
            std::set<std::string> shown(ids.rows.begin(), ids.rows.end());
            std::erase_if(next.expanded_rows, [&](const std::string& id) { return !shown.count(id); });
        } catch (const Error&) {
        }
    }

    auto violations = validate_config(dataset, next);
    if (!violations.empty()) throw ConfigError(std::move(violations));
    return next;
}

Service::Service(std::map<std::string, std::shared_ptr<const Dataset>> datasets, ServiceOptions options)
    : datasets_(std::move(datasets)), options_(std::move(options)) {}

std::size_t Service::session_count() const {
    std::shared_lock lock(sessions_mutex_);
    return sessions_.size();
}

void Service::evict_idle() {
    const auto now = std::chrono::steady_clock::now();
    std::unique_lock lock(sessions_mutex_);
    std::erase_if(sessions_, [&](const auto& entry) {
        std::unique_lock session_lock(entry.second->mutex, std::try_to_lock);
        // A session busy with a request is in use, whatever its timestamp says.
        return session_lock.owns_lock() && now - entry.second->last_access > options_.idle_timeout;
    });
}

std::shared_ptr<Session> Service::create_session(const std::string& dataset_name) {
    auto it = datasets_.find(dataset_name);
    if (it == datasets_.end()) return nullptr;
    evict_idle();
    auto s = std::make_shared<Session>();
    s->dataset = it->second;
    s->history = HistoryStack(default_config(*it->second));
    s->created_at = s->last_access = std::chrono::steady_clock::now();
    std::unique_lock lock(sessions_mutex_);
    do {
        s->id = new_token();
    } while (sessions_.count(s->id));
    sessions_.emplace(s->id, s);
    return s;
}

std::shared_ptr<Session> Service::find_session(const std::string& id) {
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

void Service::mount(httplib::Server& server) {
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const ConfigError& e) {
            send_json(res, 422, json{{"error", to_string(e.code())}, {"detail", e.what()}, {"violations", to_json(e.violations())}});
        } catch (const Error& e) {
            send_error(res, status_for(e.code()), to_string(e.code()), e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "Internal", e.what());
        } catch (...) {
            send_error(res, 500, "Internal", "unknown failure");
        }
    });

    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, json{{"status", "ok"}});
    });

    server.Get("/datasets", [this](const httplib::Request&, httplib::Response& res) {
        json out = json::array();
        for (const auto& [name, d] : datasets_) {
            out.push_back(json{{"name", name},
                               {"samples", d->counts().rows()},
                               {"cell_types", d->counts().cols()},
                               {"sample_fields", fields_json(d->sample_meta())},
                               {"cell_type_fields", fields_json(d->cell_type_meta())}});
        }
        send_json(res, 200, out);
    });

    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        if (!body.is_object() || !body.contains("dataset") || !body["dataset"].is_string()) {
            return send_error(res, 400, "InvalidArgument", "body must be {\"dataset\": <name>}");
        }
        const auto name = body["dataset"].get<std::string>();
        auto s = create_session(name);
        if (!s) return send_error(res, 404, "UnknownDataset", "no dataset named '" + name + "'");
        std::lock_guard lock(s->mutex);
        send_json(res, 201, json{{"id", s->id}, {"dataset", name}, {"config", to_json(s->history.present())}});
    });

    // Runs `fn` with the session locked, or answers 404.
    auto with_session = [this](const httplib::Request& req, httplib::Response& res, auto&& fn) {
        const auto id = req.path_params.at("id");
        auto s = find_session(id);
        if (!s) return send_error(res, 404, "UnknownSession", "no session '" + id + "'");
        std::lock_guard lock(s->mutex);
        s->last_access = std::chrono::steady_clock::now();
        fn(*s);
    };

    server.Get("/sessions/:id/config", [with_session](const httplib::Request& req, httplib::Response& res) {
        with_session(req, res, [&](Session& s) { send_json(res, 200, to_json(s.history.present())); });
    });

    server.Post("/sessions/:id/config", [with_session](const httplib::Request& req, httplib::Response& res) {
        const auto patch = parse_body(req);
        with_session(req, res, [&](Session& s) {
            auto next = apply_patch(*s.dataset, s.history.present(), patch);
            // Render before committing so a failure leaves the history untouched.
            auto model = to_json(build_render_model(apply_view(*s.dataset, next), next));
            s.history.push(std::move(next));
            send_json(res, 200, model);
        });
    });

    server.Get("/sessions/:id/view", [with_session](const httplib::Request& req, httplib::Response& res) {
        with_session(req, res, [&](Session& s) { send_json(res, 200, view_json(s)); });
    });

    server.Post("/sessions/:id/undo", [with_session](const httplib::Request& req, httplib::Response& res) {
        with_session(req, res, [&](Session& s) {
            const bool changed = s.history.undo();
            auto model = view_json(s);
            model["noop"] = !changed;
            send_json(res, 200, model);
        });
    });

    server.Post("/sessions/:id/redo", [with_session](const httplib::Request& req, httplib::Response& res) {
        with_session(req, res, [&](Session& s) {
            const bool changed = s.history.redo();
            auto model = view_json(s);
            model["noop"] = !changed;
            send_json(res, 200, model);
        });
    });

    server.Get("/sessions/:id/export.svg", [this, with_session](const httplib::Request& req, httplib::Response& res) {
        const auto width = int_param(req, "width", options_.default_export_width);
        const auto height = int_param(req, "height", options_.default_export_height);
        if (!width || !height) return send_error(res, 400, "InvalidArgument", "width and height must be integers");
        with_session(req, res, [&](Session& s) {
            const auto& config = s.history.present();
            const auto model = build_render_model(apply_view(*s.dataset, config), config);
            res.status = 200;
            res.set_content(render_svg(model, *width, *height), "image/svg+xml");
        });
    });

    if (options_.ui_dir && std::filesystem::is_directory(*options_.ui_dir)) {
        server.set_mount_point("/ui", options_.ui_dir->string());
        server.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/ui/"); });
    }
}

} // namespace cellpop
