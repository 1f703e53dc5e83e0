#ifndef CELLPOP_SERVICE_HPP
#define CELLPOP_SERVICE_HPP

#include "cellpop/history.hpp"
#include "cellpop/model.hpp"

#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

namespace httplib {
class Server;
}

/**
 * @file service.hpp
 *
 * @brief HTTP/JSON API over shared immutable datasets and per-client sessions.
 *
 * Endpoints:
 *
 *     GET  /health
 *     GET  /datasets
 *     POST /sessions                      {"dataset": name}
 *     GET  /sessions/{id}/config
 *     POST /sessions/{id}/config          partial ViewConfig
 *     GET  /sessions/{id}/view
 *     POST /sessions/{id}/undo
 *     POST /sessions/{id}/redo
 *     GET  /sessions/{id}/export.svg?width=W&height=H
 *     GET  /ui/...                        static client assets
 *
 * Errors carry {"error": code, "detail": text}; 422 responses add
 * "violations". Requests on one session are serialized by that session's
 * mutex; the session table itself is only locked for lookup and insertion.
 */

namespace cellpop {

struct Session {
    std::string id;
    std::shared_ptr<const Dataset> dataset;
    HistoryStack history;
    std::chrono::steady_clock::time_point created_at;
    std::chrono::steady_clock::time_point last_access;
    std::mutex mutex;
};

struct ServiceOptions {
    std::optional<std::filesystem::path> ui_dir;
    std::chrono::seconds idle_timeout{3600};
    int default_export_width = 1200;
    int default_export_height = 900;
};

class Service {
  public:
    explicit Service(std::map<std::string, std::shared_ptr<const Dataset>> datasets, ServiceOptions options = {});

    /// Registers every route on `server`.
    void mount(httplib::Server& server);

    std::size_t session_count() const;

    /// Drops sessions idle for longer than the configured timeout.
    void evict_idle();

  private:
    std::shared_ptr<Session> create_session(const std::string& dataset_name);
    std::shared_ptr<Session> find_session(const std::string& id);

    std::map<std::string, std::shared_ptr<const Dataset>> datasets_;
    ServiceOptions options_;

    mutable std::shared_mutex sessions_mutex_;
    std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
};

/**
 * The config a patch produces from `present`. Unless the patch sets them
 * itself, zoom is cleared when sorting, filtering, grouping or orientation
 * change, and expanded rows that are no longer displayed are dropped.
 * Throws ConfigError for malformed patches or invalid results.
 */
ViewConfig apply_patch(const Dataset& dataset, const ViewConfig& present, const nlohmann::json& patch);

} // namespace cellpop

#endif
