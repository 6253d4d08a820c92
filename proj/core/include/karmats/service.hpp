#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>

#include "karmats/discovery.hpp"
#include "karmats/document.hpp"
#include "karmats/editlog.hpp"
#include "karmats/series.hpp"

namespace karmats {

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ServiceOptions {
  /// Edit logs are mirrored here and replayed at startup when set.
  std::optional<std::filesystem::path> data_dir;
  /// Simulations longer than this are rejected with 422.
  std::size_t max_length = 1'000'000;
  std::size_t snapshot_interval = 64;
};

/// Reads KARMATS_DATA_DIR; other fields keep their defaults.
ServiceOptions options_from_env();

/// Transport-independent implementation of the HTTP API. Every handler takes
/// the raw request body and returns a finished response; errors are reported
/// as {"error": {"code", "message", "findings"?}} with the matching status.
///
/// Graph sessions are independent. Within one session mutations serialize on
/// a writer mutex while readers copy an immutable snapshot pointer.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // GET /graphs, POST /graphs, GET /graphs/{id}, PATCH /graphs/{id}
  Response list_graphs() const;
  Response create_graph(std::string_view body);
  Response get_graph(const std::string& id) const;
  Response patch_graph(const std::string& id, std::string_view body);
  // GET /graphs/{id}/log?since=&wait_ms=
  Response get_log(const std::string& id, std::uint64_t since = 0,
                   std::chrono::milliseconds wait = std::chrono::milliseconds(0)) const;

  // POST /graphs/{id}/suggestions, GET /graphs/{id}/suggestions, GET /suggestions/{sid}
  Response import_suggestions(const std::string& id, std::string_view body);
  Response list_suggestions(const std::string& id) const;
  Response get_suggestions(const std::string& sid) const;
  // POST /suggestions/{sid}/accept, POST /suggestions/{sid}/reject
  Response accept_suggestion(const std::string& sid, std::string_view body);
  Response reject_suggestion(const std::string& sid, std::string_view body);

  // POST /graphs/{id}/simulate, GET /runs/{rid}
  Response simulate(const std::string& id, std::string_view body);
  Response get_run(const std::string& rid, std::string_view accept = "application/json") const;

  // POST /evaluate
  Response evaluate(std::string_view body) const;

  /// Blocks until every queued simulation has finished.
  void wait_idle();

 private:
  struct Snapshot;
  struct Session;
  struct SuggestionEntry;
  struct Run;

  std::shared_ptr<Session> session(const std::string& id) const;
  std::shared_ptr<const Snapshot> snapshot(const Session& s) const;
  Response commit(Session& s, std::uint64_t base_version, EditEvent event, const nlohmann::json& extra);
  void persist_session(const Session& s) const;
  void load_data_dir();
  void worker_loop();

  ServiceOptions options_;

  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>, std::less<>> sessions_;
  std::uint64_t next_graph_ = 1;

  mutable std::mutex suggestions_mutex_;
  std::map<std::string, std::shared_ptr<SuggestionEntry>, std::less<>> suggestions_;
  std::uint64_t next_suggestion_ = 1;

  mutable std::mutex runs_mutex_;
  std::condition_variable runs_cv_;
  std::map<std::string, std::shared_ptr<Run>, std::less<>> runs_;
  std::uint64_t next_run_ = 1;
  std::deque<std::function<void()>> queue_;
  std::size_t busy_ = 0;
  bool stopping_ = false;
  std::thread worker_;
};

}  // namespace karmats
