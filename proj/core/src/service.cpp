#include "karmats/service.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "karmats/config.hpp"
#include "karmats/csv.hpp"
#include "karmats/hash.hpp"
#include "karmats/metrics.hpp"
#include "karmats/simulation.hpp"

namespace karmats {

using nlohmann::json;
using namespace json_read;

struct Service::Snapshot {
  std::uint64_t version = 1;
  GraphDocument document;
  std::string bytes;
};

struct Service::Session {
  explicit Session(std::size_t interval) : log(interval) {}
  std::string id;
  std::uint64_t created_events = 0;
  std::mutex write;
  mutable std::mutex snapshot_mutex;
  std::shared_ptr<const Snapshot> current;
  EditLog log;
  /// (version, config hash) -> run id; cleared whenever the version moves.
  std::map<std::pair<std::uint64_t, std::string>, std::string> cache;
  mutable std::mutex log_mutex;
  mutable std::condition_variable log_cv;
  std::vector<std::string> suggestion_ids;

  std::uint64_t version_of(std::uint64_t seq) const { return seq <= created_events ? 1 : 1 + (seq - created_events); }
};

struct Service::SuggestionEntry {
  std::string id;
  std::string graph_id;
  std::mutex mutex;
  SuggestionSet set;
};

struct Service::Run {
  std::string id;
  std::string graph_id;
  std::uint64_t version = 0;
  enum class Status { pending, done, failed } status = Status::pending;
  SeriesFrame frame;
  std::string csv;
  std::string json_body;
  std::string error_code;
  std::string error_message;
};

namespace {

Response reply(int status, const json& body) { return {status, body.dump(), "application/json"}; }

Response error(int status, const std::string& code, const std::string& message, json findings = nullptr) {
  json err{{"code", code}, {"message", message}};
  if (!findings.is_null()) err["findings"] = std::move(findings);
  return reply(status, json{{"error", std::move(err)}});
}

json findings_json(const ValidationReport& report) {
  json out = json::array();
  for (const auto& f : report.findings) out.push_back(json{{"code", f.code}, {"location", f.location}, {"message", f.message}});
  return out;
}

Response from_format_error(const FormatError& e) {
  return error(400, "format.invalid", e.what(), json::array({json{{"code", "format.invalid"}, {"location", e.path()}, {"message", e.what()}}}));
}

Response from_graph_error(const GraphError& e) {
  return error(400, e.code(), e.what(), json::array({json{{"code", e.code()}, {"location", ""}, {"message", e.what()}}}));
}

Response from_invalid_graph(const InvalidGraphError& e) {
  return error(400, "graph.invalid", "graph failed validation", findings_json(e.report()));
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json parse_body(std::string_view body) {
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  return parse_json(body);
}

Actor actor_from(const json& body, Actor fallback) {
  const json* a = optional_field(body, "actor");
  if (!a) return fallback;
  object(*a, "/actor");
  const std::string kind = string(field(*a, "kind", "/actor"), "/actor/kind");
  const std::string name = string(field(*a, "name", "/actor"), "/actor/name");
  if (kind == "expert") return Actor::expert(name);
  if (kind == "algorithm") return Actor::algorithm(name);
  throw FormatError("/actor/kind", "unknown actor kind '" + kind + "'");
}

json suggestions_json(const std::string& sid, const std::string& graph_id, const SuggestionSet& set) {
  json items = json::array();
  for (std::size_t i = 0; i < set.suggestions.size(); ++i) {
    const auto& s = set.suggestions[i];
    items.push_back(json{{"index", i},
                         {"source", s.source},
                         {"target", s.target},
                         {"lag", s.lag},
                         {"score", s.score ? json(*s.score) : json(nullptr)},
                         {"status", std::string(to_string(s.status))}});
  }
  return json{{"id", sid}, {"graph_id", graph_id}, {"algorithm", set.algorithm}, {"suggestions", std::move(items)}};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json frame_json(const SeriesFrame& frame) {
  json columns = json::array();
  for (const auto& c : frame.columns) {
    columns.push_back(json{{"name", c.spec.name},
                           {"kind", std::string(to_string(c.spec.kind))},
                           {"categories", c.spec.categories},
                           {"latent", c.spec.latent},
                           {"values", c.values}});
  }
  return json{{"meta", parse_json(export_series_meta(frame))}, {"columns", std::move(columns)}};
}

}  // namespace

ServiceOptions options_from_env() {
  ServiceOptions o;
  if (const char* dir = std::getenv("KARMATS_DATA_DIR"); dir && *dir) o.data_dir = dir;
  return o;
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  if (options_.data_dir) load_data_dir();
  worker_ = std::thread([this] { worker_loop(); });
}

Service::~Service() {
  {
    std::lock_guard lock(runs_mutex_);
    stopping_ = true;
  }
  runs_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void Service::worker_loop() {
  std::unique_lock lock(runs_mutex_);
  while (true) {
    runs_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
    if (queue_.empty()) return;
    auto job = std::move(queue_.front());
    queue_.pop_front();
    ++busy_;
    lock.unlock();
    job();
    lock.lock();
    --busy_;
    runs_cv_.notify_all();
  }
}

void Service::wait_idle() {
  std::unique_lock lock(runs_mutex_);
  runs_cv_.wait(lock, [&] { return queue_.empty() && busy_ == 0; });
}

std::shared_ptr<Service::Session> Service::session(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::shared_ptr<const Service::Snapshot> Service::snapshot(const Session& s) const {
  std::lock_guard lock(s.snapshot_mutex);
  return s.current;
}

void Service::persist_session(const Session& s) const {
  if (!options_.data_dir) return;
  const auto snap = snapshot(s);
  json meta{{"id", s.id},
            {"created_events", s.created_events},
            {"metadata", json{{"title", snap->document.metadata.title},
                              {"authors", snap->document.metadata.authors},
                              {"created", snap->document.metadata.created}}},
            {"extensions", snap->document.extensions}};
  std::ofstream out(*options_.data_dir / (s.id + ".session.json"), std::ios::binary | std::ios::trunc);
  out << dump_canonical(meta);
}

void Service::load_data_dir() {
  std::filesystem::create_directories(*options_.data_dir);
  for (const auto& entry : std::filesystem::directory_iterator(*options_.data_dir)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = ".session.json";
    if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    const json meta = parse_json(read_file(entry.path()));
    auto s = std::make_shared<Session>(options_.snapshot_interval);
    s->id = string(field(meta, "id", ""), "/id");
    s->created_events = count(field(meta, "created_events", ""), "/created_events");
    GraphDocument doc;
    const json& md = field(meta, "metadata", "");
    doc.metadata.title = md.value("title", "");
    doc.metadata.authors = md.value("authors", std::vector<std::string>{});
    doc.metadata.created = md.value("created", "");
    doc.extensions = meta.value("extensions", json::object());
    const auto log_path = *options_.data_dir / (s->id + ".editlog.jsonl");
    DscpGraph g;
    for (const auto& e : parse_jsonl(read_file(log_path))) g = s->log.append_existing(g, e);
    doc.graph = canonical(g);
    auto snap = std::make_shared<Snapshot>();
    snap->version = s->version_of(s->log.last_seq());
    snap->document = std::move(doc);
    snap->bytes = save_document(snap->document);
    s->current = std::move(snap);
    s->log.attach_file(log_path);
    if (s->id.size() > 1 && s->id[0] == 'g') {
      next_graph_ = std::max<std::uint64_t>(next_graph_, std::stoull(s->id.substr(1)) + 1);
    }
    sessions_[s->id] = std::move(s);
  }
}

Response Service::list_graphs() const {
  json items = json::array();
  std::shared_lock lock(sessions_mutex_);
  for (const auto& [id, s] : sessions_) {
    const auto snap = snapshot(*s);
    items.push_back(json{{"id", id},
                         {"version", snap->version},
                         {"title", snap->document.metadata.title},
                         {"variables", snap->document.graph.size()},
                         {"edges", snap->document.graph.edges.size()}});
  }
  return reply(200, json{{"graphs", std::move(items)}});
}

Response Service::create_graph(std::string_view body) {
  GraphDocument doc;
  Actor actor = Actor::expert("api");
  try {
    const json j = parse_body(body);
    object(j, "");
    if (j.contains("format_version")) {
      doc = document_from_json(j);
    } else {
      actor = actor_from(j, actor);
      if (const json* d = optional_field(j, "document")) {
        try {
          doc = document_from_json(*d);
        } catch (const FormatError& e) {
          throw FormatError("/document" + e.path(), e.what());
        }
      }
      if (const json* t = optional_field(j, "title")) doc.metadata.title = string(*t, "/title");
    }
  } catch (const FormatError& e) {
    return from_format_error(e);
  } catch (const InvalidGraphError& e) {
    return from_invalid_graph(e);
  }

  auto s = std::make_shared<Session>(options_.snapshot_interval);
  {
    std::unique_lock lock(sessions_mutex_);
    s->id = "g" + std::to_string(next_graph_++);
  }
  const auto events = events_from_graph(doc.graph, actor);
  s->created_events = events.size();
  auto base = std::make_shared<Snapshot>();
  base->document.metadata = doc.metadata;
  base->document.extensions = doc.extensions;
  s->current = base;
  if (options_.data_dir) {
    std::filesystem::create_directories(*options_.data_dir);
    const auto log_path = *options_.data_dir / (s->id + ".editlog.jsonl");
    std::ofstream(log_path, std::ios::binary | std::ios::trunc).flush();
    s->log.attach_file(log_path);
  }
  DscpGraph g;
  const std::string now = utc_now();
  try {
    for (auto e : events) {
      e.timestamp = now;
      g = s->log.commit(g, std::move(e));
    }
  } catch (const GraphError& e) {
    return from_graph_error(e);
  }
  auto snap = std::make_shared<Snapshot>();
  snap->version = 1;
  snap->document = doc;
  snap->document.graph = canonical(g);
  snap->bytes = save_document(snap->document);
  s->current = snap;
  persist_session(*s);
  {
    std::unique_lock lock(sessions_mutex_);
    sessions_[s->id] = s;
  }
  return reply(201, json{{"id", s->id}, {"version", 1}, {"document", parse_json(snap->bytes)}});
}

Response Service::get_graph(const std::string& id) const {
  auto s = session(id);
  if (!s) return error(404, "graph.not_found", "no graph '" + id + "'");
  const auto snap = snapshot(*s);
  return reply(200, json{{"id", id}, {"version", snap->version}, {"document", parse_json(snap->bytes)}});
}

Response Service::commit(Session& s, std::uint64_t base_version, EditEvent event, const json& extra) {
  std::lock_guard write(s.write);
  const auto snap = snapshot(s);
  if (base_version != snap->version) {
    json err{{"code", "version.conflict"},
             {"message", "base_version " + std::to_string(base_version) + " is stale; current version is " +
                             std::to_string(snap->version)},
             {"current_version", snap->version}};
    return reply(409, json{{"error", std::move(err)}});
  }
  try {
    const DscpGraph next = apply_event(snap->document.graph, event);
    if (auto report = validate(next); !report.ok()) {
      return error(400, "graph.invalid", "edit would leave the graph invalid", findings_json(report));
    }
    event.timestamp = utc_now();
    const DscpGraph committed = s.log.commit(snap->document.graph, event);
    auto updated = std::make_shared<Snapshot>();
    updated->version = snap->version + 1;
    updated->document = snap->document;
    updated->document.graph = canonical(committed);
    updated->bytes = save_document(updated->document);
    {
      std::lock_guard lock(s.snapshot_mutex);
      s.current = updated;
    }
    s.cache.clear();
    {
      std::lock_guard lock(s.log_mutex);
    }
    s.log_cv.notify_all();
    const auto last = s.log.events(s.log.last_seq() - 1);
    json ev = event_to_json(last.back());
    ev["version"] = updated->version;
    json body{{"id", s.id}, {"version", updated->version}, {"event", std::move(ev)}, {"document", parse_json(updated->bytes)}};
    for (const auto& [k, v] : extra.items()) body[k] = v;
    return reply(200, body);
  } catch (const GraphError& e) {
    return from_graph_error(e);
  } catch (const FormatError& e) {
    return from_format_error(e);
  } catch (const FunctionalError& e) {
    return error(400, e.code(), e.what());
  }
}

Response Service::patch_graph(const std::string& id, std::string_view body) {
  auto s = session(id);
  if (!s) return error(404, "graph.not_found", "no graph '" + id + "'");
  try {
    const json j = parse_body(body);
    object(j, "");
    const std::uint64_t base = count(field(j, "base_version", ""), "/base_version");
    json ev = object(field(j, "event", ""), "/event");
    if (!ev.contains("seq")) ev["seq"] = 0;
    if (!ev.contains("actor")) ev["actor"] = json{{"kind", "expert"}, {"name", "api"}};
    EditEvent event;
    try {
      event = event_from_json(ev);
    } catch (const FormatError& e) {
      throw FormatError("/event" + e.path(), e.what());
    }
    return commit(*s, base, std::move(event), json::object());
  } catch (const FormatError& e) {
    return from_format_error(e);
  }
}

Response Service::get_log(const std::string& id, std::uint64_t since, std::chrono::milliseconds wait) const {
  auto s = session(id);
  if (!s) return error(404, "graph.not_found", "no graph '" + id + "'");
  wait = std::min(wait, std::chrono::milliseconds(30'000));
  if (wait.count() > 0 && s->log.last_seq() <= since) {
    std::unique_lock lock(s->log_mutex);
    s->log_cv.wait_for(lock, wait, [&] { return s->log.last_seq() > since; });
  }
  json events = json::array();
  for (const auto& e : s->log.events(since)) {
    json item = event_to_json(e);
    item["version"] = s->version_of(e.seq);
    events.push_back(std::move(item));
  }
  const auto snap = snapshot(*s);
  return reply(200, json{{"id", id}, {"version", snap->version}, {"last_seq", s->log.last_seq()}, {"events", std::move(events)}});
}

Response Service::import_suggestions(const std::string& id, std::string_view body) {
  auto s = session(id);
  if (!s) return error(404, "graph.not_found", "no graph '" + id + "'");
  auto entry = std::make_shared<SuggestionEntry>();
  try {
    const json j = parse_body(body);
    object(j, "");
    const std::string algorithm = string(field(j, "algorithm", ""), "/algorithm");
    const std::string format_name = j.contains("format") ? string(j["format"], "/format") : "edge-list";
    auto format = parse_discovery_format(format_name);
    if (!format) throw FormatError("/format", "unknown discovery format '" + format_name + "'");
    const json& data = field(j, "data", "");
    const std::string bytes = data.is_string() ? data.get<std::string>() : data.dump();
    try {
      entry->set = import_discovery(bytes, *format, algorithm, snapshot(*s)->document.graph);
    } catch (const FormatError& e) {
      throw FormatError("/data" + (e.path().empty() || e.path()[0] == '/' ? e.path() : ": " + e.path()), e.what());
    }
  } catch (const FormatError& e) {
    return from_format_error(e);
  }
  entry->graph_id = id;
  {
    std::lock_guard lock(suggestions_mutex_);
    entry->id = "s" + std::to_string(next_suggestion_++);
    suggestions_[entry->id] = entry;
  }
  {
    std::lock_guard write(s->write);
    s->suggestion_ids.push_back(entry->id);
  }
  return reply(201, suggestions_json(entry->id, id, entry->set));
}

Response Service::list_suggestions(const std::string& id) const {
  auto s = session(id);
  if (!s) return error(404, "graph.not_found", "no graph '" + id + "'");
  std::vector<std::string> ids;
  {
    std::lock_guard write(s->write);
    ids = s->suggestion_ids;
  }
  json items = json::array();
  for (const auto& sid : ids) {
    std::shared_ptr<SuggestionEntry> entry;
    {
      std::lock_guard lock(suggestions_mutex_);
      entry = suggestions_.at(sid);
    }
    std::lock_guard lock(entry->mutex);
    items.push_back(suggestions_json(sid, id, entry->set));
  }
  return reply(200, json{{"graph_id", id}, {"suggestion_sets", std::move(items)}});
}

Response Service::get_suggestions(const std::string& sid) const {
  std::shared_ptr<SuggestionEntry> entry;
  {
    std::lock_guard lock(suggestions_mutex_);
    auto it = suggestions_.find(sid);
    if (it == suggestions_.end()) return error(404, "suggestion.not_found", "no suggestion set '" + sid + "'");
    entry = it->second;
  }
  std::lock_guard lock(entry->mutex);
  return reply(200, suggestions_json(sid, entry->graph_id, entry->set));
}

Response Service::accept_suggestion(const std::string& sid, std::string_view body) {
  std::shared_ptr<SuggestionEntry> entry;
  {
    std::lock_guard lock(suggestions_mutex_);
    auto it = suggestions_.find(sid);
    if (it == suggestions_.end()) return error(404, "suggestion.not_found", "no suggestion set '" + sid + "'");
    entry = it->second;
  }
  auto s = session(entry->graph_id);
  if (!s) return error(404, "graph.not_found", "no graph '" + entry->graph_id + "'");
  try {
    const json j = parse_body(body);
    object(j, "");
    const std::size_t index = count(field(j, "index", ""), "/index");
    std::lock_guard lock(entry->mutex);
    if (index >= entry->set.suggestions.size()) {
      return error(404, "suggestion.not_found", "suggestion index " + std::to_string(index) + " out of range");
    }
    if (entry->set.suggestions[index].status != SuggestionStatus::pending) {
      return error(409, "suggestion.not_pending", "suggestion " + std::to_string(index) + " is already " +
                                                      std::string(to_string(entry->set.suggestions[index].status)));
    }
    const std::uint64_t base =
        j.contains("base_version") ? count(j["base_version"], "/base_version") : snapshot(*s)->version;
    SuggestionSet trial = entry->set;
    EditEvent event = karmats::accept_suggestion(trial, index);
    trial.suggestions[index].status = SuggestionStatus::accepted;
    Response r = commit(*s, base, std::move(event), json{{"suggestions", suggestions_json(sid, entry->graph_id, trial)}});
    if (r.status == 200) entry->set = std::move(trial);
    return r;
  } catch (const FormatError& e) {
    return from_format_error(e);
  }
}

Response Service::reject_suggestion(const std::string& sid, std::string_view body) {
  std::shared_ptr<SuggestionEntry> entry;
  {
    std::lock_guard lock(suggestions_mutex_);
    auto it = suggestions_.find(sid);
    if (it == suggestions_.end()) return error(404, "suggestion.not_found", "no suggestion set '" + sid + "'");
    entry = it->second;
  }
  try {
    const json j = parse_body(body);
    object(j, "");
    const std::size_t index = count(field(j, "index", ""), "/index");
    std::lock_guard lock(entry->mutex);
    if (index >= entry->set.suggestions.size()) {
      return error(404, "suggestion.not_found", "suggestion index " + std::to_string(index) + " out of range");
    }
    if (entry->set.suggestions[index].status != SuggestionStatus::pending) {
      return error(409, "suggestion.not_pending", "suggestion " + std::to_string(index) + " is already " +
                                                      std::string(to_string(entry->set.suggestions[index].status)));
    }
    karmats::reject_suggestion(entry->set, index);
    return reply(200, json{{"suggestions", suggestions_json(sid, entry->graph_id, entry->set)}});
  } catch (const FormatError& e) {
    return from_format_error(e);
  }
}

Response Service::simulate(const std::string& id, std::string_view body) {
  auto s = session(id);
  if (!s) return error(404, "graph.not_found", "no graph '" + id + "'");
  const auto snap = snapshot(*s);
  SimulationConfig config;
  std::string key;
  try {
    const json j = parse_body(body);
    object(j, "");
    if (const json* init = optional_field(j, "init"); init && init->is_object() && init->contains("csv")) {
      throw FormatError("/init/csv", "the service accepts segments inline via \"data\" only");
    }
    config = simulation_config_from_json(j, snap->document.graph);
    key = sha256_hex(dump_canonical(j));
  } catch (const FormatError& e) {
    return from_format_error(e);
  }
  if (config.length > options_.max_length) {
    return error(422, "simulation.too_long", "length " + std::to_string(config.length) + " exceeds the limit of " +
                                                 std::to_string(options_.max_length));
  }
  if (config.length == 0) return error(422, "simulation.config", "length must be positive");
  if (auto report = validate(snap->document.graph); !report.ok()) {
    return error(422, "simulation.invalid_graph", "graph failed validation", findings_json(report));
  }

  std::shared_ptr<Run> run;
  bool cached = false;
  {
    std::lock_guard write(s->write);
    const auto cache_key = std::make_pair(snap->version, key);
    if (snapshot(*s)->version == snap->version) {
      if (auto it = s->cache.find(cache_key); it != s->cache.end()) {
        std::lock_guard lock(runs_mutex_);
        run = runs_.at(it->second);
        cached = true;
      }
    }
    if (!run) {
      run = std::make_shared<Run>();
      run->graph_id = id;
      run->version = snap->version;
      std::lock_guard lock(runs_mutex_);
      run->id = "r" + std::to_string(next_run_++);
      runs_[run->id] = run;
      if (snapshot(*s)->version == snap->version) s->cache[cache_key] = run->id;
    }
  }
  if (!cached) {
    auto graph = std::make_shared<const DscpGraph>(snap->document.graph);
    auto job = [run, graph, config, this] {
      Run result;
      try {
        result.frame = karmats::simulate(*graph, config);
        result.csv = export_csv(result.frame);
        json body = frame_json(result.frame);
        body["id"] = run->id;
        body["graph_id"] = run->graph_id;
        body["version"] = run->version;
        body["status"] = "done";
        result.json_body = body.dump();
        result.status = Run::Status::done;
      } catch (const SimulationError& e) {
        result.status = Run::Status::failed;
        result.error_code = e.code();
        result.error_message = e.what();
      } catch (const std::exception& e) {
        result.status = Run::Status::failed;
        result.error_code = "simulation.failed";
        result.error_message = e.what();
      }
      std::lock_guard lock(runs_mutex_);
      run->frame = std::move(result.frame);
      run->csv = std::move(result.csv);
      run->json_body = std::move(result.json_body);
      run->error_code = std::move(result.error_code);
      run->error_message = std::move(result.error_message);
      run->status = result.status;
    };
    {
      std::lock_guard lock(runs_mutex_);
      queue_.push_back(std::move(job));
    }
    runs_cv_.notify_all();
  }
  std::lock_guard lock(runs_mutex_);
  const char* status = run->status == Run::Status::pending ? "pending" : run->status == Run::Status::done ? "done" : "failed";
  return reply(202, json{{"run_id", run->id}, {"graph_id", id}, {"version", run->version}, {"status", status}, {"cached", cached}});
}

Response Service::get_run(const std::string& rid, std::string_view accept) const {
  std::lock_guard lock(runs_mutex_);
  auto it = runs_.find(rid);
  if (it == runs_.end()) return error(404, "run.not_found", "no run '" + rid + "'");
  const Run& run = *it->second;
  switch (run.status) {
    case Run::Status::pending:
      return reply(202, json{{"id", run.id}, {"graph_id", run.graph_id}, {"version", run.version}, {"status", "pending"}});
    case Run::Status::failed:
      return error(422, run.error_code, run.error_message);
    case Run::Status::done:
      break;
  }
  if (accept.find("text/csv") != std::string_view::npos) return {200, run.csv, "text/csv"};
  return {200, run.json_body, "application/json"};
}

Response Service::evaluate(std::string_view body) const {
  try {
    const json j = parse_body(body);
    object(j, "");
    const std::string truth_id = string(field(j, "truth", ""), "/truth");
    auto s = session(truth_id);
    if (!s) return error(404, "graph.not_found", "no graph '" + truth_id + "'");
    const auto snap = snapshot(*s);
    const json& est = field(j, "estimate", "");
    DscpGraph estimate;
    if (est.is_string()) {
      auto other = session(est.get<std::string>());
      if (!other) return error(404, "graph.not_found", "no graph '" + est.get<std::string>() + "'");
      estimate = snapshot(*other)->document.graph;
    } else {
      try {
        estimate = document_from_json(est).graph;
      } catch (const FormatError& e) {
        throw FormatError("/estimate" + e.path(), e.what());
      }
    }
    int window = 0;
    if (const json* w = optional_field(j, "lag_window")) window = static_cast<int>(count(*w, "/lag_window"));
    json report = to_json(karmats::evaluate(snap->document.graph, estimate, window));
    report["truth"] = truth_id;
    report["truth_version"] = snap->version;
    return reply(200, report);
  } catch (const FormatError& e) {
    return from_format_error(e);
  } catch (const InvalidGraphError& e) {
    return from_invalid_graph(e);
  } catch (const MetricsError& e) {
    return error(400, e.code(), e.what());
  }
}

}  // namespace karmats
