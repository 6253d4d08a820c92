#include "karmats/http_server.hpp"

#include <httplib.h>

#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace karmats {

struct HttpServer::Impl {
  httplib::Server server;
  std::thread thread;
};

namespace {

void send(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

std::uint64_t query_u64(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return 0;
  try {
    return std::stoull(req.get_param_value(key));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  Service* svc = &service;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PATCH, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, Accept");
    res.status = 204;
  });
  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(nlohmann::json{{"error", {{"code", "internal"}, {"message", message}}}}.dump(), "application/json");
  });

  srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });
  srv.Get("/graphs", [svc](const httplib::Request&, httplib::Response& res) { send(res, svc->list_graphs()); });
  srv.Post("/graphs", [svc](const httplib::Request& req, httplib::Response& res) { send(res, svc->create_graph(req.body)); });
  srv.Get(R"(/graphs/([^/]+))", [svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->get_graph(req.matches[1]));
  });
  srv.Patch(R"(/graphs/([^/]+))", [svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->patch_graph(req.matches[1], req.body));
  });
  srv.Get(R"(/graphs/([^/]+)/log)", [svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->get_log(req.matches[1], query_u64(req, "since"),
                           std::chrono::milliseconds(query_u64(req, "wait_ms"))));
  });
  srv.Post(R"(/graphs/([^/]+)/suggestions)", [svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->import_suggestions(req.matches[1], req.body));
  });
  srv.Get(R"(/graphs/([^/]+)/suggestions)", [svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->list_suggestions(req.matches[1]));
  });
  srv.Get(R"(/suggestions/([^/]+))", [svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->get_suggestions(req.matches[1]));
  });
  srv.Post(R"(/suggestions/([^/]+)/accept)", [svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->accept_suggestion(req.matches[1], req.body));
  });
  srv.Post(R"(/suggestions/([^/]+)/reject)", [svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->reject_suggestion(req.matches[1], req.body));
  });
  srv.Post(R"(/graphs/([^/]+)/simulate)", [svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->simulate(req.matches[1], req.body));
  });
  srv.Get(R"(/runs/([^/]+))", [svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->get_run(req.matches[1], req.get_header_value("Accept")));
  });
  srv.Post("/evaluate", [svc](const httplib::Request& req, httplib::Response& res) { send(res, svc->evaluate(req.body)); });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    port_ = srv.bind_to_any_port(host);
  } else {
    port_ = srv.bind_to_port(host, port) ? port : -1;
  }
  if (port_ <= 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  return port_;
}

void HttpServer::listen(const std::string& host, int port) {
  port_ = port;
  if (!impl_->server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int port_from_env(int fallback) {
  if (const char* p = std::getenv("KARMATS_PORT"); p && *p) {
    try {
      const int port = std::stoi(p);
      if (port > 0 && port < 65536) return port;
    } catch (const std::exception&) {
    }
  }
  return fallback;
}

}  // namespace karmats
