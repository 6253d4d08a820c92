#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "karmats/document.hpp"
#include "karmats/editlog.hpp"
#include "karmats/http_server.hpp"

using namespace karmats;
using nlohmann::json;

namespace {

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server_ = std::make_unique<HttpServer>(service_);
    port_ = server_->start("127.0.0.1", 0);
  }
  void TearDown() override { server_->stop(); }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(10, 0);
    return c;
  }

  std::string create_demo() {
    DscpGraph g;
    g = add_variable(g, VariableSpec::categorical("activities", {"rest", "work"}));
    g = add_variable(g, VariableSpec::continuous("temperature", -30, 50, 20));
    g = add_edge(g, {0, 1, 1});
    g = set_noise(g, 1, GaussianNoise{0, 1});
    GraphDocument d;
    d.graph = g;
    auto res = client().Post("/graphs", save_document(d), "application/json");
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 201);
    return json::parse(res->body)["id"].get<std::string>();
  }

  Service service_;
  std::unique_ptr<HttpServer> server_;
  int port_ = 0;
};

std::string add_edge_patch(std::uint64_t base, int lag) {
  return json{{"base_version", base},
              {"event", event_to_json(edits::add_edge(Actor::expert("web"), {1, 1, lag}))}}
      .dump();
}

}  // namespace

TEST_F(HttpTest, HealthAndCors) {
  auto c = client();
  auto res = c.Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  auto pre = c.Options("/graphs");
  ASSERT_TRUE(pre);
  EXPECT_EQ(pre->status, 204);
  EXPECT_NE(pre->get_header_value("Access-Control-Allow-Methods").find("PATCH"), std::string::npos);
}

TEST_F(HttpTest, CrudRoundTrip) {
  const auto id = create_demo();
  auto c = client();
  auto got = c.Get(("/graphs/" + id).c_str());
  ASSERT_TRUE(got);
  EXPECT_EQ(got->status, 200);
  const auto doc = load_document(json::parse(got->body)["document"].dump());
  EXPECT_EQ(doc.graph.variables[0].categories, (std::vector<std::string>{"rest", "work"}));
  auto patched = c.Patch(("/graphs/" + id).c_str(), add_edge_patch(1, 1), "application/json");
  ASSERT_TRUE(patched);
  EXPECT_EQ(patched->status, 200);
  EXPECT_EQ(json::parse(patched->body)["version"], 2);
  auto missing = c.Get("/graphs/zzz");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  auto list = c.Get("/graphs");
  EXPECT_EQ(json::parse(list->body)["graphs"].size(), 1u);
}

TEST_F(HttpTest, ConcurrentWritersOneWins) {
  const auto id = create_demo();
  std::atomic<int> ok{0}, conflict{0};
  std::vector<std::thread> writers;
  for (int k = 0; k < 2; ++k) {
    writers.emplace_back([&, k] {
      auto c = client();
      auto res = c.Patch(("/graphs/" + id).c_str(), add_edge_patch(1, k + 1), "application/json");
      ASSERT_TRUE(res);
      if (res->status == 200) ++ok;
      if (res->status == 409) {
        ++conflict;
        EXPECT_EQ(json::parse(res->body)["error"]["current_version"], 2);
      }
    });
  }
  for (auto& t : writers) t.join();
  EXPECT_EQ(ok.load(), 1);
  EXPECT_EQ(conflict.load(), 1);
  auto log = client().Get(("/graphs/" + id + "/log?since=0").c_str());
  const auto events = json::parse(log->body)["events"];
  EXPECT_EQ(events.back()["version"], 2);
}

TEST_F(HttpTest, SuggestionAcceptRecordsAlgorithmProvenance) {
  const auto id = create_demo();
  auto c = client();
  const json matrix{{"variables", {"activities", "temperature"}},
                    {"matrix", {{{0, 0}, {0, 0.8}}, {{0, 0}, {0, 0.3}}}}};
  auto imported = c.Post(("/graphs/" + id + "/suggestions").c_str(),
                         json{{"algorithm", "pcmci"}, {"format", "lag-matrix"}, {"data", matrix}}.dump(),
                         "application/json");
  ASSERT_TRUE(imported);
  ASSERT_EQ(imported->status, 201) << imported->body;
  const auto set = json::parse(imported->body);
  ASSERT_EQ(set["suggestions"].size(), 2u);
  const auto sid = set["id"].get<std::string>();
  auto accepted = c.Post(("/suggestions/" + sid + "/accept").c_str(), R"({"index": 1})", "application/json");
  ASSERT_EQ(accepted->status, 200) << accepted->body;
  auto rejected = c.Post(("/suggestions/" + sid + "/reject").c_str(), R"({"index": 0})", "application/json");
  EXPECT_EQ(rejected->status, 200);
  const auto doc = load_document(json::parse(c.Get(("/graphs/" + id).c_str())->body)["document"].dump()).graph;
  const auto* e = doc.find_edge(1, 1, 1);
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->provenance, Provenance::algorithm("pcmci"));
  auto listed = c.Get(("/graphs/" + id + "/suggestions").c_str());
  EXPECT_EQ(json::parse(listed->body)["suggestion_sets"][0]["suggestions"][1]["status"], "accepted");
}

TEST_F(HttpTest, SimulateThenFetchCsv) {
  const auto id = create_demo();
  auto c = client();
  auto started = c.Post(("/graphs/" + id + "/simulate").c_str(), R"({"length": 25, "seed": 1})", "application/json");
  ASSERT_EQ(started->status, 202);
  const auto rid = json::parse(started->body)["run_id"].get<std::string>();
  httplib::Result res;
  for (int i = 0; i < 200; ++i) {
    res = c.Get(("/runs/" + rid).c_str(), {{"Accept", "text/csv"}});
    if (res && res->status != 202) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(res->body.rfind("activities,temperature\n", 0), 0u);
  EXPECT_EQ(std::count(res->body.begin(), res->body.end(), '\n'), 26);
}

TEST_F(HttpTest, LongPollOverHttp) {
  const auto id = create_demo();
  const auto last = json::parse(client().Get(("/graphs/" + id + "/log").c_str())->body)["last_seq"].get<int>();
  std::thread writer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    client().Patch(("/graphs/" + id).c_str(), add_edge_patch(1, 2), "application/json");
  });
  auto res = client().Get(("/graphs/" + id + "/log?since=" + std::to_string(last) + "&wait_ms=5000").c_str());
  writer.join();
  ASSERT_TRUE(res);
  EXPECT_EQ(json::parse(res->body)["events"].size(), 1u);
}

TEST_F(HttpTest, EvaluateEndpoint) {
  const auto id = create_demo();
  auto res = client().Post("/evaluate", json{{"truth", id}, {"estimate", id}}.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["f1"], 1.0);
}
