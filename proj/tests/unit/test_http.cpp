#include "tutorweb/http_server.hpp"

#include "doctest.h"
#include "httplib.h"
#include "support/fixtures.hpp"

#include <thread>

using namespace tutorweb;
using namespace tutorweb::testing;

namespace {

struct LiveServer {
  ServiceFixture fx;
  HttpServer server;
  int port = 0;
  std::jthread runner;

  explicit LiveServer(int questions = 6) : fx(questions), server(*fx.service) {
    port = server.bind("127.0.0.1", 0);
    runner = std::jthread([this] { server.run(); });
    server.wait_until_ready();
  }
  ~LiveServer() { server.stop(); }

  httplib::Client client(const std::string& bearer = {}) const {
    httplib::Client c("127.0.0.1", port);
    if (!bearer.empty()) c.set_bearer_token_auth(bearer);
    return c;
  }

  std::string make_user(const std::string& id, const nlohmann::json& classes = nlohmann::json::array()) {
    auto c = client("admin-secret");
    const auto res = c.Post("/api/admin/users", nlohmann::json{{"id", id}, {"classes", classes}}.dump(),
                            "application/json");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    return nlohmann::json::parse(res->body).at("token");
  }
};

nlohmann::json body(const httplib::Result& r) {
  REQUIRE(r);
  return nlohmann::json::parse(r->body);
}

}  // namespace

TEST_CASE("catalog is public") {
  LiveServer s;
  auto c = s.client();
  const auto res = c.Get("/api/catalog");
  REQUIRE(res);
  CHECK(res->status == 200);
  const auto j = nlohmann::json::parse(res->body);
  CHECK(j["courses"][0]["tutorials"][0]["lectures"][0]["id"] == s.fx.lecture);
  CHECK(j["courses"][0]["tutorials"][0]["lectures"][0]["questions"] == 6);
}

TEST_CASE("a second server on the same port fails") {
  LiveServer s;
  HttpServer other(*s.fx.service);
  CHECK_THROWS_AS(other.bind("127.0.0.1", s.port), PortInUse);
}

TEST_CASE("authentication errors") {
  LiveServer s;
  auto anon = s.client();
  auto res = anon.Post("/api/lecture/" + s.fx.lecture + "/allocation", "", "application/json");
  REQUIRE(res);
  CHECK(res->status == 401);
  CHECK(nlohmann::json::parse(res->body)["error"] == "Unauthorized");
  auto wrong = s.client("not-a-token");
  res = wrong.Get("/api/export/answers");
  REQUIRE(res);
  CHECK(res->status == 401);
}

TEST_CASE("drill round trip over http") {
  LiveServer s;
  const auto token = s.make_user("s1", {{{"class", "c1"}, {"role", "student"}}});
  const auto tutor = s.make_user("t1", {{{"class", "c1"}, {"role", "tutor"}}});
  auto student = s.client(token);

  auto alloc = student.Post("/api/lecture/" + s.fx.lecture + "/allocation", "", "application/json");
  REQUIRE(alloc);
  CHECK(alloc->status == 200);
  const auto payload = nlohmann::json::parse(alloc->body);
  REQUIRE(payload["questions"].size() == 6);
  CHECK(payload["timeoutPolicy"]["enabled"] == true);

  nlohmann::json records = nlohmann::json::array();
  for (int i = 0; i < 6; ++i) {
    const auto& q = payload["questions"][static_cast<std::size_t>(i)];
    records.push_back({{"token", q["token"]},
                       {"clientSeq", i + 1},
                       {"chosenIndex", ServiceFixture::correct_index(q)},
                       {"timeTaken", 4.5},
                       {"timedOut", false},
                       {"clientTimestamp", 1000 + i}});
  }
  const nlohmann::json batch = {{"studentId", "s1"}, {"lectureId", s.fx.lecture}, {"records", records}};
  auto ack = body(student.Post("/api/answers", batch.dump(), "application/json"));
  CHECK(ack["statuses"].size() == 6);
  CHECK(ack["statuses"][0]["status"] == "accepted");
  CHECK(ack["grade"] == 10.0);
  CHECK(ack["answered"] == 6);

  ack = body(student.Post("/api/answers", batch.dump(), "application/json"));
  CHECK(ack["statuses"][5]["status"] == "duplicate");

  // Allocation readback carries the server grade.
  const auto again = body(student.Post("/api/lecture/" + s.fx.lecture + "/allocation", "", "application/json"));
  CHECK(again["answered"] == 6);
  CHECK(again["questions"] == payload["questions"]);

  auto tutor_client = s.client(tutor);
  const auto progress = body(tutor_client.Get("/api/class/c1/progress"));
  REQUIRE(progress["rows"].size() == 1);
  CHECK(progress["rows"][0]["student"] == "s1");
  CHECK(progress["rows"][0]["answered"] == 6);
  CHECK(progress["rows"][0]["grade"] == 10.0);

  auto res = student.Get("/api/class/c1/progress");
  REQUIRE(res);
  CHECK(res->status == 403);
  CHECK(nlohmann::json::parse(res->body)["error"] == "Forbidden");

  auto admin = s.client("admin-secret");
  res = admin.Get("/api/export/answers?lecture=" + s.fx.lecture);
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(std::count(res->body.begin(), res->body.end(), '\n') == 6);
  const auto first = nlohmann::json::parse(res->body.substr(0, res->body.find('\n')));
  for (const char* key : {"student", "lecture", "seq", "question", "chosen", "correct", "timedOut", "timeTaken",
                          "clientTs", "serverTs"}) {
    CHECK(first.contains(key));
  }
  const auto again_export = admin.Get("/api/export/answers?lecture=" + s.fx.lecture);
  CHECK(again_export->body == res->body);
}

TEST_CASE("error statuses") {
  LiveServer s;
  s.fx.store->import_questions(LecturePath::parse("c/t/other"), make_questions(2, 90));
  const auto alice = s.make_user("alice");
  const auto bob = s.make_user("bob");
  auto a = s.client(alice);
  auto b = s.client(bob);
  const auto payload = body(a.Post("/api/lecture/" + s.fx.lecture + "/allocation", "", "application/json"));
  const nlohmann::json stolen = {
      {"studentId", "bob"},
      {"lectureId", s.fx.lecture},
      {"records", {{{"token", payload["questions"][0]["token"]}, {"clientSeq", 1}, {"chosenIndex", 0},
                    {"timeTaken", 3.0}}}}};
  auto res = b.Post("/api/answers", stolen.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 409);
  CHECK(nlohmann::json::parse(res->body)["error"] == "UnknownToken");

  res = a.Post("/api/answers", stolen.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 403);

  res = a.Post("/api/answers", "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(nlohmann::json::parse(res->body)["error"] == "BadRequest");

  res = a.Post("/api/lecture/no.such.thing/allocation", "", "application/json");
  REQUIRE(res);
  CHECK(res->status == 404);
  CHECK(nlohmann::json::parse(res->body)["error"] == "UnknownLecture");

  res = b.Post("/api/admin/users", R"({"id":"x"})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 403);
}

TEST_CASE("concurrent students") {
  LiveServer s(20);
  std::vector<std::string> tokens;
  for (int i = 0; i < 6; ++i) tokens.push_back(s.make_user("s" + std::to_string(i)));
  std::vector<std::jthread> workers;
  std::atomic<int> ok{0};
  for (int i = 0; i < 6; ++i) {
    workers.emplace_back([&, i] {
      auto c = s.client(tokens[static_cast<std::size_t>(i)]);
      const auto alloc = c.Post("/api/lecture/" + s.fx.lecture + "/allocation", "", "application/json");
      if (!alloc || alloc->status != 200) return;
      const auto payload = nlohmann::json::parse(alloc->body);
      for (int seq = 1; seq <= 10; ++seq) {
        const auto& q = payload["questions"][static_cast<std::size_t>(seq)];
        const nlohmann::json batch = {
            {"studentId", "s" + std::to_string(i)},
            {"lectureId", s.fx.lecture},
            {"records", {{{"token", q["token"]}, {"clientSeq", seq}, {"chosenIndex", 0}, {"timeTaken", 3.0}}}}};
        const auto r = c.Post("/api/answers", batch.dump(), "application/json");
        if (r && r->status == 200) ++ok;
      }
    });
  }
  workers.clear();
  CHECK(ok == 60);
  std::uint64_t attempts = 0;
  for (const auto& [q, d] : s.fx.store->difficulty_stats()) attempts += d.attempts;
  CHECK(attempts == 60);
}
