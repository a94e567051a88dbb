#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <doctest.h>

#include "fixtures.hpp"
#include "s2vntm/errors.hpp"
#include "s2vntm/http_api.hpp"
#include "s2vntm/session.hpp"
#include "s2vntm/workbench.hpp"

// after Eigen: the resolver headers define a _res macro
#include <httplib.h>

using namespace s2vntm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("s2vntm_test_service_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const fixture::Planted& planted() {
  static const fixture::Planted p = fixture::small_planted(300);
  return p;
}

json quick_config() {
  return {{"model", {{"hidden_dims", {32, 16}}}},
          {"train", {{"epochs", 3}, {"batch_size", 64}, {"finetune_epochs", 1}}}};
}

void register_planted(Workbench& wb) {
  wb.register_corpus("planted", planted().data.corpus, TokenRules::defaults(), *planted().embeddings);
}

SeedEvent event(long seq, SeedEventKind kind, std::string group, std::string term = "") {
  return {seq, utc_timestamp(), kind, std::move(group), std::move(term)};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(S2VNTM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("session status transitions") {
  const SessionStatus all[] = {SessionStatus::created, SessionStatus::training, SessionStatus::ready,
                               SessionStatus::finetuning, SessionStatus::failed};
  for (auto from : all)
    for (auto to : all) {
      const bool expected = (to == SessionStatus::failed && from != SessionStatus::failed) ||
                            (from == SessionStatus::created && to == SessionStatus::training) ||
                            (from == SessionStatus::training && to == SessionStatus::ready) ||
                            (from == SessionStatus::ready && to == SessionStatus::finetuning) ||
                            (from == SessionStatus::finetuning && to == SessionStatus::ready);
      CHECK(transition_allowed(from, to) == expected);
      SessionRecord r;
      r.status = from;
      if (expected) {
        transition(r, to);
        CHECK(r.status == to);
      } else {
        CHECK_THROWS_AS(transition(r, to), StateConflict);
      }
    }
  for (auto s : all) CHECK(session_status_from(to_string(s)) == s);
  CHECK_THROWS_AS(session_status_from("sleeping"), FormatError);
}

TEST_CASE("seed state replays its event log") {
  SeedState s;
  s.apply(event(1, SeedEventKind::new_group, "alpha"));
  s.apply(event(2, SeedEventKind::add, "alpha", "alphaaa"));
  s.apply(event(3, SeedEventKind::add, "alpha", "alphaab"));
  s.apply(event(4, SeedEventKind::confirm, "alpha", "alphaaa"));
  s.apply(event(5, SeedEventKind::remove, "alpha", "alphaab"));
  REQUIRE(s.groups().size() == 1);
  CHECK(s.groups()[0].second == std::vector<std::string>{"alphaaa"});
  CHECK_THROWS_AS(s.apply(event(6, SeedEventKind::add, "beta", "betaaa")), BadRequest);
  CHECK_THROWS_AS(s.apply(event(6, SeedEventKind::add, "alpha", "alphaaa")), BadRequest);
  CHECK_THROWS_AS(s.apply(event(6, SeedEventKind::remove, "alpha", "alphaaj")), BadRequest);
  CHECK_THROWS_AS(s.check(event(6, SeedEventKind::new_group, "alpha")), BadRequest);
  CHECK(s.has_group("alpha"));

  const SeedSets resolved = s.resolve(planted().data.corpus.vocabulary);
  CHECK(resolved.groups[0].keywords[0] == *planted().data.corpus.vocabulary.find("alphaaa"));
  s.apply(event(6, SeedEventKind::add, "alpha", "nonword"));
  CHECK_THROWS_AS(s.resolve(planted().data.corpus.vocabulary), VocabularyMismatch);
  s.apply(event(7, SeedEventKind::remove_group, "alpha"));
  CHECK_FALSE(s.has_group("alpha"));

  const SeedEvent e = event(9, SeedEventKind::remove, "g", "t");
  const SeedEvent back = SeedEvent::from_json(e.to_json());
  CHECK(back.seq == 9);
  CHECK(back.kind == SeedEventKind::remove);
  CHECK(back.term == "t");
}

TEST_CASE("session store round trips") {
  const auto dir = scratch_dir("store");
  SessionStore store(dir / "s1");
  SessionRecord r;
  r.id = "s1";
  r.corpus_id = "c";
  r.status = SessionStatus::ready;
  r.created_at = utc_timestamp();
  store.save_record(r);
  CHECK(store.load_record().to_json() == r.to_json());
  store.append_event(event(1, SeedEventKind::new_group, "a"));
  store.append_event(event(2, SeedEventKind::add, "a", "x"));
  CHECK(store.load_events().size() == 2);
  store.append_telemetry({{"epoch", 1}});
  CHECK(store.load_telemetry().at(0).at("epoch") == 1);
  CHECK_FALSE(store.load_metrics());
  fs::remove_all(dir);
}

TEST_CASE("workbench lifecycle") {
  const auto root = scratch_dir("workbench");
  std::string id;
  {
    Workbench wb({root, true});
    register_planted(wb);
    CHECK(wb.list_corpora().dump().find("planted") != std::string::npos);

    const json created = wb.create_session({{"corpus_id", "planted"}, {"config", quick_config()}});
    id = created.at("session_id");
    CHECK(created.at("status") == "training");
    CHECK_THROWS_AS(wb.create_session({{"corpus_id", "missing"}}), NotFound);
    CHECK_THROWS_AS(wb.create_session({{"config", quick_config()}}), BadRequest);
    CHECK_THROWS_AS(wb.create_session({{"corpus_id", "planted"},
                                       {"seeds", {{{"label", "a"}, {"keywords", {"nonword"}}}}}}),
                    VocabularyMismatch);

    // edits are refused while the first fit runs
    if (wb.status(id) == SessionStatus::training)
      CHECK_THROWS_AS(wb.edit_keywords(id, {{"add", json::array({json::array({"alpha", "alphaaf"})})}}), StateConflict);

    REQUIRE(wb.wait_idle(id, std::chrono::minutes(5)));
    const json info = wb.get_session(id);
    CHECK(info.at("status") == "ready");
    CHECK(info.at("has_model") == true);
    CHECK(info.at("telemetry_length") == 3);
    CHECK(info.at("metrics").contains("accuracy"));

    const json topics = wb.topics(id, 5);
    CHECK(topics.at("topics").size() == 4);
    CHECK(topics.at("topics")[0].at("words").size() == 5);
    const json kw = wb.keywords(id);
    CHECK(kw.dump().find("alpha") != std::string::npos);

    CHECK_THROWS_AS(wb.edit_keywords(id, {{"bogus", 1}}), BadRequest);
    CHECK_THROWS_AS(wb.edit_keywords(id, {{"add", json::array({json::array({"alpha", "nonword"})})}}), VocabularyMismatch);
    CHECK_THROWS_AS(wb.edit_keywords(id, {{"add", json::array({json::array({"nogroup", "alphaaf"})})}}), BadRequest);
    const long before = info.at("history_length");
    const json edited = wb.edit_keywords(id, {{"add", json::array({json::array({"alpha", "alphaaf"})})}});
    CHECK(edited.at("events_added") == 1);
    CHECK(edited.at("history_length") == before + 1);

    const json ft = wb.finetune(id);
    CHECK(ft.at("status") == "finetuning");
    REQUIRE(wb.wait_idle(id, std::chrono::minutes(5)));
    CHECK(wb.status(id) == SessionStatus::ready);

    const json cls = wb.classify(id, {{"texts", {"alphaaa alphaaa alphaab", "zzzz"}}});
    REQUIRE(cls.at("results").size() == 2);
    CHECK(cls.at("results")[0].at("known_tokens") == 3);
    CHECK(cls.at("results")[1].at("known_tokens") == 0);
    CHECK_THROWS_AS(wb.classify(id, {{"texts", json::array()}}), BadRequest);
    CHECK_THROWS_AS(wb.get_session("nope"), NotFound);
  }
  // a fresh workbench reloads the persisted session
  {
    Workbench wb({root, false});
    const json info = wb.get_session(id);
    CHECK(info.at("status") == "ready");
    CHECK(info.at("has_model") == true);
    CHECK(wb.keywords(id).dump().find("alphaaf") != std::string::npos);
    CHECK(wb.list_sessions().dump().find(id) != std::string::npos);
  }
  fs::remove_all(root);
}

TEST_CASE("http status mapping") {
  CHECK(http_status_for(NotFound("x")) == 404);
  CHECK(http_status_for(BadRequest("x")) == 400);
  CHECK(http_status_for(ConfigError("x")) == 400);
  CHECK(http_status_for(StateConflict("x")) == 409);
  CHECK(http_status_for(VocabularyMismatch("x")) == 422);
  CHECK(http_status_for(InvalidSeeds("x")) == 422);
  CHECK(http_status_for(ClassEmpty("x")) == 422);
  CHECK(http_status_for(std::runtime_error("x")) == 500);
}

TEST_CASE("http endpoints") {
  const auto root = scratch_dir("http");
  Workbench wb({root, true});
  register_planted(wb);
  HttpServer server(wb);
  const int port = server.bind("127.0.0.1", 0);
  server.start();
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(60, 0);

  auto post = [&](const std::string& path, const json& body) {
    return cli.Post(path.c_str(), body.dump(), "application/json");
  };

  auto res = cli.Get("/corpora");
  REQUIRE(res);
  CHECK(res->status == 200);

  res = cli.Get("/sessions/none");
  REQUIRE(res);
  CHECK(res->status == 404);
  CHECK(json::parse(res->body).at("status") == 404);

  res = cli.Post("/sessions", "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = post("/sessions", {{"corpus_id", "planted"}, {"config", {{"model", {{"bogus", 1}}}}}});
  REQUIRE(res);
  CHECK(res->status == 400);

  res = post("/sessions", {{"corpus_id", "planted"}, {"seeds", {{{"label", "a"}, {"keywords", {"nonword"}}}}}});
  REQUIRE(res);
  CHECK(res->status == 422);

  res = post("/sessions", {{"corpus_id", "planted"}, {"config", quick_config()}});
  REQUIRE(res);
  CHECK(res->status == 201);
  const std::string id = json::parse(res->body).at("session_id");

  res = post("/sessions/" + id + "/finetune", json::object());
  REQUIRE(res);
  if (wb.status(id) == SessionStatus::training) CHECK(res->status == 409);

  REQUIRE(wb.wait_idle(id, std::chrono::minutes(5)));
  res = cli.Get(("/sessions/" + id + "/topics?top=3").c_str());
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body).at("topics")[0].at("words").size() == 3);
  res = cli.Get(("/sessions/" + id + "/topics?top=x").c_str());
  REQUIRE(res);
  CHECK(res->status == 400);

  res = post("/sessions/" + id + "/keywords", {{"add", json::array({json::array({"beta", "betaaf"})})}});
  REQUIRE(res);
  CHECK(res->status == 200);
  res = post("/sessions/" + id + "/keywords", {{"add", json::array({json::array({"beta", "nonword"})})}});
  REQUIRE(res);
  CHECK(res->status == 422);

  res = post("/sessions/" + id + "/finetune", json::object());
  REQUIRE(res);
  CHECK(res->status == 202);
  REQUIRE(wb.wait_idle(id, std::chrono::minutes(5)));

  res = post("/sessions/" + id + "/classify", {{"texts", {"betaaa betaab"}}});
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body).at("results").size() == 1);

  res = cli.Get("/nowhere");
  REQUIRE(res);
  CHECK(res->status == 404);

  server.stop();
  fs::remove_all(root);
}

TEST_CASE("cli exit codes") {
  CHECK(run_cli("") == 2);
  CHECK(run_cli("train --bogus") == 2);
  CHECK(run_cli("--help") == 0);
  const auto dir = scratch_dir("cli");
  CHECK(run_cli("planted --out " + (dir / "c").string() + " --documents 200") == 0);
  {
    std::ofstream bad(dir / "bad.conf");
    bad << "model.bogus = 1\n";
  }
  CHECK(run_cli("train --corpus " + (dir / "c").string() + " --config " + (dir / "bad.conf").string() +
                " --out " + (dir / "m.bin").string()) == 1);
  fs::remove_all(dir);
}
