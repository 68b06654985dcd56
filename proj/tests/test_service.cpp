#include <gtest/gtest.h>

#include <fstream>

#include "service_fixture.hpp"
#include "webnav/error.hpp"

namespace webnav {
namespace {

using nlohmann::json;
using testing::FakeClock;
using testing::ServiceDataset;
using testing::ServiceGraph;
using testing::TempDir;
using testing::TestOptions;

struct Harness {
  NavGraph graph = ServiceGraph();
  FakeClock clock;
  TempDir dir;
  std::unique_ptr<SessionManager> manager;

  Harness() { Restart(); }
  void Restart() {
    manager.reset();
    manager = std::make_unique<SessionManager>(
        graph, std::map<std::string, DatasetSplits>{{"small", ServiceDataset(graph)}},
        dir.path(), TestOptions(clock));
  }
  const Example& Current(const std::string& id) {
    const json obs = manager->GetObservation(id);
    for (const auto& ex : ServiceDataset(graph).test) {
      if (ex.query == obs["query"]) return Find(ex.query);
    }
    throw std::runtime_error("query not found");
  }
  const Example& Find(const std::string& query) {
    static const DatasetSplits data = ServiceDataset(ServiceGraph());
    for (const auto& ex : data.test) {
      if (ex.query == query) return ex;
    }
    throw std::runtime_error("query not found");
  }
  // Peeks and moves along the reference path, then stops.
  json Solve(const std::string& id) {
    const Example ex = Current(id);
    for (std::size_t i = 1; i < ex.path.size(); ++i) {
      const auto edges = graph.Edges(ex.path[i - 1]);
      const std::size_t e = std::find(edges.begin(), edges.end(), ex.path[i]) - edges.begin();
      manager->Act(id, {{"type", "peek"}, {"edge", e}});
      manager->Act(id, {{"type", "move"}, {"edge", e}});
    }
    return manager->Act(id, {{"type", "stop"}});
  }
};

template <typename Fn>
std::string ServiceCode(Fn&& fn) {
  try {
    fn();
  } catch (const ServiceError& e) {
    return e.code();
  } catch (const EnvError& e) {
    return std::string(EnvErrorName(e.code()));
  }
  return "";
}

TEST(Service, DefaultLimits) {
  Harness h;
  const auto id = h.manager->CreateSession("small", {});
  std::ifstream in(h.manager->TranscriptPath(id));
  std::string first;
  std::getline(in, first);
  const json create = json::parse(first);
  EXPECT_EQ(create["limits"], json({{"max_queries", 20},
                                    {"time_budget_seconds", 7200},
                                    {"max_peeks", 4},
                                    {"max_hops", 4}}));
  EXPECT_EQ(create["graph_checksum"], ToHex(h.graph.Checksum()));
  const json obs = h.manager->GetObservation(id);
  EXPECT_EQ(obs["node"], 0);
  EXPECT_TRUE(obs["peeked"].empty());
  EXPECT_EQ(obs["trials_total"], 4);  // only four test queries
  EXPECT_EQ(obs["remaining_peeks"], 4);
  EXPECT_EQ(obs["max_hops"], 4);
  EXPECT_EQ(obs["remaining_seconds"], 7200.0);
  EXPECT_EQ(obs["links"].size(), 6u);
  EXPECT_EQ(obs["links"][4], "Dogs");
}

TEST(Service, UnknownDatasetAndSession) {
  Harness h;
  EXPECT_EQ(ServiceCode([&] { h.manager->CreateSession("nope", {}); }), "UnknownDataset");
  EXPECT_EQ(ServiceCode([&] { h.manager->GetObservation("nope"); }), "UnknownSession");
  EXPECT_EQ(ServiceCode([&] { h.manager->Summary("nope"); }), "UnknownSession");
  SessionLimits bad;
  bad.max_queries = 0;
  EXPECT_EQ(ServiceCode([&] { h.manager->CreateSession("small", bad); }), "BadRequest");
  try {
    h.manager->CreateSession("nope", {});
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 404);
  }
}

TEST(Service, OneQuerySessionCompletesAfterOneTrial) {
  Harness h;
  SessionLimits limits;
  limits.max_queries = 1;
  const auto id = h.manager->CreateSession("small", limits);
  const json result = h.Solve(id);
  EXPECT_EQ(result["reward"], 1);
  EXPECT_EQ(result["outcome"], "success");
  EXPECT_EQ(result["trial_complete"], true);
  EXPECT_EQ(result["session_complete"], true);
  EXPECT_FALSE(result.contains("observation"));
  EXPECT_EQ(ServiceCode([&] { h.manager->GetObservation(id); }), "SessionClosed");
  EXPECT_EQ(ServiceCode([&] { h.manager->Act(id, {{"type", "stop"}}); }), "SessionClosed");
  const json summary = h.manager->Summary(id);
  EXPECT_EQ(summary["status"], "complete");
  EXPECT_EQ(summary["trials"], 1);
  EXPECT_EQ(summary["average_reward"], 1.0);
}

TEST(Service, SessionsAreIndependent) {
  Harness h;
  const auto a = h.manager->CreateSession("small", {});
  const auto b = h.manager->CreateSession("small", {});
  EXPECT_NE(a, b);
  h.manager->Act(a, {{"type", "peek"}, {"edge", 1}});
  h.manager->Act(a, {{"type", "move"}, {"edge", 1}});
  EXPECT_EQ(h.manager->GetObservation(a)["node"], 2);
  EXPECT_EQ(h.manager->GetObservation(b)["node"], 0);
  EXPECT_TRUE(h.manager->GetObservation(b)["peeked"].empty());
}

TEST(Service, PeekBudgetAndEnvironmentErrors) {
  Harness h;
  const auto id = h.manager->CreateSession("small", {});
  EXPECT_EQ(ServiceCode([&] { h.manager->Act(id, {{"type", "move"}, {"edge", 0}}); }),
            "MoveUnexplored");
  for (int e = 0; e < 4; ++e) h.manager->Act(id, {{"type", "peek"}, {"edge", e}});
  // Re-peeking a known edge is free.
  EXPECT_EQ(ServiceCode([&] { h.manager->Act(id, {{"type", "peek"}, {"edge", 2}}); }), "");
  EXPECT_EQ(ServiceCode([&] { h.manager->Act(id, {{"type", "peek"}, {"edge", 4}}); }),
            "BudgetExceeded");
  EXPECT_EQ(ServiceCode([&] { h.manager->Act(id, {{"type", "peek"}, {"edge", 9}}); }),
            "IndexError");
  EXPECT_EQ(ServiceCode([&] { h.manager->Act(id, {{"type", "peek"}, {"edge", -1}}); }),
            "IndexError");
  EXPECT_EQ(ServiceCode([&] { h.manager->Act(id, {{"type", "fly"}}); }), "BadRequest");
  EXPECT_EQ(ServiceCode([&] { h.manager->Act(id, {{"type", "move"}}); }), "BadRequest");
  EXPECT_EQ(ServiceCode([&] { h.manager->Act(id, json::array()); }), "BadRequest");
  const json obs = h.manager->GetObservation(id);
  EXPECT_EQ(obs["remaining_peeks"], 0);
  ASSERT_EQ(obs["peeked"].size(), 4u);
  EXPECT_EQ(obs["peeked"][1]["title"], "Plants");
  EXPECT_EQ(obs["peeked"][1]["text"], h.graph.GetNode(2).clean_text);
}

TEST(Service, GiveUpRecordsZeroReward) {
  Harness h;
  const auto id = h.manager->CreateSession("small", {});
  const json r = h.manager->Act(id, {{"type", "giveup"}});
  EXPECT_EQ(r["outcome"], "gave-up");
  EXPECT_EQ(r["reward"], 0);
  EXPECT_EQ(r["trial_complete"], true);
  EXPECT_EQ(r["session_complete"], false);
  EXPECT_EQ(r["observation"]["trial"], 1);
}

TEST(Service, TimeoutExpiresTheSession) {
  Harness h;
  SessionLimits limits;
  limits.time_budget_seconds = 60;
  const auto id = h.manager->CreateSession("small", limits);
  h.Solve(id);
  h.clock.Advance(30'500);
  EXPECT_EQ(h.manager->GetObservation(id)["remaining_seconds"], 29.5);
  h.clock.Advance(29'500);
  EXPECT_EQ(ServiceCode([&] { h.manager->GetObservation(id); }), "SessionExpired");
  EXPECT_EQ(ServiceCode([&] { h.manager->Act(id, {{"type", "stop"}}); }), "SessionExpired");
  const json summary = h.manager->Summary(id);
  EXPECT_EQ(summary["status"], "expired");
  EXPECT_EQ(summary["trials"], 2);
  EXPECT_EQ(summary["successes"], 1);
  EXPECT_EQ(summary["average_reward"], 0.5);
  EXPECT_EQ(summary["records"][1]["outcome"], "timeout");
}

TEST(Service, SummaryConventions) {
  Harness h;
  const auto id = h.manager->CreateSession("small", {});
  json s = h.manager->Summary(id);
  EXPECT_EQ(s["trials"], 0);
  EXPECT_EQ(s["average_reward"], 0.0);
  EXPECT_EQ(s["status"], "live");
  h.Solve(id);
  h.manager->Act(id, {{"type", "stop"}});  // stop at the start page: wrong
  h.Solve(id);
  h.manager->Act(id, {{"type", "giveup"}});
  s = h.manager->Summary(id);
  EXPECT_EQ(s["trials"], 4);
  EXPECT_EQ(s["successes"], 2);
  EXPECT_EQ(s["average_reward"], 0.5);
  EXPECT_EQ(s["status"], "complete");
  std::vector<std::string> outcomes;
  for (const auto& r : s["records"]) outcomes.push_back(r["outcome"]);
  EXPECT_EQ(outcomes, (std::vector<std::string>{"success", "failure", "success", "gave-up"}));
  std::set<std::size_t> seen;
  for (const auto& r : s["records"]) seen.insert(r["query_index"].get<std::size_t>());
  EXPECT_EQ(seen.size(), 4u);
}

// Walks the transcript with bare episodes and tallies the outcomes.
json OracleReplay(const NavGraph& graph, const DatasetSplits& data, const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::vector<std::size_t> queries;
  EnvConfig env;
  std::optional<Episode> episode;
  std::size_t cursor = 0;
  json outcomes = json::array();
  auto next = [&] {
    if (cursor < queries.size()) {
      episode.emplace(graph, data.test[queries[cursor]], env);
    } else {
      episode.reset();
    }
  };
  while (std::getline(in, line)) {
    const json r = json::parse(line);
    if (r["event"] == "create") {
      queries = r["queries"].get<std::vector<std::size_t>>();
      env.max_peeks = r["limits"]["max_peeks"];
      env.max_hops = r["limits"]["max_hops"];
      next();
    } else if (r["event"] == "timeout") {
      if (episode) outcomes.push_back("timeout");
      episode.reset();
    } else {
      const std::string type = r["type"];
      try {
        if (type == "peek") episode->Peek(r["edge"]);
        if (type == "move") episode->Move(r["edge"]);
        if (type == "stop") episode->Stop();
        if (type == "giveup") episode->GiveUp();
      } catch (const EnvError& e) {
        EXPECT_EQ(r["error"], std::string(EnvErrorName(e.code())));
        continue;
      }
      EXPECT_FALSE(r.contains("error"));
      if (episode->Finished()) {
        std::string outcome = "failure";
        if (episode->GetOutcome() == Outcome::kGaveUp) outcome = "gave-up";
        if (episode->GetOutcome() == Outcome::kStopped && episode->Reward() == 1) {
          outcome = "success";
        }
        EXPECT_EQ(r["outcome"], outcome);
        outcomes.push_back(outcome);
        ++cursor;
        next();
      }
    }
  }
  return outcomes;
}

TEST(Service, TranscriptReplayAndRestart) {
  Harness h;
  SessionLimits limits;
  limits.time_budget_seconds = 100;
  const auto a = h.manager->CreateSession("small", limits);
  const auto b = h.manager->CreateSession("small", {});
  h.Solve(a);
  h.clock.Advance(1234);
  ServiceCode([&] { h.manager->Act(a, {{"type", "move"}, {"edge", 3}}); });
  ServiceCode([&] { h.manager->Act(a, {{"type", "peek"}, {"edge", 40}}); });
  h.manager->Act(a, {{"type", "peek"}, {"edge", 3}});
  h.manager->Act(a, {{"type", "giveup"}});
  h.manager->Act(b, {{"type", "stop"}});
  h.Solve(b);
  h.manager->Act(a, {{"type", "peek"}, {"edge", 0}});
  h.clock.Advance(100'000);
  const json sa = h.manager->Summary(a);
  const json sb = h.manager->Summary(b);
  EXPECT_EQ(sa["status"], "expired");
  EXPECT_EQ(sb["status"], "live");

  const DatasetSplits data = ServiceDataset(h.graph);
  for (const auto& [id, summary] : {std::pair{a, sa}, std::pair{b, sb}}) {
    const auto path = h.manager->TranscriptPath(id).string();
    json outcomes = json::array();
    for (const auto& r : summary["records"]) outcomes.push_back(r["outcome"]);
    EXPECT_EQ(OracleReplay(h.graph, data, path), outcomes);
    EXPECT_EQ(ReplayTranscriptSummary(h.graph, data, path).dump(), summary.dump());
  }

  h.Restart();
  EXPECT_EQ(h.manager->SessionIds().size(), 2u);
  EXPECT_EQ(h.manager->Summary(a).dump(), sa.dump());
  EXPECT_EQ(h.manager->Summary(b).dump(), sb.dump());
  // The restored live session keeps going and new ids do not collide.
  h.Solve(b);
  const auto c = h.manager->CreateSession("small", {});
  EXPECT_NE(c, a);
  EXPECT_NE(c, b);
}

TEST(Service, CorruptTranscriptIsSkippedOnRestart) {
  Harness h;
  const auto a = h.manager->CreateSession("small", {});
  h.Solve(a);
  {
    std::ofstream out(h.manager->TranscriptPath(a), std::ios::app);
    out << R"({"event":"action","type":"stop","at_ms":1,"outcome":"success"})" << "\n";
  }
  std::ofstream(h.dir / "junk.jsonl") << "not json\n";
  const DatasetSplits data = ServiceDataset(h.graph);
  EXPECT_THROW(ReplayTranscriptSummary(h.graph, data, h.manager->TranscriptPath(a)), DataError);
  h.Restart();
  EXPECT_TRUE(h.manager->SessionIds().empty());
}

// Every node text in an observation belongs to the current node or a peeked edge.
void ExpectNoLeak(const NavGraph& graph, const json& obs) {
  std::set<NodeId> allowed{obs["node"].get<NodeId>()};
  const auto edges = graph.Edges(obs["node"]);
  for (const auto& p : obs["peeked"]) allowed.insert(edges[p["edge"].get<std::size_t>()]);
  const std::string wire = obs.dump();
  for (NodeId n = 0; n < graph.NodeCount(); ++n) {
    if (allowed.count(n)) continue;
    EXPECT_EQ(wire.find(graph.GetNode(n).clean_text), std::string::npos) << "node " << n;
  }
}

TEST(Service, ObservationsNeverLeakUnpeekedText) {
  Harness h;
  std::mt19937_64 rng(5);
  for (int round = 0; round < 20; ++round) {
    const auto id = h.manager->CreateSession("small", {});
    for (int step = 0; step < 40; ++step) {
      const json obs = h.manager->GetObservation(id);
      ExpectNoLeak(h.graph, obs);
      const auto pick = UniformIndex(rng, 10);
      const int edge = static_cast<int>(UniformIndex(rng, 7));
      json action = {{"type", pick < 5 ? "peek" : pick < 8 ? "move" : pick < 9 ? "stop" : "giveup"}};
      if (pick < 8) action["edge"] = edge;
      json r;
      try {
        r = h.manager->Act(id, action);
      } catch (const EnvError&) {
        continue;
      }
      if (r["session_complete"] == true) break;
      ExpectNoLeak(h.graph, r["observation"]);
    }
  }
}

TEST(LoadDatasetDirectory, SkipsForeignGraphs) {
  const NavGraph graph = ServiceGraph();
  TempDir dir;
  DatasetSplits ok = ServiceDataset(graph);
  WriteDataset(dir / "ok", ok);
  DatasetSplits foreign = ok;
  foreign.meta.graph_checksum ^= 1;
  WriteDataset(dir / "foreign", foreign);
  std::filesystem::create_directories(dir / "empty");
  const auto loaded = LoadDatasetDirectory(dir.path(), graph);
  ASSERT_EQ(loaded.size(), 1u);
  EXPECT_EQ(loaded.at("ok").test, ok.test);
}

}  // namespace
}  // namespace webnav
