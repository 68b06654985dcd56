#include "webnav/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "webnav/environment.hpp"
#include "webnav/error.hpp"
#include "webnav/log.hpp"

namespace webnav {
namespace {

using Json = nlohmann::ordered_json;

// Runs fn(i) for i in [0, n) over `threads` workers. The first exception is
// rethrown after all workers stop.
template <typename Fn>
void ParallelFor(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  const int count = static_cast<int>(std::min<std::size_t>(threads, n));
  for (int w = 0; w < count; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

double Fraction(const std::vector<ExampleOutcome>& outcomes) {
  if (outcomes.empty()) return 0.0;
  std::size_t wins = 0;
  for (const auto& o : outcomes) wins += o.success;
  return static_cast<double>(wins) / static_cast<double>(outcomes.size());
}

EvalReport MakeReport(const EvalSettings& s, std::string metric) {
  EvalReport r;
  r.dataset = s.dataset_id;
  r.model = s.model_id;
  r.metric = std::move(metric);
  r.max_hops = s.max_hops;
  r.query_size = s.query_size;
  r.width = s.width;
  return r;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace

std::vector<Trace> AgentNavigator::Navigate(const Example& example, int width,
                                            int max_hops) const {
  return BeamSearch(agent_, world_, example.query, width, max_hops);
}

EvalReport AverageReward(const Navigator& navigator, const NavGraph& graph,
                         const std::vector<Example>& examples,
                         const EvalSettings& settings) {
  const auto begin = std::chrono::steady_clock::now();
  EvalReport report = MakeReport(settings, "reward");
  report.outcomes.resize(examples.size());
  EnvConfig env;
  env.max_peeks = settings.width;
  env.max_hops = settings.max_hops;
  env.query_size = settings.query_size;
  env.allow_blind_moves = true;

  ParallelFor(examples.size(), settings.threads, [&](std::size_t i) {
    const Example& example = examples[i];
    const auto traces =
        navigator.Navigate(example, settings.width, settings.max_hops);
    ExampleOutcome& out = report.outcomes[i];
    out.index = i;
    out.target = example.target;
    out.end_node = graph.Start();
    if (traces.empty()) return;
    const Trace& top = traces.front();
    Episode episode(graph, example, env);
    for (std::size_t action : top.actions) {
      if (action == kStopAction) {
        out.success = episode.Stop() == 1;
        out.stopped = true;
      } else {
        episode.Move(action);
      }
    }
    out.end_node = episode.Current();
  });
  report.value = Fraction(report.outcomes);
  report.wall_time_seconds = Seconds(begin);
  return report;
}

EvalReport AgentRecallAtK(const Navigator& navigator,
                          const std::vector<Example>& examples, int k,
                          const EvalSettings& settings) {
  if (k < 1) throw DataError("recall: K must be >= 1");
  const auto begin = std::chrono::steady_clock::now();
  EvalReport report = MakeReport(settings, "recall");
  report.k = k;
  report.width = k;
  report.outcomes.resize(examples.size());
  ParallelFor(examples.size(), settings.threads, [&](std::size_t i) {
    const auto traces = navigator.Navigate(examples[i], k, settings.max_hops);
    ExampleOutcome& out = report.outcomes[i];
    out.index = i;
    out.target = examples[i].target;
    if (!traces.empty()) {
      out.end_node = traces.front().End();
      out.stopped = traces.front().stopped;
    }
    for (const auto& t : traces) {
      if (t.End() == examples[i].target) out.success = true;
    }
  });
  report.value = Fraction(report.outcomes);
  report.wall_time_seconds = Seconds(begin);
  return report;
}

EvalReport SearchRecallAtK(const InvertedIndex& index,
                           const std::vector<Example>& examples, int k,
                           const EvalSettings& settings) {
  if (k < 1) throw DataError("recall: K must be >= 1");
  const auto begin = std::chrono::steady_clock::now();
  EvalReport report = MakeReport(settings, "recall");
  report.k = k;
  report.width = 0;
  report.outcomes.resize(examples.size());
  ParallelFor(examples.size(), settings.threads, [&](std::size_t i) {
    ExampleOutcome& out = report.outcomes[i];
    out.index = i;
    out.target = examples[i].target;
    const auto hits = Search(index, examples[i].query, k);
    if (!hits.empty()) out.end_node = hits.front().node;
    for (const auto& h : hits) {
      if (h.node == examples[i].target) out.success = true;
    }
  });
  report.value = Fraction(report.outcomes);
  report.wall_time_seconds = Seconds(begin);
  return report;
}

void RequireGraphChecksum(const NavGraph& graph, std::uint64_t expected,
                          const std::string& what) {
  const std::uint64_t actual = graph.Checksum();
  if (actual != expected) {
    throw DataError(what + " was built for graph " + ToHex(expected) +
                    " but the loaded graph is " + ToHex(actual));
  }
}

std::string ReportToJson(const EvalReport& report, bool include_wall_time) {
  Json j;
  j["dataset"] = report.dataset;
  j["model"] = report.model;
  j["metric"] = report.metric;
  j["value"] = report.value;
  j["config"] = {{"nh", report.max_hops},
                 {"nq", report.query_size},
                 {"width", report.width},
                 {"k", report.k}};
  Json outcomes = Json::array();
  for (const auto& o : report.outcomes) {
    outcomes.push_back({{"index", o.index},
                        {"target", o.target},
                        {"end", o.end_node},
                        {"stopped", o.stopped},
                        {"success", o.success}});
  }
  j["outcomes"] = std::move(outcomes);
  if (include_wall_time) j["wall_time_seconds"] = report.wall_time_seconds;
  return j.dump(2) + "\n";
}

std::vector<SweepCell> DifficultySweep(const NavGraph& graph,
                                       const PhiTable& phi,
                                       const WordVectors& words,
                                       const SweepConfig& config) {
  const World world{graph, phi, words};
  std::vector<SweepCell> cells;
  for (int nh : config.max_hops) {
    for (int nq : config.query_sizes) {
      SweepCell cell{nh, nq, std::nullopt, {}};
      try {
        GenerationConfig gen{nh, nq, config.counts, config.seed};
        const DatasetSplits data = GenerateDataset(graph, gen);
        Agent agent{config.agent, AgentParameters::Initialize(config.agent),
                    graph.Checksum()};
        Train(agent, world, data.train, config.train);
        EvalSettings settings;
        settings.max_hops = nh;
        settings.query_size = nq;
        settings.width = config.width;
        settings.threads = config.threads;
        const AgentNavigator navigator(agent, world);
        cell.reward = AverageReward(navigator, graph, data.test, settings).value;
      } catch (const Error& e) {
        cell.error = e.what();
        Warn("sweep cell N_h=" + std::to_string(nh) + " N_q=" +
             std::to_string(nq) + " failed: " + e.what());
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string SweepToJson(const std::vector<SweepCell>& cells,
                        const SweepConfig& config) {
  Json j;
  j["metric"] = "sweep";
  j["seed"] = config.seed;
  j["core"] = CoreTypeName(config.agent.core);
  j["layers"] = config.agent.layers;
  j["units"] = config.agent.units;
  j["query"] = QueryModeName(config.agent.query);
  j["epochs"] = config.train.epochs;
  Json list = Json::array();
  for (const auto& c : cells) {
    Json cell = {{"nh", c.max_hops}, {"nq", c.query_size}};
    if (c.reward) {
      cell["reward"] = *c.reward;
    } else {
      cell["reward"] = nullptr;
      cell["error"] = c.error;
    }
    list.push_back(std::move(cell));
  }
  j["cells"] = std::move(list);
  return j.dump(2) + "\n";
}

std::string RenderReport(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
  std::ostringstream out;
  char buf[64];
  if (j.value("metric", "") == "sweep") {
    std::vector<int> nqs, nhs;
    std::map<std::pair<int, int>, std::string> values;
    for (const auto& c : j.at("cells")) {
      const int nh = c.at("nh").get<int>(), nq = c.at("nq").get<int>();
      if (std::find(nhs.begin(), nhs.end(), nh) == nhs.end()) nhs.push_back(nh);
      if (std::find(nqs.begin(), nqs.end(), nq) == nqs.end()) nqs.push_back(nq);
      if (c.at("reward").is_null()) {
        values[{nq, nh}] = "fail";
      } else {
        std::snprintf(buf, sizeof buf, "%.1f", 100.0 * c.at("reward").get<double>());
        values[{nq, nh}] = buf;
      }
    }
    out << "Average reward (%), " << j.value("core", "") << " "
        << j.value("layers", 0) << "x" << j.value("units", 0) << " "
        << j.value("query", "") << "\n";
    out << "        ";
    for (int nq : nqs) {
      std::snprintf(buf, sizeof buf, "| N_q=%-*d", static_cast<int>(8 * nhs.size() - 5), nq);
      out << buf;
    }
    out << "\n  N_h:  ";
    for (std::size_t q = 0; q < nqs.size(); ++q) {
      out << "|";
      for (int nh : nhs) {
        std::snprintf(buf, sizeof buf, "%7d ", nh);
        out << buf;
      }
    }
    out << "\n        ";
    for (int nq : nqs) {
      out << "|";
      for (int nh : nhs) {
        std::snprintf(buf, sizeof buf, "%7s ", values[{nq, nh}].c_str());
        out << buf;
      }
    }
    out << "\n";
    return out.str();
  }
  const auto& cfg = j.at("config");
  std::size_t successes = 0, total = 0;
  for (const auto& o : j.at("outcomes")) {
    ++total;
    successes += o.at("success").get<bool>();
  }
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * j.at("value").get<double>());
  out << "dataset  " << j.value("dataset", "") << "\n"
      << "model    " << j.value("model", "") << "\n";
  if (j.at("metric") == "recall") {
    out << "Recall@" << cfg.at("k").get<int>() << "  " << buf << "%";
  } else {
    out << "Average reward  " << buf << "%  (N_h=" << cfg.at("nh").get<int>()
        << ", N_q=" << cfg.at("nq").get<int>()
        << ", width=" << cfg.at("width").get<int>() << ")";
  }
  out << "  [" << successes << "/" << total << "]\n";
  return out.str();
}

}  // namespace webnav
