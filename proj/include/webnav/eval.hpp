#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "webnav/agent.hpp"
#include "webnav/dataset.hpp"
#include "webnav/embeddings.hpp"
#include "webnav/graph.hpp"
#include "webnav/search.hpp"

namespace webnav {

// Anything that can propose finished navigation traces for a query.
class Navigator {
 public:
  virtual ~Navigator() = default;
  // Most likely first, at most `width` traces.
  virtual std::vector<Trace> Navigate(const Example& example, int width,
                                      int max_hops) const = 0;
};

// NeuAgent via beam search. Reads only the example's query.
class AgentNavigator : public Navigator {
 public:
  AgentNavigator(const Agent& agent, const World& world)
      : agent_(agent), world_(world) {}
  std::vector<Trace> Navigate(const Example& example, int width,
                              int max_hops) const override;

 private:
  const Agent& agent_;
  const World& world_;
};

struct ExampleOutcome {
  std::size_t index = 0;
  NodeId target = 0;
  NodeId end_node = 0;
  bool stopped = false;
  bool success = false;
};

struct EvalReport {
  std::string dataset;
  std::string model;
  std::string metric;  // "reward" or "recall"
  double value = 0;
  std::vector<ExampleOutcome> outcomes;
  int max_hops = 0;
  int query_size = 0;
  int width = 0;
  int k = 0;
  double wall_time_seconds = 0;
};

struct EvalSettings {
  std::string dataset_id;
  std::string model_id;
  int max_hops = 8;
  int query_size = 0;
  int width = 4;  // N_n for average reward
  int threads = 1;
};

// Success iff the top-ranked trace ends with a voluntary stop on a node that
// contains the query. The trace is replayed through the environment.
EvalReport AverageReward(const Navigator& navigator, const NavGraph& graph,
                         const std::vector<Example>& examples,
                         const EvalSettings& settings);

// Agent Recall@K: beam width K; success iff the target is the end node of
// any returned trace, stopped or force-finished.
EvalReport AgentRecallAtK(const Navigator& navigator,
                          const std::vector<Example>& examples, int k,
                          const EvalSettings& settings);

// SimpleSearch Recall@K: success iff the target is in the top K.
EvalReport SearchRecallAtK(const InvertedIndex& index,
                           const std::vector<Example>& examples, int k,
                           const EvalSettings& settings);

// Throws DataError when `expected` differs from the graph's checksum.
void RequireGraphChecksum(const NavGraph& graph, std::uint64_t expected,
                          const std::string& what);

std::string ReportToJson(const EvalReport& report, bool include_wall_time);

struct SweepConfig {
  std::vector<int> max_hops = {4, 8};
  std::vector<int> query_sizes = {1, 2, 4};
  SplitCounts counts{200, 20, 50};
  std::uint64_t seed = 0;
  AgentConfig agent;
  TrainConfig train;
  int width = 4;
  int threads = 1;
};

struct SweepCell {
  int max_hops = 0;
  int query_size = 0;
  std::optional<double> reward;  // test-set average reward
  std::string error;             // set when the cell failed
};

// One model per (N_h, N_q) cell, trained on a dataset generated from the
// same graph and seed, scored on its test split. Cells are ordered N_h-major.
std::vector<SweepCell> DifficultySweep(const NavGraph& graph,
                                       const PhiTable& phi,
                                       const WordVectors& words,
                                       const SweepConfig& config);

std::string SweepToJson(const std::vector<SweepCell>& cells,
                        const SweepConfig& config);

// Text table for an eval report or a sweep report (JSON input).
std::string RenderReport(const std::string& json_text);

}  // namespace webnav
